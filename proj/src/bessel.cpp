#include "spotdyn/bessel.hpp"

#include <cmath>
#include <stdexcept>

namespace spotdyn {

namespace {

using lcplx = std::complex<long double>;

constexpr long double kGammaE = 0.5772156649015328606065120900824024L;
constexpr double kOverflowCap = 690.0;  // exp() overflow margin for double

void check_arg(cplx z) {
  if (z == cplx(0.0, 0.0)) throw std::domain_error("bessel: z = 0");
  if (std::real(z) < -1e-14 * std::abs(z))
    throw std::domain_error("bessel: argument outside right half plane");
  if (std::real(z) > kOverflowCap) throw std::overflow_error("bessel: Re z too large");
}

// I_0..I_{n_max} by downward (Miller) recurrence, normalized with the
// generating-function identity e^z = I_0 + 2*sum_{k>=1} I_k.  Downward
// recurrence amplifies the minimal-at-large-order solution I_k, so the seed
// direction is irrelevant once the start order is high enough.
std::vector<lcplx> miller_i(int n_max, lcplx z) {
  const long double az = std::abs(z);
  int start = n_max + 26 + static_cast<int>(az + 4.0L * std::sqrt(az));
  std::vector<lcplx> y(static_cast<size_t>(start) + 2);
  y[start + 1] = 0.0L;
  y[start] = 1e-240L;
  for (int k = start; k >= 1; --k)
    y[k - 1] = y[k + 1] + (2.0L * k / z) * y[k];
  lcplx norm = y[0];
  for (int k = 1; k <= start; ++k) norm += 2.0L * y[k];
  lcplx scale = std::exp(z) / norm;
  std::vector<lcplx> out(static_cast<size_t>(n_max) + 1);
  for (int k = 0; k <= n_max; ++k) out[k] = y[k] * scale;
  return out;
}

// Ascending series for K_0 and K_1, valid (to ~1e-13 in long double) for
// |z| <= 16: K_0 = -(log(z/2)+g) I_0 + sum H_k u_k,
//            K_1 = 1/z + (log(z/2)+g) I_1 - (z/4) sum (H_k + H_{k+1}) v_k.
void k01_series(lcplx z, lcplx& k0, lcplx& k1) {
  const lcplx q = z * z / 4.0L;
  lcplx u = 1.0L, v = 1.0L;        // u_k = q^k/(k!)^2, v_k = q^k/(k!(k+1)!)
  lcplx i0 = 1.0L, i1s = 1.0L;     // i1s = I_1/(z/2)
  lcplx s0 = 0.0L, s1 = 1.0L;      // s1 accumulates (H_k+H_{k+1}) v_k, k=0 term = 1
  long double h = 0.0L;            // H_k
  for (int k = 1; k <= 200; ++k) {
    u *= q / static_cast<long double>(k) / static_cast<long double>(k);
    v *= q / static_cast<long double>(k) / static_cast<long double>(k + 1);
    h += 1.0L / k;
    i0 += u;
    i1s += v;
    s0 += h * u;
    s1 += (2.0L * h + 1.0L / (k + 1)) * v;
    if (std::abs(u) < 1e-19L * std::abs(i0) && std::abs(v) < 1e-19L * std::abs(i1s))
      break;
  }
  const lcplx lg = std::log(z / 2.0L) + kGammaE;
  k0 = -lg * i0 + s0;
  k1 = 1.0L / z + lg * (z / 2.0L) * i1s - (z / 4.0L) * s1;
}

// Large-|z| expansion K_nu ~ sqrt(pi/2z) e^{-z} sum_k prod_j(4nu^2-(2j-1)^2)/(k!(8z)^k),
// truncated at the smallest term; below ~1.5e-14 for |z| >= 16.
lcplx k_asymptotic(int nu, lcplx z) {
  const long double pi = 3.14159265358979323846264338327950L;
  const long double mu4 = 4.0L * nu * nu;
  lcplx sum = 1.0L, term = 1.0L;
  long double last = 1e30L;
  for (int k = 1; k <= 60; ++k) {
    const long double odd = 2.0L * k - 1.0L;
    term *= (mu4 - odd * odd) / (8.0L * k) / z;
    if (std::abs(term) >= last) break;  // divergent tail reached
    sum += term;
    last = std::abs(term);
    if (last < 1e-19L * std::abs(sum)) break;
  }
  return std::sqrt(pi / (2.0L * z)) * std::exp(-z) * sum;
}

// Steed's continued fraction (CF2 of Thompson & Barnett) for K_0, K_1.
// Complements the ascending series in the band 4 <= |z| <= 16: the series
// loses ~e^{2 Re z} digits to cancellation there, while CF2 is stable for
// Re z bounded away from 0 (its convergence degrades toward the imaginary
// axis, where the series is accurate again).  Returns false if not converged.
bool k01_cf2(lcplx z, lcplx& k0, lcplx& k1) {
  const long double pi = 3.14159265358979323846264338327950L;
  const long double a1 = 0.25L;
  lcplx b = 2.0L * (1.0L + z);
  lcplx d = 1.0L / b;
  lcplx delh = d, h = d;
  lcplx q1 = 0.0L, q2 = 1.0L, q = a1, c = a1;
  long double a = -a1;
  lcplx s = 1.0L + q * delh;
  bool ok = false;
  for (int i = 2; i <= 30000; ++i) {
    a -= 2.0L * (i - 1);
    c = -a * c / static_cast<long double>(i);
    lcplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0L;
    d = 1.0L / (b + a * d);
    delh = (b * d - 1.0L) * delh;
    h += delh;
    lcplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < 1e-20L * std::abs(s)) {
      ok = true;
      break;
    }
  }
  if (!ok) return false;
  h = a1 * h;
  k0 = std::sqrt(pi / (2.0L * z)) * std::exp(-z) / s;
  k1 = k0 * (z + 0.5L - h) / z;
  return true;
}

std::vector<lcplx> k_upward(int n_max, lcplx z) {
  lcplx k0, k1;
  const long double az = std::abs(z);
  if (az > 16.0L) {
    k0 = k_asymptotic(0, z);
    k1 = k_asymptotic(1, z);
  } else if (az < 4.0L || std::real(z) < 1.5L || !k01_cf2(z, k0, k1)) {
    k01_series(z, k0, k1);
  }
  std::vector<lcplx> out(static_cast<size_t>(n_max) + 1);
  out[0] = k0;
  if (n_max >= 1) out[1] = k1;
  for (int k = 1; k < n_max; ++k)
    out[k + 1] = out[k - 1] + (2.0L * k / z) * out[k];  // stable: K grows in order
  return out;
}

lcplx to_l(cplx z) { return {static_cast<long double>(z.real()), static_cast<long double>(z.imag())}; }
cplx to_d(lcplx z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

}  // namespace

double bessel_overflow_cap() { return kOverflowCap; }

std::vector<cplx> bessel_i_array(int n_max, cplx z) {
  check_arg(z);
  auto vals = miller_i(n_max, to_l(z));
  std::vector<cplx> out(vals.size());
  for (size_t k = 0; k < vals.size(); ++k) out[k] = to_d(vals[k]);
  return out;
}

std::vector<cplx> bessel_k_array(int n_max, cplx z) {
  check_arg(z);
  auto vals = k_upward(n_max, to_l(z));
  std::vector<cplx> out(vals.size());
  for (size_t k = 0; k < vals.size(); ++k) out[k] = to_d(vals[k]);
  return out;
}

cplx bessel_i(int n, cplx z) {
  if (n < 0) n = -n;  // integer order symmetry
  return bessel_i_array(n, z)[n];
}

cplx bessel_k(int n, cplx z) {
  if (n < 0) n = -n;
  return bessel_k_array(n, z)[n];
}

cplx bessel_i_prime(int n, cplx z) {
  if (n < 0) n = -n;
  auto iv = bessel_i_array(n + 1, z);
  if (n == 0) return iv[1];
  return 0.5 * (iv[n - 1] + iv[n + 1]);
}

cplx bessel_k_prime(int n, cplx z) {
  if (n < 0) n = -n;
  auto kv = bessel_k_array(n + 1, z);
  if (n == 0) return -kv[1];
  return -0.5 * (kv[n - 1] + kv[n + 1]);
}

BesselPair bessel_pair(int n, cplx z) {
  if (n < 0) n = -n;
  auto iv = bessel_i_array(n + 1, z);
  auto kv = bessel_k_array(n + 1, z);
  BesselPair p;
  p.order = n;
  p.argument = z;
  p.i_val = iv[n];
  p.k_val = kv[n];
  if (n == 0) {
    p.i_deriv = iv[1];
    p.k_deriv = -kv[1];
  } else {
    p.i_deriv = 0.5 * (iv[n - 1] + iv[n + 1]);
    p.k_deriv = -0.5 * (kv[n - 1] + kv[n + 1]);
  }
  return p;
}

}  // namespace spotdyn
