#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "greens_internal.hpp"
#include "spotdyn/bessel.hpp"

namespace spotdyn::detail {
namespace {

constexpr double pi = std::numbers::pi;
constexpr double euler_gamma = 0.5772156649015328606;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

Vec2 vec(const Point& p) { return Vec2(p.x, p.y); }

// ---------------------------------------------------------------------------
// Modified Neumann Green's function on the unit disk, closed form:
//   G(x;x0) = -(1/2pi)[ log|x-x0| + (1/2)log(|x|^2|x0|^2 - 2 x.x0 + 1)
//                       - (|x|^2+|x0|^2)/2 + 3/4 ]
// The second log is |x0| |x - x0/|x0|^2| written without the image point, so
// it stays finite as x0 -> 0.

double disk_image_sq(const Vec2& x, const Vec2& x0) {
  return x.squaredNorm() * x0.squaredNorm() - 2.0 * x.dot(x0) + 1.0;
}

double disk_neumann_G(const Vec2& x, const Vec2& x0) {
  const double r2 = (x - x0).squaredNorm();
  return -(0.5 * std::log(r2) + 0.5 * std::log(disk_image_sq(x, x0)) -
           0.5 * (x.squaredNorm() + x0.squaredNorm()) + 0.75) /
         (2.0 * pi);
}

// Field-point gradient and Hessian of G.  p = |x0|^2 x - x0 is |x0| times the
// image-term vector, so every expression below is polynomially smooth in x0.
Vec2 disk_neumann_grad(const Vec2& x, const Vec2& x0) {
  const Vec2 d = x - x0;
  const Vec2 p = x0.squaredNorm() * x - x0;
  const double msq = disk_image_sq(x, x0);
  return -(d / d.squaredNorm() + p / msq - x) / (2.0 * pi);
}

Mat2 disk_neumann_hess(const Vec2& x, const Vec2& x0) {
  const Vec2 d = x - x0;
  const double r2 = d.squaredNorm();
  const Vec2 p = x0.squaredNorm() * x - x0;
  const double msq = disk_image_sq(x, x0);
  const Mat2 id = Mat2::Identity();
  Mat2 h = (id - 2.0 * d * d.transpose() / r2) / r2;
  h += x0.squaredNorm() * id / msq - 2.0 * p * p.transpose() / (msq * msq);
  h -= id;
  return -h / (2.0 * pi);
}

struct NeumannSelf {
  double R;
  Vec2 gradR;
  Mat2 H;
};

NeumannSelf disk_neumann_self(const Vec2& x0) {
  const double b = x0.squaredNorm();
  NeumannSelf s;
  s.R = -(std::log(1.0 - b) - b + 0.75) / (2.0 * pi);
  s.gradR = x0 * (2.0 - b) / (1.0 - b) / (2.0 * pi);
  const double om = 1.0 - b;
  Mat2 img = b * Mat2::Identity() - 2.0 * x0 * x0.transpose();
  s.H = -(img / (om * om) - Mat2::Identity()) / (2.0 * pi);
  return s;
}

// ---------------------------------------------------------------------------
// Helmholtz Green's function on the unit disk:
//   G = (1/2pi) K0(z|x-x0|) - (1/pi) sum_n c_n B_n I_n(z rho0) I_n(z rho)
//                                    cos(n(theta-theta0))
// with z = sqrt(mu), B_n = K_n'(z)/I_n'(z), c_0 = 1/2, c_n = 1.

struct HelmSeries {
  cplx mu, z;
  int nmax = 0;
  std::vector<cplx> B;  // B_n, n = 0..nmax

  HelmSeries(cplx mu_, double rho_pair_max, bool for_derivatives = true)
      : mu(mu_), z(std::sqrt(mu_)) {
    const double q = std::min(rho_pair_max, 0.999999);
    // Terms decay like (rho rho0)^n / n; Hessian-level sums carry an extra n^2.
    // Choose the order so the weighted tail is below round-off.
    const auto weight = [for_derivatives](int m) {
      return for_derivatives ? (m + 2.0) * (m + 2.0) : 1.0;
    };
    int n = 16;
    while (n < 120 && weight(n) * std::pow(q, n) > 1e-16) ++n;
    if (weight(n) * std::pow(q, n) > 1e-10)
      throw std::runtime_error(
          "disk Helmholtz series: sources too close to the boundary (tail bound " +
          std::to_string(weight(n) * std::pow(q, n)) + " at order 120)");
    nmax = n;
    const auto Kz = bessel_k_array(nmax + 1, z);
    const auto Iz = bessel_i_array(nmax + 1, z);
    B.resize(nmax + 1);
    B[0] = -Kz[1] / Iz[1];
    for (int m = 1; m <= nmax; ++m) {
      const cplx kp = -0.5 * (Kz[m - 1] + Kz[m + 1]);
      const cplx ip = 0.5 * (Iz[m - 1] + Iz[m + 1]);
      B[m] = kp / ip;
    }
  }
};

struct PolarPt {
  double rho = 0.0, theta = 0.0;
  Vec2 e = Vec2(1.0, 0.0), ep = Vec2(0.0, 1.0);
};

PolarPt polar_of(const Vec2& p) {
  PolarPt q;
  q.rho = p.norm();
  if (q.rho > 0.0) {
    q.theta = std::atan2(p.y(), p.x());
    q.e = p / q.rho;
    q.ep = Vec2(-q.e.y(), q.e.x());
  }
  return q;
}

// I_n(z rho) for n = 0..nmax+2 (two extra orders feed the derivative
// recurrences).
std::vector<cplx> radial_I(const HelmSeries& S, double rho) {
  if (S.z * rho == 0.0) {
    std::vector<cplx> I(S.nmax + 3, cplx(0.0));
    I[0] = 1.0;
    return I;
  }
  return bessel_i_array(S.nmax + 2, S.z * rho);
}

cplx In_prime(const std::vector<cplx>& I, int n) {
  return n == 0 ? I[1] : 0.5 * (I[n - 1] + I[n + 1]);
}

cplx In_second(const std::vector<cplx>& I, int n) {
  const cplx lo = n >= 2 ? I[n - 2] : I[2 - n];
  return 0.25 * (lo + 2.0 * I[n] + I[n + 2]);
}

double cn(int n) { return n == 0 ? 0.5 : 1.0; }

// Boundary-correction series W and its field-point derivatives at (rho,theta)
// with source (rho0,theta0).  Returns value, gradient, Hessian as requested.
struct WData {
  cplx value{0.0};
  Vec2c grad = Vec2c::Zero();
  Mat2c hess = Mat2c::Zero();
};

WData series_field_data(const HelmSeries& S, const PolarPt& xf, const PolarPt& xs,
                        bool want_grad, bool want_hess) {
  WData out;
  const auto Ia = radial_I(S, xs.rho);
  const auto Ib = radial_I(S, xf.rho);
  const double dth = xf.theta - xs.theta;
  if (xf.rho < 1e-9) {
    // Only the lowest angular modes survive at the disk center.
    const cplx a0 = -cn(0) * S.B[0] * Ia[0] / pi;
    const cplx a1 = S.nmax >= 1 ? -S.B[1] * Ia[1] / pi : cplx(0.0);
    const cplx a2 = S.nmax >= 2 ? -S.B[2] * Ia[2] / pi : cplx(0.0);
    out.value = a0 * Ib[0] + a1 * Ib[1] * std::cos(dth) + a2 * Ib[2] * std::cos(2.0 * dth);
    if (want_grad) {
      const Vec2c es = xs.e.cast<cplx>();
      out.grad = 0.5 * S.z * a1 * es;
    }
    if (want_hess) {
      const double c2 = std::cos(2.0 * xs.theta), s2 = std::sin(2.0 * xs.theta);
      Mat2 m2;
      m2 << c2, s2, s2, -c2;
      out.hess = 0.5 * S.mu * a0 * Mat2::Identity().cast<cplx>() +
                 0.25 * S.mu * a2 * m2.cast<cplx>();
    }
    return out;
  }
  cplx val = 0.0, w_r = 0.0, w_t = 0.0, a_ee = 0.0, a_mix = 0.0, a_pp = 0.0;
  const cplx zr = S.z * xf.rho;
  for (int n = 0; n <= S.nmax; ++n) {
    const cplx a = -cn(n) * S.B[n] * Ia[n] / pi;
    const double cs = std::cos(n * dth), sn = std::sin(n * dth);
    val += a * Ib[n] * cs;
    if (want_grad || want_hess) {
      w_r += S.z * a * In_prime(Ib, n) * cs;
      w_t -= a * double(n) * Ib[n] * sn;
    }
    if (want_hess) {
      a_ee += S.mu * a * In_second(Ib, n) * cs;
      // Combinations written with I_{n+1} so the 1/rho^2 factors stay finite
      // near the center.
      a_mix -= a * double(n) * sn * (double(n - 1) * Ib[n] + zr * Ib[n + 1]);
      a_pp += a * cs * (zr * Ib[n + 1] - double(n) * double(n - 1) * Ib[n]);
    }
  }
  out.value = val;
  if (want_grad)
    out.grad = xf.e.cast<cplx>() * w_r + xf.ep.cast<cplx>() * (w_t / xf.rho);
  if (want_hess) {
    const double r2 = xf.rho * xf.rho;
    const Mat2c ee = (xf.e * xf.e.transpose()).cast<cplx>();
    const Mat2c pp = (xf.ep * xf.ep.transpose()).cast<cplx>();
    const Mat2c mix = (xf.e * xf.ep.transpose() + xf.ep * xf.e.transpose()).cast<cplx>();
    out.hess = a_ee * ee + (a_mix / r2) * mix + (a_pp / r2) * pp;
  }
  return out;
}

// Source-point gradient of W.
Vec2c series_source_grad(const HelmSeries& S, const PolarPt& xf, const PolarPt& xs) {
  const auto Ia = radial_I(S, xs.rho);
  const auto Ib = radial_I(S, xf.rho);
  const double dth = xf.theta - xs.theta;
  if (xs.rho < 1e-9) {
    const cplx a1 = S.nmax >= 1 ? -S.B[1] * Ib[1] / pi : cplx(0.0);
    return 0.5 * S.z * a1 * xf.e.cast<cplx>();
  }
  cplx w_r = 0.0, w_t = 0.0;
  for (int n = 0; n <= S.nmax; ++n) {
    const cplx a = -cn(n) * S.B[n] * Ib[n] / pi;
    w_r += S.z * a * In_prime(Ia, n) * std::cos(n * dth);
    w_t += a * double(n) * Ia[n] * std::sin(n * dth);
  }
  return xs.e.cast<cplx>() * w_r + xs.ep.cast<cplx>() * (w_t / xs.rho);
}

// Free-space kernel (1/2pi) K0(z|x-x0|) pieces.
struct FreeKernel {
  cplx value;
  Vec2c grad_field, grad_source;
  Mat2c hess;  // field-point Hessian; source-derivative-of-gradient is -hess
};

FreeKernel free_kernel(const HelmSeries& S, const Vec2& x, const Vec2& x0) {
  FreeKernel f;
  const Vec2 d = x - x0;
  const double r = d.norm();
  const cplx zr = S.z * r;
  const cplx K0 = bessel_k(0, zr), K1 = bessel_k(1, zr);
  f.value = K0 / (2.0 * pi);
  const Vec2c rhat = (d / r).cast<cplx>();
  f.grad_field = -(S.z / (2.0 * pi)) * K1 * rhat;
  f.grad_source = -f.grad_field;
  const Mat2c id = Mat2c::Identity();
  const Mat2c rr = rhat * rhat.transpose();
  f.hess = (S.mu / (2.0 * pi)) * (K0 * rr + (K1 / zr) * (2.0 * rr - id));
  return f;
}

struct HelmSelf {
  cplx R;
  Vec2c F;
  Mat2c FF;  // total source derivative of F
  Mat2c H;   // Hessian of the smooth part (r^2 log r removed)
};

HelmSelf disk_helm_self(const HelmSeries& S, const Vec2& x0) {
  HelmSelf out;
  const PolarPt p = polar_of(x0);
  const cplx log_fac = euler_gamma + std::log(S.z / 2.0);
  const Mat2c id = Mat2c::Identity();
  if (p.rho < 1e-12) {
    // Only the n = 0 and n = 1 terms survive at the centre, analytically.
    const cplx iso = -(S.mu / (4.0 * pi)) * (S.B[0] + S.B[1]);
    out.R = -log_fac / (2.0 * pi) - S.B[0] / (2.0 * pi);
    out.F = Vec2c::Zero();
    out.FF = iso * id;
    out.H = (-(S.mu / (4.0 * pi)) * (log_fac - 1.0 + S.B[0])) * id;
    return out;
  }
  const auto Ia = radial_I(S, p.rho);
  cplx Rw = 0.0, f_r = 0.0, alpha = 0.0, beta = 0.0, h_ee = 0.0, h_pp = 0.0;
  const cplx t = S.z * p.rho;
  for (int n = 0; n <= S.nmax; ++n) {
    const cplx cB = cn(n) * S.B[n];
    const cplx In = Ia[n], Ip = In_prime(Ia, n), Is = In_second(Ia, n);
    Rw += cB * In * In;
    f_r += cB * In * Ip;
    alpha += cB * (Ip * Ip + In * Is);
    h_ee += cB * In * Is;
    beta += cB * (double(n) * In * In + t * In * Ia[n + 1]);
    h_pp += cB * (t * In * Ia[n + 1] - double(n) * double(n - 1) * In * In);
  }
  out.R = -log_fac / (2.0 * pi) - Rw / pi;
  const double r2 = p.rho * p.rho;
  const Mat2c ee = (p.e * p.e.transpose()).cast<cplx>();
  const Mat2c pp = (p.ep * p.ep.transpose()).cast<cplx>();
  out.F = -(S.z / pi) * f_r * p.e.cast<cplx>();
  out.FF = -(S.mu / pi) * alpha * ee - beta / (pi * r2) * pp;
  out.H = -(S.mu / (4.0 * pi)) * (log_fac - 1.0) * id -
          (S.mu / pi) * h_ee * ee - h_pp / (pi * r2) * pp;
  return out;
}

cplx helm_value(const HelmSeries& S, const Vec2& x, const Vec2& x0) {
  const PolarPt xf = polar_of(x), xs = polar_of(x0);
  return free_kernel(S, x, x0).value +
         series_field_data(S, xf, xs, false, false).value;
}

double pair_radius_bound(const std::vector<Point>& xs) {
  double r = 0.0;
  for (const auto& p : xs) r = std::max(r, std::hypot(p.x, p.y));
  return r * r;
}

// Mixed source/field second derivative of the boundary series by centered
// differences over the source position (the free-kernel part is analytic).
Mat2c series_mixed_fd(const HelmSeries& S, const Vec2& x, const Vec2& x0) {
  const double delta = 1e-4;
  Mat2c out;
  const PolarPt xf = polar_of(x);
  for (int k = 0; k < 2; ++k) {
    Vec2 sp = x0, sm = x0;
    sp[k] += delta;
    sm[k] -= delta;
    const Vec2c gp = series_field_data(S, xf, polar_of(sp), true, false).grad;
    const Vec2c gm = series_field_data(S, xf, polar_of(sm), true, false).grad;
    out.row(k) = ((gp - gm) / (2.0 * delta)).transpose();
  }
  return out;
}

}  // namespace

NeumannMatrix disk_neumann_local(const std::vector<Point>& sources) {
  const size_t n = sources.size();
  NeumannMatrix out(n, std::vector<NeumannLocalData>(n));
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i) {
      NeumannLocalData& d = out[j][i];
      d.source = sources[i];
      const Vec2 xj = vec(sources[j]), xi = vec(sources[i]);
      if (i == j) {
        const NeumannSelf s = disk_neumann_self(xi);
        d.regular_value = s.R;
        d.gradient = s.gradR;
        d.hessian = s.H;
      } else {
        d.value = disk_neumann_G(xj, xi);
        d.gradient = disk_neumann_grad(xj, xi);
        d.hessian = disk_neumann_hess(xj, xi);
      }
    }
  return out;
}

HelmholtzMatrix disk_helmholtz_local(cplx mu, const std::vector<Point>& sources) {
  const size_t n = sources.size();
  const HelmSeries S(mu, pair_radius_bound(sources));
  HelmholtzMatrix out(n, std::vector<HelmholtzLocalData>(n));
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i) {
      HelmholtzLocalData& d = out[j][i];
      d.parameter = mu;
      d.source = sources[i];
      const Vec2 xj = vec(sources[j]), xi = vec(sources[i]);
      if (i == j) {
        const HelmSelf s = disk_helm_self(S, xi);
        d.regular_value = s.R;
        d.grad_regular = s.F;
        d.grad_source_of_grad = s.FF;
        d.hessian = s.H;
      } else {
        const FreeKernel f = free_kernel(S, xj, xi);
        const PolarPt xf = polar_of(xj), xs = polar_of(xi);
        const WData w = series_field_data(S, xf, xs, true, true);
        d.value = f.value + w.value;
        d.grad_source = f.grad_source + series_source_grad(S, xf, xs);
        d.hessian = f.hess + w.hess;
        d.grad_source_of_grad = -f.hess + series_mixed_fd(S, xj, xi);
      }
    }
  return out;
}

double disk_neumann_value(const Point& x, const Point& x0) {
  return disk_neumann_G(vec(x), vec(x0));
}

cplx disk_helmholtz_value(cplx mu, const Point& x, const Point& x0) {
  const double q = std::hypot(x.x, x.y) * std::hypot(x0.x, x0.y);
  const HelmSeries S(mu, q, false);
  return helm_value(S, vec(x), vec(x0));
}

// ---------------------------------------------------------------------------
// Half disk {|x| < a, y > 0}: reflect the source across the flat side and add
// the two disk contributions.  For radius a, evaluate the unit-disk functions
// at x/a with parameter mu a^2; values map one-to-one, gradients pick up 1/a,
// second derivatives 1/a^2, and the regular self data the log(a) shifts
// worked out from |x-x0| = a |u-u0|.

namespace {

Vec2 reflect(const Vec2& p) { return Vec2(p.x(), -p.y()); }

const Mat2 reflect_mat = (Mat2() << 1.0, 0.0, 0.0, -1.0).finished();

}  // namespace

NeumannMatrix half_disk_neumann_local(double a, const std::vector<Point>& sources) {
  const size_t n = sources.size();
  NeumannMatrix out(n, std::vector<NeumannLocalData>(n));
  const double log_shift = std::log(a) / (2.0 * pi);
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i) {
      NeumannLocalData& d = out[j][i];
      d.source = sources[i];
      const Vec2 uj = vec(sources[j]) / a, ui = vec(sources[i]) / a;
      const Vec2 uir = reflect(ui);
      if (i == j) {
        const NeumannSelf s = disk_neumann_self(ui);
        d.regular_value = s.R + disk_neumann_G(uj, uir) + log_shift;
        d.gradient = (s.gradR + disk_neumann_grad(uj, uir)) / a;
        d.hessian = (s.H + disk_neumann_hess(uj, uir)) / (a * a);
      } else {
        d.value = disk_neumann_G(uj, ui) + disk_neumann_G(uj, uir);
        d.gradient = (disk_neumann_grad(uj, ui) + disk_neumann_grad(uj, uir)) / a;
        d.hessian = (disk_neumann_hess(uj, ui) + disk_neumann_hess(uj, uir)) / (a * a);
      }
    }
  return out;
}

HelmholtzMatrix half_disk_helmholtz_local(double a, cplx mu,
                                          const std::vector<Point>& sources) {
  const size_t n = sources.size();
  std::vector<Point> scaled(n);
  double qmax = 0.0;
  for (size_t i = 0; i < n; ++i) {
    scaled[i] = Point{sources[i].x / a, sources[i].y / a};
    qmax = std::max(qmax, std::hypot(scaled[i].x, scaled[i].y));
  }
  const HelmSeries S(mu * a * a, qmax * qmax);
  const double a2 = a * a;
  const cplx jlog = std::log(a);
  const Mat2c J = reflect_mat.cast<cplx>();
  HelmholtzMatrix out(n, std::vector<HelmholtzLocalData>(n));
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i) {
      HelmholtzLocalData& d = out[j][i];
      d.parameter = mu;
      d.source = sources[i];
      const Vec2 uj = vec(scaled[j]), ui = vec(scaled[i]);
      const Vec2 uir = reflect(ui);
      const PolarPt pj = polar_of(uj), pir = polar_of(uir);
      const FreeKernel fr = free_kernel(S, uj, uir);
      const WData wr = series_field_data(S, pj, pir, true, true);
      const Mat2c mix_r = -fr.hess + series_mixed_fd(S, uj, uir);
      if (i == j) {
        const HelmSelf s = disk_helm_self(S, ui);
        d.regular_value = s.R + fr.value + wr.value + jlog / (2.0 * pi);
        d.grad_regular = (s.F + fr.grad_field + wr.grad) / a;
        // Image term: both slots move with the source, the source slot through
        // the reflection.
        d.grad_source_of_grad =
            (s.FF + (fr.hess + wr.hess) + J * mix_r) / a2;
        d.hessian = (s.H + fr.hess + wr.hess) / a2 +
                    (mu / (4.0 * pi)) * jlog * Mat2c::Identity();
      } else {
        const FreeKernel f = free_kernel(S, uj, ui);
        const PolarPt pi_ = polar_of(ui);
        const WData w = series_field_data(S, pj, pi_, true, true);
        d.value = f.value + w.value + fr.value + wr.value;
        d.grad_source = (f.grad_source + series_source_grad(S, pj, pi_) +
                         J * (fr.grad_source + series_source_grad(S, pj, pir))) /
                        a;
        d.hessian = (f.hess + w.hess + fr.hess + wr.hess) / a2;
        d.grad_source_of_grad =
            ((-f.hess + series_mixed_fd(S, uj, ui)) + J * mix_r) / a2;
      }
    }
  return out;
}

double half_disk_neumann_value(double a, const Point& x, const Point& x0) {
  const Vec2 u = vec(x) / a, u0 = vec(x0) / a;
  return disk_neumann_G(u, u0) + disk_neumann_G(u, reflect(u0));
}

cplx half_disk_helmholtz_value(double a, cplx mu, const Point& x, const Point& x0) {
  const Vec2 u = vec(x) / a, u0 = vec(x0) / a;
  const double q = u.norm() * u0.norm();
  const HelmSeries S(mu * a * a, q, false);
  return helm_value(S, u, u0) + helm_value(S, u, reflect(u0));
}

}  // namespace spotdyn::detail

// ---------------------------------------------------------------------------
// Perturbed disk rho = 1 + sigma f(theta), single source at the origin.
// Mode 1 of f is a rigid translation of the disk, so it tilts the gradients;
// mode 2 deforms the Hessian-level data; higher modes enter only at O(sigma^2).

namespace spotdyn {

PerturbedDiskCorrections perturbed_disk_corrections(double sigma, double a2,
                                                    double b2, cplx mu) {
  constexpr double pi = std::numbers::pi;
  using Mat2 = Eigen::Matrix2d;
  using Mat2c = Eigen::Matrix2cd;
  PerturbedDiskCorrections out;
  const double q = std::hypot(a2, b2);
  if (sigma * q == 0.0) return out;
  const double phi = std::atan2(b2, a2);
  const double c = std::cos(0.5 * phi), s = std::sin(0.5 * phi);
  Mat2 rot;
  rot << c, -s, s, c;
  const Mat2 axes = rot * (Mat2() << -1.0, 0.0, 0.0, 1.0).finished() * rot.transpose();
  out.neumann_hessian = sigma * q / pi * axes;

  // F_n(rho) = K_n(z rho) - B_n I_n(z rho) vanishes to first order on the
  // boundary (B_n = K_n'(z)/I_n'(z)); the mode-2 boundary data feeds through
  // F_n''(1) and F_1(1).
  const cplx z = std::sqrt(mu);
  const auto K = bessel_k_array(3, z);
  const auto I = bessel_i_array(3, z);
  const cplx I1p = 0.5 * (I[0] + I[2]);
  const cplx I2p = 0.5 * (I[1] + I[3]);
  const cplx B0 = -K[1] / I[1];
  const cplx B1 = -0.5 * (K[0] + K[2]) / I1p;
  const cplx K0pp = 0.5 * (K[0] + K[2]);
  const cplx K1pp = 0.25 * (3.0 * K[1] + K[3]);
  const cplx I0pp = 0.5 * (I[0] + I[2]);
  const cplx I1pp = 0.25 * (3.0 * I[1] + I[3]);
  const cplx F0pp = mu * (K0pp - B0 * I0pp);
  const cplx F1pp = mu * (K1pp - B1 * I1pp);
  const cplx F1 = K[1] - B1 * I[1];
  const cplx phi_h = F0pp / I2p;
  const cplx phi_f = F0pp / I2p + F1pp / I1p - 2.0 * F1 / I1p;
  const Mat2c axes_c = axes.cast<cplx>();
  out.helmholtz_hessian = sigma * q * (z / (8.0 * pi)) * phi_h * axes_c;
  out.grad_source_of_grad = sigma * q * (z / (8.0 * pi)) * phi_f * axes_c;
  return out;
}

}  // namespace spotdyn

namespace spotdyn::detail {

namespace {

void mode_coeffs(const DomainSpec& dom, double& a1, double& b1, double& a2,
                 double& b2) {
  a1 = dom.fourier_cos.size() > 0 ? dom.fourier_cos[0] : 0.0;
  b1 = dom.fourier_sin.size() > 0 ? dom.fourier_sin[0] : 0.0;
  a2 = dom.fourier_cos.size() > 1 ? dom.fourier_cos[1] : 0.0;
  b2 = dom.fourier_sin.size() > 1 ? dom.fourier_sin[1] : 0.0;
}

}  // namespace

NeumannMatrix perturbed_disk_neumann_local(const DomainSpec& dom) {
  double a1, b1, a2, b2;
  mode_coeffs(dom, a1, b1, a2, b2);
  NeumannLocalData d;
  d.source = Point{0.0, 0.0};
  d.regular_value = -3.0 / (8.0 * pi);
  d.gradient = -(dom.sigma / pi) * Vec2(a1, b1);
  d.hessian = Mat2::Identity() / (2.0 * pi) +
              perturbed_disk_corrections(dom.sigma, a2, b2, cplx(1.0)).neumann_hessian;
  return {{d}};
}

HelmholtzMatrix perturbed_disk_helmholtz_local(const DomainSpec& dom, cplx mu) {
  double a1, b1, a2, b2;
  mode_coeffs(dom, a1, b1, a2, b2);
  const HelmSeries S(mu, 0.0);
  const HelmSelf s = disk_helm_self(S, Vec2::Zero());
  const PerturbedDiskCorrections corr = perturbed_disk_corrections(dom.sigma, a2, b2, mu);
  HelmholtzLocalData d;
  d.parameter = mu;
  d.source = Point{0.0, 0.0};
  d.regular_value = s.R;
  // Mode 1 translates the disk: the centered source sits at -sigma*(a1,b1)
  // relative to the disk center, where F ~ FF * offset.
  d.grad_regular = s.FF * Vec2c(-dom.sigma * a1, -dom.sigma * b1);
  d.grad_source_of_grad = s.FF + corr.grad_source_of_grad;
  d.hessian = s.H + corr.helmholtz_hessian;
  return {{d}};
}

double perturbed_disk_neumann_value(const DomainSpec& dom, const Point& x) {
  const Vec2 xv = vec(x);
  const PolarPt p = polar_of(xv);
  double g = disk_neumann_G(xv, Vec2::Zero());
  double rpow = p.rho;
  for (size_t m = 1; m <= dom.fourier_cos.size(); ++m) {
    const double am = dom.fourier_cos[m - 1], bm = dom.fourier_sin[m - 1];
    if (am != 0.0 || bm != 0.0)
      g -= dom.sigma / (double(m) * pi) * rpow *
           (am * std::cos(m * p.theta) + bm * std::sin(m * p.theta));
    rpow *= p.rho;
  }
  return g;
}

}  // namespace spotdyn::detail
