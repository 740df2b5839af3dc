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

// ---------------------------------------------------------------------------
// Modified Neumann function on [0,L] x [0,H].  Separating the y-average gives
//   G = g0(x,x0)/H - (1/2pi) sum Re log(1 - e^{-w}),  w = (pi/H)(D - iY),
// summed over the 1-D image distances D = |x - x0 - 2mL| and |x + x0 - 2mL|
// paired with Y = y - y0 and y + y0.  g0 is the 1-D modified Neumann function
//   g0(x,x0) = (x^2 + x0^2)/(2L) - max(x,x0) + L/3.
// Terms decay like e^{-pi D / H}, so the image sum should run along the long
// axis; for H > L we compute in swapped coordinates and permute the results.

cplx expm1c(cplx w) {
  if (std::abs(w) < 1e-2)
    return w * (1.0 + w / 2.0 * (1.0 + w / 3.0 * (1.0 + w / 4.0)));
  return std::exp(w) - 1.0;
}

// psi(w) = 1/(e^w - 1) and psi'(w); the tilde versions have the 1/w pole
// removed (used for the self term, where w -> 0).
cplx psi_fn(cplx w) { return 1.0 / expm1c(w); }

cplx psi_prime(cplx w) {
  const cplx em1 = expm1c(w);
  return -(em1 + 1.0) / (em1 * em1);
}

cplx psi_tilde(cplx w) {
  if (std::abs(w) < 0.1) {
    const cplx w2 = w * w;
    return -0.5 + w / 12.0 - w * w2 / 720.0 + w2 * w2 * w / 30240.0;
  }
  return psi_fn(w) - 1.0 / w;
}

cplx psi_tilde_prime(cplx w) {
  if (std::abs(w) < 0.1) {
    const cplx w2 = w * w;
    return 1.0 / 12.0 - w2 / 240.0 + w2 * w2 / 6048.0;
  }
  return psi_prime(w) + 1.0 / (w * w);
}

struct RealPairData {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
};

// One log term: accumulates f = -(1/2pi) Re log(1 - e^{-w}) and its field
// derivatives.  w_x = (pi/H) s, w_y = -i (pi/H); for the self term the log w
// part is removed (and its constant log(pi/H) accounted by the caller).
void accumulate_log_term(RealPairData& out, cplx w, double s, double piH,
                         bool self_term) {
  const cplx wx(piH * s, 0.0), wy(0.0, -piH);
  if (self_term) {
    // Only reached with w = 0 (coincident points): log(-expm1(-w)/w) -> 0.
    const cplx pt = psi_tilde(w), ptp = psi_tilde_prime(w);
    out.grad.x() -= 0.5 / pi * std::real(pt * wx);
    out.grad.y() -= 0.5 / pi * std::real(pt * wy);
    out.hess(0, 0) -= 0.5 / pi * std::real(ptp * wx * wx);
    out.hess(0, 1) -= 0.5 / pi * std::real(ptp * wx * wy);
    out.hess(1, 1) -= 0.5 / pi * std::real(ptp * wy * wy);
    return;
  }
  const cplx p = psi_fn(w), pp = psi_prime(w);
  out.value -= 0.5 / pi * std::log(std::abs(-expm1c(-w)));
  out.grad.x() -= 0.5 / pi * std::real(p * wx);
  out.grad.y() -= 0.5 / pi * std::real(p * wy);
  out.hess(0, 0) -= 0.5 / pi * std::real(pp * wx * wx);
  out.hess(0, 1) -= 0.5 / pi * std::real(pp * wx * wy);
  out.hess(1, 1) -= 0.5 / pi * std::real(pp * wy * wy);
}

// Pair data in unswapped coordinates with L >= H assumed by the caller.
RealPairData rect_neumann_pair_raw(double L, double H, const Vec2& X,
                                   const Vec2& X0, bool diag) {
  RealPairData out;
  const double x = X.x(), y = X.y(), x0 = X0.x(), y0 = X0.y();
  const double piH = pi / H;
  // g0 part; at x = x0 the kink convention (indicator = 1, s = +1) matches the
  // image terms so that one-sided and two-sided derivatives agree.
  out.value += ((x * x + x0 * x0) / (2.0 * L) - std::max(x, x0) + L / 3.0) / H;
  out.grad.x() += (x / L - (x >= x0 ? 1.0 : 0.0)) / H;
  out.hess(0, 0) += 1.0 / (L * H);

  const double dmax = 12.5 * H;  // e^{-pi D/H} < 1e-17 beyond this
  for (int fam = 0; fam < 2; ++fam) {
    const double base = fam == 0 ? x - x0 : x + x0;
    const int m_lo = int(std::floor((base - dmax) / (2.0 * L)));
    const int m_hi = int(std::ceil((base + dmax) / (2.0 * L)));
    for (int m = m_lo; m <= m_hi; ++m) {
      const double u = base - 2.0 * m * L;
      const double D = std::abs(u);
      if (D > dmax) continue;
      const double s = u >= 0.0 ? 1.0 : -1.0;
      for (int t = 0; t < 2; ++t) {
        const double Y = t == 0 ? y - y0 : y + y0;
        const cplx w(piH * D, -piH * Y);
        const bool self_term = diag && fam == 0 && m == 0 && t == 0;
        accumulate_log_term(out, w, s, piH, self_term);
      }
    }
  }
  if (diag) out.value -= 0.5 / pi * std::log(piH);
  out.hess(1, 0) = out.hess(0, 1);
  return out;
}

RealPairData rect_neumann_pair(double L, double H, Vec2 X, Vec2 X0, bool diag) {
  if (H <= L) return rect_neumann_pair_raw(L, H, X, X0, diag);
  RealPairData s = rect_neumann_pair_raw(H, L, Vec2(X.y(), X.x()),
                                         Vec2(X0.y(), X0.x()), diag);
  RealPairData out;
  out.value = s.value;
  out.grad = Vec2(s.grad.y(), s.grad.x());
  out.hess << s.hess(1, 1), s.hess(1, 0), s.hess(0, 1), s.hess(0, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Helmholtz function on the rectangle: sum of free-space kernels over the
// reflected image lattice ((-1)^p x0 + 2mL, (-1)^q y0 + 2nH).  Images are kept
// while |K0(z r)| is above 1e-14; the reflection matrix J = diag((-1)^p,
// (-1)^q) carries the source-derivative bookkeeping.

struct HelmPairData {
  cplx value{0.0};
  Vec2c grad_field = Vec2c::Zero();
  Vec2c grad_source = Vec2c::Zero();
  Mat2c hess = Mat2c::Zero();
  Mat2c emix = Mat2c::Zero();  // (k,l) = d/dsrc_k d/dfield_l
};

HelmPairData rect_helm_pair(double L, double H, cplx mu, const Vec2& X,
                            const Vec2& X0, bool diag) {
  const cplx z = std::sqrt(mu);
  const double rez = std::real(z);
  const double r_cut = (34.0 + std::max(0.0, std::log(std::abs(z)))) / rez;
  const double est = (r_cut / L + 1.0) * (r_cut / H + 1.0);
  if (est > 2e6)
    throw std::runtime_error(
        "rectangle Helmholtz image sum: |mu| too small for the requested "
        "domain (image count est. " + std::to_string(est) + ")");

  HelmPairData out;
  const Mat2c idc = Mat2c::Identity();
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      const double sx = p == 0 ? 1.0 : -1.0;
      const double sy = q == 0 ? 1.0 : -1.0;
      const double cx = sx * X0.x(), cy = sy * X0.y();
      const int m_lo = int(std::floor((X.x() - r_cut - cx) / (2.0 * L)));
      const int m_hi = int(std::ceil((X.x() + r_cut - cx) / (2.0 * L)));
      const int n_lo = int(std::floor((X.y() - r_cut - cy) / (2.0 * H)));
      const int n_hi = int(std::ceil((X.y() + r_cut - cy) / (2.0 * H)));
      for (int m = m_lo; m <= m_hi; ++m)
        for (int n = n_lo; n <= n_hi; ++n) {
          if (diag && p == 0 && q == 0 && m == 0 && n == 0) continue;
          const Vec2 img(cx + 2.0 * m * L, cy + 2.0 * n * H);
          const Vec2 dv = X - img;
          const double r = dv.norm();
          if (r > r_cut) continue;
          const cplx zr = z * r;
          const cplx K0 = bessel_k(0, zr), K1 = bessel_k(1, zr);
          const Vec2c dh = (dv / r).cast<cplx>();
          const cplx g = -(z / (2.0 * pi)) * K1;
          const cplx gp = (mu / (2.0 * pi)) * (K0 + K1 / zr);
          out.value += K0 / (2.0 * pi);
          out.grad_field += g * dh;
          const Mat2c dd = dh * dh.transpose();
          out.hess += (mu / (2.0 * pi)) * (K0 * dd + (K1 / zr) * (2.0 * dd - idc));
          if (diag) {
            // Source and field move together; only the reflected part of the
            // image displacement survives in the derivative.
            Mat2 imj = Mat2::Identity() - (Mat2() << sx, 0, 0, sy).finished();
            const Vec2c ijd = (imj * (dv / r)).cast<cplx>();
            out.emix += gp * ijd * dh.transpose() +
                        g * (imj.cast<cplx>() / r - ijd * dh.transpose() / r);
          } else {
            const Mat2 J = (Mat2() << sx, 0, 0, sy).finished();
            const Vec2c jd = (J * (dv / r)).cast<cplx>();
            out.grad_source += -g * jd;
            out.emix += -gp * jd * dh.transpose() +
                        g * (-J.cast<cplx>() / r + jd * dh.transpose() / r);
          }
        }
    }
  if (diag) {
    const cplx logfac = euler_gamma + std::log(z / 2.0);
    out.value += -logfac / (2.0 * pi);
    out.hess += -(mu / (4.0 * pi)) * (logfac - 1.0) * idc;
  }
  return out;
}

}  // namespace

NeumannMatrix rect_neumann_local(double w, double h, const std::vector<Point>& sources) {
  const size_t n = sources.size();
  NeumannMatrix out(n, std::vector<NeumannLocalData>(n));
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i) {
      NeumannLocalData& d = out[j][i];
      d.source = sources[i];
      const Vec2 xj(sources[j].x, sources[j].y), xi(sources[i].x, sources[i].y);
      const RealPairData pd = rect_neumann_pair(w, h, xj, xi, i == j);
      if (i == j)
        d.regular_value = pd.value;
      else
        d.value = pd.value;
      d.gradient = pd.grad;
      d.hessian = pd.hess;
    }
  return out;
}

HelmholtzMatrix rect_helmholtz_local(double w, double h, cplx mu,
                                     const std::vector<Point>& sources) {
  const size_t n = sources.size();
  HelmholtzMatrix out(n, std::vector<HelmholtzLocalData>(n));
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i) {
      HelmholtzLocalData& d = out[j][i];
      d.parameter = mu;
      d.source = sources[i];
      const Vec2 xj(sources[j].x, sources[j].y), xi(sources[i].x, sources[i].y);
      const HelmPairData pd = rect_helm_pair(w, h, mu, xj, xi, i == j);
      if (i == j) {
        d.regular_value = pd.value;
        d.grad_regular = pd.grad_field;
        d.grad_source_of_grad = pd.emix;
        d.hessian = pd.hess;
      } else {
        d.value = pd.value;
        d.grad_source = pd.grad_source;
        d.grad_source_of_grad = pd.emix;
        d.hessian = pd.hess;
      }
    }
  return out;
}

double rect_neumann_value(double w, double h, const Point& x, const Point& x0) {
  return rect_neumann_pair(w, h, Vec2(x.x, x.y), Vec2(x0.x, x0.y), false).value;
}

cplx rect_helmholtz_value(double w, double h, cplx mu, const Point& x,
                          const Point& x0) {
  return rect_helm_pair(w, h, mu, Vec2(x.x, x.y), Vec2(x0.x, x0.y), false).value;
}

}  // namespace spotdyn::detail
