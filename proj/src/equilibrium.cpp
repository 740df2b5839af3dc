#include "spotdyn/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "core_tables.hpp"
#include "spotdyn/core_problem.hpp"

namespace spotdyn {

namespace {

void check_params(const SchnakenbergParams& p) {
  if (!(p.epsilon > 0.0 && p.epsilon < 0.2)) {
    throw std::invalid_argument("epsilon must lie in (0, 0.2)");
  }
  if (!(p.feed > 0.0)) {
    throw std::invalid_argument("feed must be positive");
  }
}

Point domain_centroid(const DomainSpec& d) {
  switch (d.kind) {
    case DomainKind::unit_disk:
    case DomainKind::perturbed_disk:
      return {0.0, 0.0};
    case DomainKind::rectangle:
      return {0.5 * d.width, 0.5 * d.height};
    case DomainKind::half_disk:
      return {0.0, 4.0 * d.radius / (3.0 * M_PI)};
    case DomainKind::gridded: {
      // shoelace centroid of the outer polygon, holes subtracted
      double area2 = 0.0, cx = 0.0, cy = 0.0;
      const auto& p = d.polygon;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const Point& a = p[i];
        const Point& b = p[(i + 1) % p.size()];
        const double w = a.x * b.y - b.x * a.y;
        area2 += w;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
      }
      double area = 0.5 * area2;
      cx /= 6.0;
      cy /= 6.0;
      for (const auto& h : d.holes) {
        const double ha = M_PI * h.radius * h.radius;
        area -= ha;
        cx -= ha * h.center.x;
        cy -= ha * h.center.y;
      }
      return {cx / area, cy / area};
    }
  }
  throw std::invalid_argument("unknown domain kind");
}

double min_separation(const std::vector<Point>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    for (std::size_t i = j + 1; i < pts.size(); ++i) {
      best = std::min(best, std::hypot(pts[j].x - pts[i].x, pts[j].y - pts[i].y));
    }
  }
  return best;
}

struct SystemEval {
  Eigen::VectorXd f;      // N-1 matching differences, mass row, 2N force rows
  Eigen::VectorXd match;  // m_j = S_j + nu (2 pi (G s)_j + chi(S_j))
};

// Residual of the reduced system in u = [S_1..S_N, x_1, y_1, .., x_N, y_N].
// ubar is eliminated: the N matching equations m_j = nu ubar survive as the
// N-1 differences m_j - m_N plus the (linear) total-mass row.
class EquilibriumSystem {
 public:
  EquilibriumSystem(const DomainSpec& dom, double nu, double mass, int n)
      : dom_(dom), nu_(nu), mass_(mass), n_(n) {}

  SystemEval operator()(const Eigen::VectorXd& u) const {
    std::vector<Point> pts(n_);
    for (int j = 0; j < n_; ++j) {
      const double s = u[j];
      if (!(s > 0.0 && s < core_strength_max)) {
        throw std::invalid_argument("spot strength out of range");
      }
      pts[j] = {u[n_ + 2 * j], u[n_ + 2 * j + 1]};
    }
    if (n_ > 1 && min_separation(pts) < 1e-12) {
      throw std::invalid_argument("coincident spots");
    }
    const NeumannMatrix g = neumann_local(dom_, pts);
    const auto& tab = detail::chi_table();

    SystemEval ev;
    ev.f.resize(3 * n_);
    ev.match.resize(n_);
    double total = 0.0;
    for (int j = 0; j < n_; ++j) {
      double gs = g[j][j].regular_value * u[j];
      Eigen::Vector2d force = u[j] * g[j][j].gradient;
      for (int i = 0; i < n_; ++i) {
        if (i == j) continue;
        gs += g[j][i].value * u[i];
        force += u[i] * g[j][i].gradient;
      }
      ev.match[j] = u[j] + nu_ * (2.0 * M_PI * gs + tab.chi(u[j]));
      ev.f[n_ + 2 * j] = force[0];
      ev.f[n_ + 2 * j + 1] = force[1];
      total += u[j];
    }
    for (int j = 0; j + 1 < n_; ++j) ev.f[j] = ev.match[j] - ev.match[n_ - 1];
    ev.f[n_ - 1] = 2.0 * M_PI * total - mass_;
    return ev;
  }

 private:
  const DomainSpec& dom_;
  double nu_, mass_;
  int n_;
};

SpotConfiguration package(const Eigen::VectorXd& u, const SystemEval& ev, double nu,
                          double mass, int n) {
  SpotConfiguration out;
  out.locations.resize(n);
  out.strengths.resize(n);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    out.strengths[j] = u[j];
    out.locations[j] = {u[n + 2 * j], u[n + 2 * j + 1]};
    total += u[j];
  }
  const double mean = ev.match.mean();
  out.ubar = mean / nu;
  // max-norm residual of the full system with ubar put back in
  double res = std::abs(2.0 * M_PI * total - mass);
  for (int j = 0; j < n; ++j) {
    res = std::max(res, std::abs(ev.match[j] - mean));
    res = std::max(res, std::abs(ev.f[n + 2 * j]));
    res = std::max(res, std::abs(ev.f[n + 2 * j + 1]));
  }
  out.residual = res;
  out.converged = res <= 1e-10;
  return out;
}

}  // namespace

double SchnakenbergParams::nu() const { return -1.0 / std::log(epsilon); }

SpotConfiguration ring_init(int n, double radius, const DomainSpec& domain,
                            const SchnakenbergParams& params) {
  check_params(params);
  if (n < 1) throw std::invalid_argument("need at least one spot");
  if (!(radius >= 0.0)) throw std::invalid_argument("ring radius must be nonnegative");
  if (n > 1 && radius == 0.0) {
    throw std::invalid_argument("ring radius must be positive for several spots");
  }
  const Point c = domain_centroid(domain);
  const double s = params.feed * domain.area() / (2.0 * M_PI * n);
  SpotConfiguration out;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * M_PI * k / n;
    out.locations.push_back({c.x + radius * std::cos(th), c.y + radius * std::sin(th)});
    out.strengths.push_back(s);
  }
  return out;
}

SpotConfiguration line_init(int n, const DomainSpec& domain,
                            const SchnakenbergParams& params) {
  check_params(params);
  if (n < 1) throw std::invalid_argument("need at least one spot");
  if (domain.kind != DomainKind::rectangle) {
    throw std::invalid_argument("line_init expects a rectangle domain");
  }
  const double s = params.feed * domain.area() / (2.0 * M_PI * n);
  SpotConfiguration out;
  for (int k = 1; k <= n; ++k) {
    out.locations.push_back({(k - 0.5) * domain.width / n, 0.5 * domain.height});
    out.strengths.push_back(s);
  }
  return out;
}

SpotConfiguration solve_equilibrium(const DomainSpec& domain,
                                    const SchnakenbergParams& params,
                                    const SpotConfiguration& init) {
  check_params(params);
  const int n = static_cast<int>(init.locations.size());
  if (n < 1 || init.strengths.size() != init.locations.size()) {
    throw std::invalid_argument("init must carry one strength per location");
  }
  const double nu = params.nu();
  const double mass = params.feed * domain.area();
  const EquilibriumSystem sys(domain, nu, mass, n);

  if (domain.kind == DomainKind::perturbed_disk) {
    // local data exists only for a centered source, which is an equilibrium
    // by symmetry; nothing to iterate.
    if (n != 1 || std::hypot(init.locations[0].x, init.locations[0].y) > 1e-9) {
      throw std::invalid_argument("perturbed-disk equilibria are a single centered spot");
    }
    Eigen::VectorXd u(3);
    u << mass / (2.0 * M_PI), 0.0, 0.0;
    return package(u, sys(u), nu, mass, 1);
  }

  if (n > 1 && min_separation(init.locations) < 10.0 * params.epsilon) {
    throw std::runtime_error("spots closer than 10*epsilon at the initial guess");
  }

  Eigen::VectorXd u(3 * n);
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += init.strengths[j];
  if (!(total > 0.0)) throw std::invalid_argument("strengths must be positive");
  for (int j = 0; j < n; ++j) {
    u[j] = init.strengths[j] * mass / (2.0 * M_PI * total);
    u[n + 2 * j] = init.locations[j].x;
    u[n + 2 * j + 1] = init.locations[j].y;
  }

  SystemEval ev = sys(u);
  double fnorm = ev.f.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd best_u = u;
  SystemEval best_ev = ev;
  double best_norm = fnorm;

  const int max_iter = 60;
  for (int it = 0; it < max_iter && fnorm > 1e-12; ++it) {
    // Centered differences with one shared step keep the Jacobian (hence the
    // whole iteration) equivariant under rotations of the configuration.
    const double delta = 1e-6 * std::max(1.0, u.norm() / std::sqrt(3.0 * n));
    Eigen::MatrixXd jac(3 * n, 3 * n);
    try {
      Eigen::VectorXd up = u, um = u;
      for (int k = 0; k < 3 * n; ++k) {
        up[k] += delta;
        um[k] -= delta;
        jac.col(k) = (sys(up).f - sys(um).f) / (2.0 * delta);
        up[k] = u[k];
        um[k] = u[k];
      }
    } catch (const std::exception&) {
      break;  // a spot sits within delta of an inadmissible state
    }

    // Minimum-norm least-squares step: rings in symmetric domains make the
    // Jacobian rank-deficient along the rotation mode, which the step must
    // not excite.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-7);
    cod.compute(jac);
    const Eigen::VectorXd du = cod.solve(-ev.f);

    double lambda = 1.0;
    bool accepted = false;
    Eigen::VectorXd u_try;
    SystemEval ev_try;
    double fn_try = 0.0;
    for (int halving = 0; halving <= 8; ++halving) {
      u_try = u + lambda * du;
      bool ok = true;
      try {
        ev_try = sys(u_try);
        fn_try = ev_try.f.lpNorm<Eigen::Infinity>();
      } catch (const std::exception&) {
        ok = false;
      }
      if (ok && fn_try < fnorm) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    u = u_try;
    ev = ev_try;
    fnorm = fn_try;

    // the mass row is linear, so it stays at zero; renormalize only if
    // rounding has let it drift
    const double factor = mass / (2.0 * M_PI * u.head(n).sum());
    if (std::abs(factor - 1.0) > 1e-14) {
      u.head(n) *= factor;
      ev = sys(u);
      fnorm = ev.f.lpNorm<Eigen::Infinity>();
    }

    if (n > 1) {
      std::vector<Point> pts(n);
      for (int j = 0; j < n; ++j) pts[j] = {u[n + 2 * j], u[n + 2 * j + 1]};
      if (min_separation(pts) < 10.0 * params.epsilon) {
        throw std::runtime_error("spots collided (separation below 10*epsilon)");
      }
    }
    if (fnorm < best_norm) {
      best_u = u;
      best_ev = ev;
      best_norm = fnorm;
    }
  }

  return package(best_u, best_ev, nu, mass, n);
}

}  // namespace spotdyn
