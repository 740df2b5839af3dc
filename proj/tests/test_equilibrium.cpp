#include <doctest.h>

#include <spotdyn/core_problem.hpp>
#include <spotdyn/equilibrium.hpp>
#include <spotdyn/greens.hpp>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "../src/core_tables.hpp"

using namespace spotdyn;

namespace {

constexpr double pi = 3.14159265358979323846;

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a);
  REQUIRE(fa * f(b) < 0.0);
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    if (fa * f(m) <= 0.0) {
      b = m;
    } else {
      a = m;
    }
  }
  return 0.5 * (a + b);
}

double mass_defect(const SpotConfiguration& c, const DomainSpec& d,
                   const SchnakenbergParams& p) {
  double total = 0.0;
  for (double s : c.strengths) total += s;
  return std::fabs(2.0 * pi * total - p.feed * d.area());
}

}  // namespace

TEST_CASE("single spot in the unit disk settles at the center") {
  const auto disk = DomainSpec::unit_disk();
  const SchnakenbergParams prm{0.01, 8.0};
  SpotConfiguration init;
  init.locations = {{0.31, -0.22}};
  init.strengths = {1.0};  // deliberately unscaled
  const auto c = solve_equilibrium(disk, prm, init);

  CHECK(c.converged);
  CHECK(c.residual <= 1e-10);
  CHECK(std::hypot(c.locations[0].x, c.locations[0].y) <= 1e-10);
  CHECK(std::fabs(c.strengths[0] - 4.0) <= 1e-12);  // A |Omega| / (2 pi) = A/2
  CHECK(mass_defect(c, disk, prm) <= 1e-10);

  // matching equation with the regular part -3/(8 pi) of the disk's Green's
  // function at the center: nu*ubar = S + nu*(2 pi R0 S + chi(S))
  const double nu = prm.nu();
  const double chi4 = detail::chi_table().chi(4.0);
  const double m = 4.0 + nu * (2.0 * pi * (-3.0 / (8.0 * pi)) * 4.0 + chi4);
  CHECK(std::fabs(nu * c.ubar - m) <= 1e-12);
  CHECK(c.ubar == doctest::Approx(14.1610095570).epsilon(1e-8));
}

TEST_CASE("tabulated core data matches direct extrapolated solves") {
  const auto& tab = detail::chi_table();
  for (double s : {0.77, 2.345, 3.91}) {
    CAPTURE(s);
    const auto coarse = solve_core(s, 30.0, 3751);
    const auto fine = solve_core(s, 30.0, 7501);
    const double chi_ref = (4.0 * fine.chi - coarse.chi) / 3.0;
    const double chip_ref = (4.0 * fine.chi_prime - coarse.chi_prime) / 3.0;
    CHECK(std::fabs(tab.chi(s) - chi_ref) <= 2e-8);
    CHECK(std::fabs(tab.chi_prime(s) - chip_ref) <= 3e-7);
  }
}

TEST_CASE("two spots in a 2-by-1 rectangle sit at the unit-square centers") {
  const auto rect = DomainSpec::rectangle(2.0, 1.0);

  // symmetric pair (1 -+ d, 1/2): the x-force on the right spot vanishes at
  // d* (equal strengths divide out)
  const double dstar = bisect(
      [&](double d) {
        const auto m = neumann_local(rect, {{1.0 - d, 0.5}, {1.0 + d, 0.5}});
        return m[1][1].gradient[0] + m[1][0].gradient[0];
      },
      0.05, 0.9, 1e-12);
  CHECK(std::fabs(dstar - 0.5) <= 1e-9);  // image sums cancel exactly there

  const SchnakenbergParams prm{0.01, 6.0};
  SpotConfiguration init;
  init.locations = {{0.7, 0.42}, {1.35, 0.61}};
  init.strengths = {1.3, 0.8};
  const auto c = solve_equilibrium(rect, prm, init);
  CHECK(c.converged);
  CHECK(std::fabs(c.locations[0].x - (1.0 - dstar)) <= 1e-8);
  CHECK(std::fabs(c.locations[1].x - (1.0 + dstar)) <= 1e-8);
  CHECK(std::fabs(c.locations[0].y - 0.5) <= 1e-8);
  CHECK(std::fabs(c.locations[1].y - 0.5) <= 1e-8);
  CHECK(std::fabs(c.strengths[0] - c.strengths[1]) <= 1e-10);
  CHECK(std::fabs(c.strengths[0] - 6.0 * 2.0 / (4.0 * pi)) <= 1e-10);
  CHECK(mass_defect(c, rect, prm) <= 1e-10);
}

TEST_CASE("five-spot ring radius agrees with the radial force balance") {
  const auto disk = DomainSpec::unit_disk();
  const double rstar = bisect(
      [&](double r) {
        std::vector<Point> pts;
        for (int k = 0; k < 5; ++k) {
          const double th = 2.0 * pi * k / 5;
          pts.push_back({r * std::cos(th), r * std::sin(th)});
        }
        const auto m = neumann_local(disk, pts);
        Eigen::Vector2d f = m[0][0].gradient;
        for (int i = 1; i < 5; ++i) f += m[0][i].gradient;
        return f[0];  // spot 0 lies on the x-axis
      },
      0.2, 0.95, 1e-10);
  CHECK(rstar == doctest::Approx(0.625140562179).epsilon(1e-9));

  const SchnakenbergParams prm{0.01, 30.0};
  const auto c = solve_equilibrium(disk, prm, ring_init(5, 0.45, disk, prm));
  CHECK(c.converged);
  for (int j = 0; j < 5; ++j) {
    CAPTURE(j);
    CHECK(std::fabs(std::hypot(c.locations[j].x, c.locations[j].y) - rstar) <= 1e-6);
    CHECK(std::fabs(c.strengths[j] - 3.0) <= 1e-10);
  }
  CHECK(std::fabs(c.locations[0].y) <= 1e-8);  // the ring does not rotate
  CHECK(mass_defect(c, disk, prm) <= 1e-10);
}

TEST_CASE("equilibria rotate with the initial configuration") {
  const auto disk = DomainSpec::unit_disk();
  const SchnakenbergParams prm{0.01, 12.0};
  const double al = 0.7, ca = std::cos(al), sa = std::sin(al);

  const auto base = solve_equilibrium(disk, prm, ring_init(3, 0.5, disk, prm));
  auto rotated_init = ring_init(3, 0.5, disk, prm);
  for (auto& q : rotated_init.locations) q = {ca * q.x - sa * q.y, sa * q.x + ca * q.y};
  const auto rot = solve_equilibrium(disk, prm, rotated_init);

  CHECK(base.converged);
  CHECK(rot.converged);
  for (int j = 0; j < 3; ++j) {
    CAPTURE(j);
    CHECK(std::fabs(ca * base.locations[j].x - sa * base.locations[j].y -
                    rot.locations[j].x) <= 1e-8);
    CHECK(std::fabs(sa * base.locations[j].x + ca * base.locations[j].y -
                    rot.locations[j].y) <= 1e-8);
    CHECK(std::fabs(base.strengths[j] - rot.strengths[j]) <= 1e-10);
  }
  CHECK(std::fabs(base.ubar - rot.ubar) <= 1e-10);
}

TEST_CASE("scaling the feed rescales strengths but not positions") {
  const auto disk = DomainSpec::unit_disk();
  const SchnakenbergParams prm{0.01, 12.0};
  const SchnakenbergParams scaled{0.01, 1.7 * 12.0};
  const auto a = solve_equilibrium(disk, prm, ring_init(3, 0.5, disk, prm));
  const auto b = solve_equilibrium(disk, scaled, ring_init(3, 0.5, disk, scaled));
  CHECK(a.converged);
  CHECK(b.converged);
  for (int j = 0; j < 3; ++j) {
    CAPTURE(j);
    CHECK(std::fabs(a.locations[j].x - b.locations[j].x) <= 1e-8);
    CHECK(std::fabs(a.locations[j].y - b.locations[j].y) <= 1e-8);
    CHECK(std::fabs(b.strengths[j] - 1.7 * a.strengths[j]) <= 1e-10);
  }
  CHECK(mass_defect(a, disk, prm) <= 1e-10);
  CHECK(mass_defect(b, disk, scaled) <= 1e-10);
}

TEST_CASE("half-disk spot settles on the symmetry axis") {
  const auto hd = DomainSpec::half_disk();
  const SchnakenbergParams prm{0.01, 8.0};
  const auto c = solve_equilibrium(hd, prm, ring_init(1, 0.0, hd, prm));
  CHECK(c.converged);
  CHECK(std::fabs(c.locations[0].x) <= 1e-10);

  const double ystar = bisect(
      [&](double y) { return neumann_local(hd, {{0.0, y}})[0][0].gradient[1]; }, 0.2,
      0.8, 1e-10);
  CHECK(std::fabs(c.locations[0].y - ystar) <= 1e-8);
  CHECK(ystar == doctest::Approx(0.453631455579).epsilon(1e-7));
}

TEST_CASE("ring and line builders follow the stated conventions") {
  const auto disk = DomainSpec::unit_disk();
  const SchnakenbergParams prm{0.01, 8.0};

  const auto ring = ring_init(4, 0.5, disk, prm);
  const double want[4][2] = {{0.5, 0.0}, {0.0, 0.5}, {-0.5, 0.0}, {0.0, -0.5}};
  for (int k = 0; k < 4; ++k) {
    CAPTURE(k);
    CHECK(std::fabs(ring.locations[k].x - want[k][0]) <= 1e-14);
    CHECK(std::fabs(ring.locations[k].y - want[k][1]) <= 1e-14);
    CHECK(std::fabs(ring.strengths[k] - 8.0 * pi / (8.0 * pi)) <= 1e-14);
  }

  const auto rect = DomainSpec::rectangle(5.0, 1.0);
  const auto line = line_init(3, rect, prm);
  for (int k = 0; k < 3; ++k) {
    CAPTURE(k);
    CHECK(std::fabs(line.locations[k].x - (k + 0.5) * 5.0 / 3.0) <= 1e-14);
    CHECK(std::fabs(line.locations[k].y - 0.5) <= 1e-14);
    CHECK(std::fabs(line.strengths[k] - 8.0 * 5.0 / (6.0 * pi)) <= 1e-12);
  }

  // centered single-spot starts
  const auto hd = ring_init(1, 0.0, DomainSpec::half_disk(), prm);
  CHECK(std::fabs(hd.locations[0].x) <= 1e-14);
  CHECK(std::fabs(hd.locations[0].y - 4.0 / (3.0 * pi)) <= 1e-14);

  const auto holed = DomainSpec::gridded(
      {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}, {{{0.3, 0.5}, 0.1}}, 1.0 / 128);
  const auto g = ring_init(1, 0.0, holed, prm);
  const double ha = pi * 0.01;
  CHECK(std::fabs(g.locations[0].x - (0.5 - 0.3 * ha) / (1.0 - ha)) <= 1e-12);
  CHECK(std::fabs(g.locations[0].y - 0.5) <= 1e-12);
}

TEST_CASE("perturbed-disk equilibrium is the centered spot") {
  const auto dom = DomainSpec::perturbed_disk(0.1, {0.0, 0.1}, {});
  const SchnakenbergParams prm{0.01, 8.0};
  const auto c = solve_equilibrium(dom, prm, ring_init(1, 0.0, dom, prm));
  CHECK(c.converged);
  CHECK(c.residual <= 1e-10);
  CHECK(c.locations[0].x == 0.0);
  CHECK(c.locations[0].y == 0.0);
  CHECK(std::fabs(c.strengths[0] - prm.feed * dom.area() / (2.0 * pi)) <= 1e-12);
}

TEST_CASE("equilibrium argument validation") {
  const auto disk = DomainSpec::unit_disk();
  const SchnakenbergParams good{0.01, 8.0};
  SpotConfiguration one;
  one.locations = {{0.2, 0.1}};
  one.strengths = {1.0};

  CHECK_THROWS_AS(solve_equilibrium(disk, {0.25, 8.0}, one), std::invalid_argument);
  CHECK_THROWS_AS(solve_equilibrium(disk, {0.0, 8.0}, one), std::invalid_argument);
  CHECK_THROWS_AS(solve_equilibrium(disk, {0.01, -1.0}, one), std::invalid_argument);

  SpotConfiguration mismatched;
  mismatched.locations = {{0.2, 0.1}, {-0.3, 0.0}};
  mismatched.strengths = {1.0};
  CHECK_THROWS_AS(solve_equilibrium(disk, good, mismatched), std::invalid_argument);

  SpotConfiguration colliding;
  colliding.locations = {{0.20, 0.10}, {0.22, 0.10}};  // 0.02 < 10 eps = 0.1
  colliding.strengths = {1.0, 1.0};
  CHECK_THROWS_AS(solve_equilibrium(disk, good, colliding), std::runtime_error);

  CHECK_THROWS_AS(ring_init(0, 0.5, disk, good), std::invalid_argument);
  CHECK_THROWS_AS(ring_init(3, 0.0, disk, good), std::invalid_argument);
  CHECK_THROWS_AS(ring_init(2, -0.1, disk, good), std::invalid_argument);
  CHECK_THROWS_AS(line_init(2, disk, good), std::invalid_argument);
  CHECK_THROWS_AS(ring_init(2, 0.5, disk, {0.5, 8.0}), std::invalid_argument);

  SpotConfiguration off_origin;
  off_origin.locations = {{0.1, 0.0}};
  off_origin.strengths = {1.0};
  const auto pert = DomainSpec::perturbed_disk(0.1, {0.0, 0.1}, {});
  CHECK_THROWS_AS(solve_equilibrium(pert, good, off_origin), std::invalid_argument);
}
