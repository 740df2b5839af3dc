#include <doctest.h>

#include <spotdyn/greens.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace spotdyn;

namespace {

const cplx muI(0.0, 3.02603687);

void close(cplx got, cplx want, double tol) {
  CAPTURE(got);
  CAPTURE(want);
  CHECK(std::abs(got - want) <= tol);
}

DomainSpec grid_rect(double w, double h, double spacing) {
  return DomainSpec::gridded({{0, 0}, {w, 0}, {w, h}, {0, h}}, {}, spacing);
}

// Counter-clockwise polygonal approximation of the half disk; the chord
// sagitta at 256 arc segments is ~2e-5, far below the grid truncation error.
DomainSpec grid_half_disk(double radius, double spacing) {
  std::vector<Point> poly;
  for (int k = 0; k <= 256; ++k) {
    const double th = std::numbers::pi * k / 256;
    poly.push_back({radius * std::cos(th), radius * std::sin(th)});
  }
  return DomainSpec::gridded(poly, {}, spacing);
}

// The analytic backends act as the oracle here: their own tests pin them to
// an independent high-precision reference, so agreement validates the grid.
const double value_tol = 2e-3;
const double hess_tol = 5e-3;

}  // namespace

TEST_CASE("gridded rectangle matches the analytic rectangle backend") {
  const auto gd = grid_rect(2.0, 1.0, 1.0 / 64);
  const auto rd = DomainSpec::rectangle(2.0, 1.0);
  const std::vector<Point> pts{{0.62, 0.41}, {1.43, 0.67}};

  auto gn = neumann_local(gd, pts);
  auto rn = neumann_local(rd, pts);
  close(gn[0][0].regular_value, rn[0][0].regular_value, value_tol);
  close(gn[0][0].gradient(0), rn[0][0].gradient(0), value_tol);
  close(gn[0][0].gradient(1), rn[0][0].gradient(1), value_tol);
  close(gn[0][0].hessian(0, 0), rn[0][0].hessian(0, 0), hess_tol);
  close(gn[0][0].hessian(0, 1), rn[0][0].hessian(0, 1), hess_tol);
  close(gn[0][0].hessian(1, 1), rn[0][0].hessian(1, 1), hess_tol);
  close(gn[0][1].value, rn[0][1].value, value_tol);
  close(gn[0][1].gradient(0), rn[0][1].gradient(0), value_tol);
  close(gn[0][1].gradient(1), rn[0][1].gradient(1), value_tol);
  close(gn[0][1].hessian(0, 0), rn[0][1].hessian(0, 0), hess_tol);
  CHECK(gn[0][1].hessian(0, 1) == gn[0][1].hessian(1, 0));

  auto gh = helmholtz_local(gd, muI, pts);
  auto rh = helmholtz_local(rd, muI, pts);
  close(gh[0][0].regular_value, rh[0][0].regular_value, value_tol);
  close(gh[0][0].grad_regular(0), rh[0][0].grad_regular(0), value_tol);
  close(gh[0][0].grad_regular(1), rh[0][0].grad_regular(1), value_tol);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      close(gh[0][0].hessian(a, b), rh[0][0].hessian(a, b), hess_tol);
      close(gh[0][0].grad_source_of_grad(a, b), rh[0][0].grad_source_of_grad(a, b),
            hess_tol);
      close(gh[0][1].hessian(a, b), rh[0][1].hessian(a, b), hess_tol);
      close(gh[0][1].grad_source_of_grad(a, b), rh[0][1].grad_source_of_grad(a, b),
            hess_tol);
    }
  close(gh[0][1].value, rh[0][1].value, value_tol);
  close(gh[0][1].grad_source(0), rh[0][1].grad_source(0), value_tol);
  close(gh[0][1].grad_source(1), rh[0][1].grad_source(1), value_tol);
  close(gh[1][0].value, rh[1][0].value, value_tol);

  // pointwise probes of both families at five spread-out points
  const Point s{0.62, 0.41};
  const Point probes[5] = {{0.2, 0.2}, {1.7, 0.8}, {1.0, 0.5}, {0.3, 0.77}, {1.2, 0.13}};
  for (const Point& p : probes) {
    close(neumann_value(gd, p, s), neumann_value(rd, p, s), value_tol);
    close(helmholtz_value(gd, muI, p, s), helmholtz_value(rd, muI, p, s), value_tol);
  }
}

TEST_CASE("gridded half disk matches the image-sum backend") {
  const auto gd = grid_half_disk(1.0, 1.0 / 64);
  const auto hd = DomainSpec::half_disk(1.0);
  const std::vector<Point> pts{{-0.25, 0.40}, {0.31, 0.52}};

  auto gn = neumann_local(gd, pts);
  auto hn = neumann_local(hd, pts);
  close(gn[0][0].regular_value, hn[0][0].regular_value, value_tol);
  close(gn[0][0].gradient(0), hn[0][0].gradient(0), value_tol);
  close(gn[0][0].gradient(1), hn[0][0].gradient(1), value_tol);
  close(gn[0][0].hessian(0, 0), hn[0][0].hessian(0, 0), hess_tol);
  close(gn[0][1].value, hn[0][1].value, value_tol);

  auto gh = helmholtz_local(gd, muI, pts);
  auto hh = helmholtz_local(hd, muI, pts);
  close(gh[0][0].regular_value, hh[0][0].regular_value, value_tol);
  close(gh[0][0].grad_regular(0), hh[0][0].grad_regular(0), value_tol);
  close(gh[0][0].hessian(0, 0), hh[0][0].hessian(0, 0), hess_tol);
  close(gh[0][0].grad_source_of_grad(0, 0), hh[0][0].grad_source_of_grad(0, 0), hess_tol);
  close(gh[0][0].grad_source_of_grad(1, 1), hh[0][0].grad_source_of_grad(1, 1), hess_tol);
  close(gh[0][1].value, hh[0][1].value, value_tol);
  close(gh[0][1].grad_source(0), hh[0][1].grad_source(0), value_tol);

  const Point s{-0.25, 0.40};
  const Point probes[5] = {
      {0.5, 0.3}, {-0.3, 0.15}, {0.05, 0.74}, {-0.55, 0.35}, {0.3, 0.12}};
  for (const Point& p : probes) {
    close(neumann_value(gd, p, s), neumann_value(hd, p, s), value_tol);
    close(helmholtz_value(gd, muI, p, s), helmholtz_value(hd, muI, p, s), value_tol);
  }
}

TEST_CASE("gridded Neumann Hessian trace equals 1/area") {
  {
    const auto gd = grid_rect(2.0, 1.0, 1.0 / 64);
    auto M = neumann_local(gd, {{0.62, 0.41}, {1.43, 0.67}});
    CHECK(std::abs(M[0][0].hessian.trace() - 0.5) <= hess_tol);
    CHECK(std::abs(M[1][1].hessian.trace() - 0.5) <= hess_tol);
  }
  {
    const auto gd = grid_half_disk(1.0, 1.0 / 64);
    auto M = neumann_local(gd, {{-0.25, 0.40}});
    CHECK(std::abs(M[0][0].hessian.trace() - 2.0 / std::numbers::pi) <= hess_tol);
  }
  {
    // a hole steepens the remainder; the quadratic-fit bias falls off as h^2
    const auto gd = DomainSpec::gridded({{0, 0}, {2, 0}, {2, 1}, {0, 1}},
                                        {{{1.0, 0.5}, 0.2}}, 1.0 / 128);
    const double area = 2.0 - std::numbers::pi * 0.04;
    CHECK(gd.area() == doctest::Approx(area).epsilon(1e-12));
    auto M = neumann_local(gd, {{0.5, 0.5}, {1.5, 0.35}});
    CHECK(std::abs(M[0][0].hessian.trace() - 1.0 / area) <= hess_tol);
    CHECK(std::abs(M[1][1].hessian.trace() - 1.0 / area) <= hess_tol);
  }
}

TEST_CASE("gridded backend is reciprocal") {
  const auto gd = DomainSpec::gridded({{0, 0}, {2, 0}, {2, 1}, {0, 1}},
                                      {{{1.0, 0.5}, 0.2}}, 1.0 / 64);
  const Point a{0.5, 0.5}, b{1.5, 0.35};
  CHECK(std::abs(neumann_value(gd, a, b) - neumann_value(gd, b, a)) <= value_tol);
  close(helmholtz_value(gd, muI, a, b), helmholtz_value(gd, muI, b, a), value_tol);
  auto M = neumann_local(gd, {a, b});
  CHECK(std::abs(M[0][1].value - M[1][0].value) <= value_tol);
  // the field gradient of (j,i) is the source gradient of (i,j)
  auto H = helmholtz_local(gd, muI, {a, b});
  close(H[0][1].value, H[1][0].value, value_tol);
}

TEST_CASE("gridded argument validation") {
  CHECK_THROWS_AS(DomainSpec::gridded({{0, 0}, {1, 0}}, {}, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(DomainSpec::gridded({{0, 0}, {0, 1}, {1, 1}, {1, 0}}, {}, 0.01),
                  std::invalid_argument);  // clockwise
  CHECK_THROWS_AS(DomainSpec::gridded({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(DomainSpec::gridded({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                                      {{{0.5, 0.5}, 0.05}}, 0.01),
                  std::invalid_argument);  // 5 cells per hole radius: too coarse
  CHECK_THROWS_AS(DomainSpec::gridded({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                                      {{{2.5, 0.5}, 0.2}}, 0.01),
                  std::invalid_argument);  // hole center outside

  const auto gd = grid_rect(1.0, 1.0, 1.0 / 32);
  CHECK_THROWS_AS(neumann_local(gd, {{0.5, 0.1}}), std::invalid_argument);  // < 5h margin
  CHECK_THROWS_AS(neumann_local(gd, {{0.5, 0.5}, {0.55, 0.5}}),
                  std::invalid_argument);  // sources < 5h apart
  CHECK_THROWS_AS(helmholtz_local(gd, cplx(0.0, 0.0), {{0.5, 0.5}}),
                  std::invalid_argument);

  // refusing absurd grids beats exhausting memory
  CHECK_THROWS_AS(neumann_local(grid_rect(2.0, 1.0, 1e-4), {{1.0, 0.5}}),
                  std::runtime_error);
}
