#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "spotdyn/bessel.hpp"

using spotdyn::cplx;

namespace {

// Independent oracle: straight power series in long double, accurate for
// |z| <= ~4.  Deliberately written differently from the library (explicit
// factorials, no recurrences).
std::complex<long double> oracle_i(int n, std::complex<long double> z) {
  std::complex<long double> sum = 0.0L;
  long double nfact = 1.0L;
  for (int j = 2; j <= n; ++j) nfact *= j;
  std::complex<long double> term = std::pow(z / 2.0L, n) / nfact;
  for (int k = 0; k < 60; ++k) {
    sum += term;
    term *= (z * z / 4.0L) / static_cast<long double>((k + 1) * (k + 1 + n));
  }
  return sum;
}

std::complex<long double> oracle_k0(std::complex<long double> z) {
  const long double g = 0.5772156649015328606L;
  std::complex<long double> q = z * z / 4.0L;
  std::complex<long double> term = 1.0L, i0 = 0.0L, s = 0.0L;
  long double h = 0.0L;
  for (int k = 0; k < 60; ++k) {
    i0 += term;
    s += term * h;
    h += 1.0L / (k + 1);
    term *= q / static_cast<long double>((k + 1) * (k + 1));
  }
  return -(std::log(z / 2.0L) + g) * i0 + s;
}

cplx cl(std::complex<long double> z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

}  // namespace

TEST_CASE("frozen reference values at z = 1") {
  CHECK(std::abs(spotdyn::bessel_i(0, {1.0, 0.0}) - cplx(1.26606587775201, 0.0)) < 1e-11);
  CHECK(std::abs(spotdyn::bessel_k(0, {1.0, 0.0}) - cplx(0.42102443824071, 0.0)) < 1e-10);
}

TEST_CASE("series oracle at small complex arguments") {
  const std::vector<std::complex<long double>> pts = {
      {1.0L, 0.0L},
      {0.3L, 0.2L},
      std::polar(2.0L, 0.78539816339744830962L),  // 2 e^{i pi/4}
      {2.5L, 1.0L},
  };
  for (auto zl : pts) {
    cplx z = cl(zl);
    for (int n = 0; n <= 6; ++n) {
      cplx want = cl(oracle_i(n, zl));
      CHECK(std::abs(spotdyn::bessel_i(n, z) - want) <= 1e-11 * std::max(1.0, std::abs(want)));
    }
    cplx want_k0 = cl(oracle_k0(zl));
    CHECK(std::abs(spotdyn::bessel_k(0, z) - want_k0) <= 1e-11 * std::max(1.0, std::abs(want_k0)));
  }
}

TEST_CASE("leading order small-argument behavior") {
  // I_n(z) ~ (z/2)^n / n!
  cplx v = spotdyn::bessel_i(2, {1e-8, 0.0});
  CHECK(std::abs(v - cplx(1.25e-17, 0.0)) < 1e-22);
  // K_0(z) + log(z/2) + gamma -> 0
  cplx r = spotdyn::bessel_k(0, {1e-4, 0.0}) + std::log(cplx(1e-4, 0.0) / 2.0) +
           cplx(0.57721566490153286, 0.0);
  CHECK(std::abs(r) < 1e-7);
}

TEST_CASE("Wronskian identity I_n K_n' - I_n' K_n = -1/z on sector grid") {
  const double pi = 3.14159265358979323846;
  for (int a = 0; a < 20; ++a) {
    double mod = 0.1 * std::pow(500.0, a / 19.0);  // log spacing 0.1 .. 50
    for (int b = 0; b < 20; ++b) {
      double ph = -(pi / 2 - 0.05) + (pi - 0.1) * b / 19.0;
      cplx z = std::polar(mod, ph);
      for (int n = 0; n <= 10; ++n) {
        auto p = spotdyn::bessel_pair(n, z);
        cplx w = p.i_val * p.k_deriv - p.i_deriv * p.k_val;
        CHECK(std::abs(w + 1.0 / z) <= 1e-12 * std::abs(1.0 / z));
      }
    }
  }
}

TEST_CASE("conjugation symmetry") {
  const std::vector<cplx> pts = {{0.5, 0.4}, {3.0, 3.0}, {1.0, 12.0}, {20.0, 17.0}};
  for (cplx z : pts) {
    for (int n : {0, 1, 3, 8}) {
      cplx i1 = spotdyn::bessel_i(n, z), i2 = spotdyn::bessel_i(n, std::conj(z));
      cplx k1 = spotdyn::bessel_k(n, z), k2 = spotdyn::bessel_k(n, std::conj(z));
      CHECK(std::abs(i2 - std::conj(i1)) <= 1e-13 * std::abs(i1));
      CHECK(std::abs(k2 - std::conj(k1)) <= 1e-13 * std::abs(k1));
    }
  }
}

TEST_CASE("three-term recurrences and derivative relations") {
  const std::vector<cplx> pts = {std::polar(4.0, 0.7853981633974483),
                                 std::polar(11.0, 0.7853981633974483),
                                 {6.0, 2.0}};
  for (cplx z : pts) {
    auto iv = spotdyn::bessel_i_array(9, z);
    auto kv = spotdyn::bessel_k_array(9, z);
    for (int n = 1; n <= 8; ++n) {
      cplx ri = iv[n - 1] - (2.0 * n / z) * iv[n];
      CHECK(std::abs(ri - iv[n + 1]) <= 1e-10 * std::max(std::abs(iv[n + 1]), std::abs(iv[n - 1])));
      cplx rk = kv[n - 1] + (2.0 * n / z) * kv[n];
      CHECK(std::abs(rk - kv[n + 1]) <= 1e-10 * std::abs(kv[n + 1]));
      auto p = spotdyn::bessel_pair(n, z);
      CHECK(std::abs(p.i_deriv - 0.5 * (iv[n - 1] + iv[n + 1])) <= 1e-12 * std::abs(p.i_deriv));
      CHECK(std::abs(p.k_deriv + 0.5 * (kv[n - 1] + kv[n + 1])) <= 1e-12 * std::abs(p.k_deriv));
    }
  }
}

TEST_CASE("domain guards") {
  CHECK_THROWS_AS(spotdyn::bessel_i(0, {0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(spotdyn::bessel_k(1, {-2.0, 0.1}), std::domain_error);
  CHECK_THROWS_AS(spotdyn::bessel_i(0, {800.0, 0.0}), std::overflow_error);
}
