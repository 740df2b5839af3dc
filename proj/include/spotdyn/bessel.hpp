#pragma once

#include <complex>
#include <vector>

namespace spotdyn {

using cplx = std::complex<double>;

// Modified Bessel functions I_n, K_n of nonnegative integer order at complex
// argument, restricted to the sector |arg z| < pi/2.  Every argument that
// arises in this code has the form sqrt(i*w)*r with w, r > 0, i.e. phase pi/4,
// but the implementation is good throughout the (open) right half plane.
//
// Accuracy: relative error ~1e-13 for |z| <= 60, orders <= ~120.  Arguments
// with Re z > overflow_cap() raise std::overflow_error (e^z overflows first).

cplx bessel_i(int n, cplx z);
cplx bessel_k(int n, cplx z);
cplx bessel_i_prime(int n, cplx z);
cplx bessel_k_prime(int n, cplx z);

// Orders 0..n_max in one pass; much cheaper than repeated single calls when a
// series over orders is being summed.
std::vector<cplx> bessel_i_array(int n_max, cplx z);
std::vector<cplx> bessel_k_array(int n_max, cplx z);

double bessel_overflow_cap();

struct BesselPair {
  int order = 0;
  cplx argument;
  cplx i_val, k_val, i_deriv, k_deriv;
};

BesselPair bessel_pair(int n, cplx z);

}  // namespace spotdyn
