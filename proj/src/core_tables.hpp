#pragma once

#include <vector>

namespace spotdyn::detail {

// Chebyshev interpolants (in log S) of the spot-core far-field data, built
// lazily from Richardson-extrapolated pairs of finite-difference solves.
// Every consumer that evaluates chi(S) or the k-integrals inside an iteration
// should go through these instead of re-running the core boundary-value solve.
// Queries outside [s_lo, s_hi] fall back to a direct solve pair.
class CoreTable {
 public:
  CoreTable(double s_lo, double s_hi, int n_nodes, double r_max, int n_coarse,
            bool with_k);

  double chi(double s) const;
  double chi_prime(double s) const;
  double k1(double s) const;
  double k2(double s) const;

  double s_lo() const { return s_lo_; }
  double s_hi() const { return s_hi_; }

 private:
  double eval(const std::vector<double>& col, double t) const;

  double s_lo_, s_hi_;
  double r_max_;
  int n_coarse_;
  bool with_k_;
  std::vector<double> t_;   // Chebyshev nodes in log S
  std::vector<double> w_;   // barycentric weights
  std::vector<double> chi_, chi_p_, k1_, k2_;
};

// chi/chi' only; cheap grids.
const CoreTable& chi_table();
// chi/chi'/k1/k2 on finer grids (the k2 integral converges slowest).
const CoreTable& k_table();

}  // namespace spotdyn::detail
