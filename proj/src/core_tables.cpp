#include "core_tables.hpp"

#include <cmath>
#include <stdexcept>

#include "spotdyn/core_problem.hpp"

namespace spotdyn::detail {

namespace {

struct NodeData {
  double chi = 0.0, chi_p = 0.0, k1 = 0.0, k2 = 0.0;
};

// Richardson pair: the core discretization is second order in the grid
// spacing, so two solves with h and h/2 combine to (4 fine - coarse) / 3.
// The spacings here sit in the window where that rate is clean; much finer
// grids let the adjoint solve (whose continuum operator is exactly singular)
// amplify roundoff, especially for S below 1.
NodeData node_data(double s, double r_max, int n_coarse, bool with_k) {
  const auto coarse = solve_core(s, r_max, n_coarse);
  const auto fine = solve_core(s, r_max, 2 * n_coarse - 1);
  NodeData d;
  d.chi = (4.0 * fine.chi - coarse.chi) / 3.0;
  d.chi_p = (4.0 * fine.chi_prime - coarse.chi_prime) / 3.0;
  if (with_k) {
    const auto ic = compute_k_integrals(coarse, solve_adjoint(coarse));
    const auto fi = compute_k_integrals(fine, solve_adjoint(fine));
    d.k1 = (4.0 * fi.k1 - ic.k1) / 3.0;
    d.k2 = (4.0 * fi.k2 - ic.k2) / 3.0;
  }
  return d;
}

}  // namespace

CoreTable::CoreTable(double s_lo, double s_hi, int n_nodes, double r_max, int n_coarse,
                     bool with_k)
    : s_lo_(s_lo), s_hi_(s_hi), r_max_(r_max), n_coarse_(n_coarse), with_k_(with_k) {
  if (!(0.0 < s_lo && s_lo < s_hi) || n_nodes < 2) {
    throw std::domain_error("CoreTable: bad range or node count");
  }
  const double a = std::log(s_lo), b = std::log(s_hi);
  t_.resize(n_nodes);
  w_.resize(n_nodes);
  chi_.resize(n_nodes);
  chi_p_.resize(n_nodes);
  if (with_k) {
    k1_.resize(n_nodes);
    k2_.resize(n_nodes);
  }
  for (int k = 0; k < n_nodes; ++k) {
    // Chebyshev points of the second kind, mapped to [a, b] in log S.
    const double c = std::cos(M_PI * k / (n_nodes - 1));
    t_[k] = 0.5 * (a + b) + 0.5 * (b - a) * c;
    w_[k] = (k % 2 == 0 ? 1.0 : -1.0);
    if (k == 0 || k == n_nodes - 1) w_[k] *= 0.5;
    const NodeData d = node_data(std::exp(t_[k]), r_max, n_coarse, with_k);
    chi_[k] = d.chi;
    chi_p_[k] = d.chi_p;
    if (with_k) {
      k1_[k] = d.k1;
      k2_[k] = d.k2;
    }
  }
}

double CoreTable::eval(const std::vector<double>& col, double t) const {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < t_.size(); ++k) {
    const double d = t - t_[k];
    if (d == 0.0) return col[k];
    const double q = w_[k] / d;
    num += q * col[k];
    den += q;
  }
  return num / den;
}

double CoreTable::chi(double s) const {
  if (s < s_lo_ || s > s_hi_) return node_data(s, r_max_, n_coarse_, false).chi;
  return eval(chi_, std::log(s));
}

double CoreTable::chi_prime(double s) const {
  if (s < s_lo_ || s > s_hi_) return node_data(s, r_max_, n_coarse_, false).chi_p;
  return eval(chi_p_, std::log(s));
}

double CoreTable::k1(double s) const {
  if (!with_k_) throw std::logic_error("CoreTable: built without k integrals");
  if (s < s_lo_ || s > s_hi_) return node_data(s, r_max_, n_coarse_, true).k1;
  return eval(k1_, std::log(s));
}

double CoreTable::k2(double s) const {
  if (!with_k_) throw std::logic_error("CoreTable: built without k integrals");
  if (s < s_lo_ || s > s_hi_) return node_data(s, r_max_, n_coarse_, true).k2;
  return eval(k2_, std::log(s));
}

const CoreTable& chi_table() {
  static const CoreTable table(0.2, 4.295, 28, 30.0, 3751, false);
  return table;
}

const CoreTable& k_table() {
  static const CoreTable table(0.2, 4.295, 30, 20.0, 10001, true);
  return table;
}

}  // namespace spotdyn::detail
