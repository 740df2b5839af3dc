#pragma once

#include <vector>

namespace spotdyn {

// Radially symmetric spot core on [0, r_max]:
//   v'' + v'/rho - v + u v^2 = 0
//   u'' + u'/rho - u v^2   = 0
// with v'(0) = u'(0) = 0, v(r_max) = 0, and the flux condition
// u'(r_max) = S / r_max.  The far field behaves like u ~ S log(rho) + chi(S).
struct CoreSolution {
  double strength = 0.0;  // S
  double r_max = 0.0;
  std::vector<double> grid;  // uniform, grid.front() == 0, grid.back() == r_max
  std::vector<double> v0;
  std::vector<double> u0;
  double chi = 0.0;
  std::vector<double> dv0_dS;
  std::vector<double> du0_dS;
  double chi_prime = 0.0;
};

// Mode-1 adjoint of the linearized core operator, normalized so that
// rho * p2 -> 1 in the far field; p1(0) = p2(0) = 0.
struct AdjointSolution {
  double strength = 0.0;
  std::vector<double> grid;
  std::vector<double> p1;
  std::vector<double> p2;
};

struct CoreIntegrals {
  double k1 = 0.0;  // int_0^inf v0' p1 rho drho   (negative for S in [1, 4.3])
  double k2 = 0.0;  // int_0^inf (u0 - chi) (rho p2)' drho
  double strength = 0.0;
};

// Spots with S beyond this bound self-replicate; the core solve refuses them.
inline constexpr double core_strength_max = 4.3;

enum class QuadRule { simpson, trapezoid };

// Damped Newton on a second-order finite-difference grid; continuation from
// S = 1 if the cold start stalls.  Throws std::domain_error on bad arguments,
// std::runtime_error if Newton fails to reach a 1e-10 residual.
CoreSolution solve_core(double strength, double r_max = 30.0, int n_points = 60001);

AdjointSolution solve_adjoint(const CoreSolution& core);
AdjointSolution solve_adjoint(double strength, double r_max = 30.0, int n_points = 60001);

CoreIntegrals compute_k_integrals(const CoreSolution& core, const AdjointSolution& adj,
                                  QuadRule rule = QuadRule::simpson);

}  // namespace spotdyn
