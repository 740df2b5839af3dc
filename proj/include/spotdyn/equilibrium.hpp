#pragma once

#include <vector>

#include "spotdyn/greens.hpp"

namespace spotdyn {

// Scaled parameters of the activator-substrate system
//   v_t = eps^2 Lap v - v + u v^2,   tau u_t = Lap u + A - u v^2 / eps^2.
// The logarithmic gauge nu = -1/log(eps) drives the slow coupling between
// spots; the asymptotics require 0 < eps < 0.2 so that nu stays positive.
struct SchnakenbergParams {
  double epsilon = 0.01;
  double feed = 0.0;  // A
  double nu() const;
};

// An N-spot steady state: centers x_j, source strengths S_j, the common
// far-field constant ubar of the substrate, and the max-norm residual of the
// full algebraic system (strength matching, total-mass constraint, and the
// force balance at every spot).
struct SpotConfiguration {
  std::vector<Point> locations;
  std::vector<double> strengths;
  double ubar = 0.0;
  double residual = 0.0;
  bool converged = false;
};

// Equally spaced points on a circle of the given radius about the domain's
// centroid, angles 2 pi k / n measured from the positive x-axis.  Strengths
// are set to the common value A |Omega| / (2 pi n) fixed by the total-mass
// constraint.  radius must be positive unless n == 1.
SpotConfiguration ring_init(int n, double radius, const DomainSpec& domain,
                            const SchnakenbergParams& params);

// n points on the horizontal midline of a rectangle, x = (k - 1/2) width / n
// for k = 1..n; strengths as in ring_init.  Rectangle domains only.
SpotConfiguration line_init(int n, const DomainSpec& domain,
                            const SchnakenbergParams& params);

// Damped Newton iteration for an N-spot equilibrium, starting from init.
// Unknowns are the strengths and positions; ubar is eliminated against the
// strength-matching equations and recovered afterwards.  The total-mass
// constraint 2 pi sum S_j = A |Omega| is linear in the unknowns and holds to
// rounding at every iterate.  On divergence the best iterate is returned with
// converged = false; converged means residual <= 1e-10.  Throws
// std::invalid_argument for bad parameters or an ill-formed init, and
// std::runtime_error if two spots approach within 10 eps of each other.
SpotConfiguration solve_equilibrium(const DomainSpec& domain,
                                    const SchnakenbergParams& params,
                                    const SpotConfiguration& init);

}  // namespace spotdyn
