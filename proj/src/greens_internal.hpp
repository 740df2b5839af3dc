#pragma once

// Backend entry points for the Green's function dispatcher.  All arguments
// arrive validated (sources interior, distinct, mu admissible); backends only
// check conditions specific to themselves (series convergence, grid margins).

#include "spotdyn/greens.hpp"

namespace spotdyn::detail {

// Unit disk (closed-form Neumann, boundary-corrected Bessel series Helmholtz).
NeumannMatrix disk_neumann_local(const std::vector<Point>& sources);
HelmholtzMatrix disk_helmholtz_local(cplx mu, const std::vector<Point>& sources);
double disk_neumann_value(const Point& x, const Point& x0);
cplx disk_helmholtz_value(cplx mu, const Point& x, const Point& x0);

// Half disk of given radius: image sum of two disk evaluations.
NeumannMatrix half_disk_neumann_local(double radius, const std::vector<Point>& sources);
HelmholtzMatrix half_disk_helmholtz_local(double radius, cplx mu,
                                          const std::vector<Point>& sources);
double half_disk_neumann_value(double radius, const Point& x, const Point& x0);
cplx half_disk_helmholtz_value(double radius, cplx mu, const Point& x, const Point& x0);

// Perturbed disk, single source at the origin, correct to O(sigma).
NeumannMatrix perturbed_disk_neumann_local(const DomainSpec& dom);
HelmholtzMatrix perturbed_disk_helmholtz_local(const DomainSpec& dom, cplx mu);
double perturbed_disk_neumann_value(const DomainSpec& dom, const Point& x);

// Rectangle [0,w] x [0,h].
NeumannMatrix rect_neumann_local(double w, double h, const std::vector<Point>& sources);
HelmholtzMatrix rect_helmholtz_local(double w, double h, cplx mu,
                                     const std::vector<Point>& sources);
double rect_neumann_value(double w, double h, const Point& x, const Point& x0);
cplx rect_helmholtz_value(double w, double h, cplx mu, const Point& x, const Point& x0);

// Gridded polygon-with-holes backend.
NeumannMatrix gridded_neumann_local(const DomainSpec& dom, const std::vector<Point>& sources);
HelmholtzMatrix gridded_helmholtz_local(const DomainSpec& dom, cplx mu,
                                        const std::vector<Point>& sources);
double gridded_neumann_value(const DomainSpec& dom, const Point& x, const Point& x0);
cplx gridded_helmholtz_value(const DomainSpec& dom, cplx mu, const Point& x, const Point& x0);

// Shared geometry helpers (used by validation and by the gridded backend).
double polygon_area(const std::vector<Point>& poly);
bool point_in_polygon(const std::vector<Point>& poly, const Point& p);
// Signed distance to the domain boundary, positive inside ("how interior").
double interior_distance(const DomainSpec& dom, const Point& p);

}  // namespace spotdyn::detail
