#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace spotdyn {

using cplx = std::complex<double>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class DomainKind { unit_disk, perturbed_disk, rectangle, half_disk, gridded };

struct Hole {
  Point center;
  double radius = 0.0;
};

// Geometry of the domain.  Construct through the factory functions below; they
// validate their arguments.  Supported shapes:
//   unit_disk       {|x| < 1}
//   perturbed_disk  boundary rho(theta) = 1 + sigma*f(theta) with
//                   f = sum_m a_m cos(m theta) + b_m sin(m theta); local data
//                   is provided for a single source at the origin, correct to
//                   first order in sigma.
//   rectangle       [0,width] x [0,height]
//   half_disk       {|x| < radius, y > 0} (flat side on the x-axis)
//   gridded         polygon with optional circular holes, solved on a uniform
//                   grid of spacing h.
struct DomainSpec {
  DomainKind kind = DomainKind::unit_disk;

  double sigma = 0.0;
  std::vector<double> fourier_cos;  // a_1..a_M
  std::vector<double> fourier_sin;  // b_1..b_M

  double width = 0.0;
  double height = 0.0;

  double radius = 1.0;

  std::vector<Point> polygon;  // counter-clockwise outer boundary
  std::vector<Hole> holes;
  double grid_h = 0.0;

  double area() const;

  static DomainSpec unit_disk();
  static DomainSpec perturbed_disk(double sigma, std::vector<double> fourier_cos,
                                   std::vector<double> fourier_sin);
  static DomainSpec rectangle(double width, double height);
  static DomainSpec half_disk(double radius = 1.0);
  static DomainSpec gridded(std::vector<Point> polygon, std::vector<Hole> holes,
                            double h);
};

// Local expansion data of the modified Neumann Green's function
//   Delta G = -delta(x - x0) + 1/|Omega|,  d_n G = 0 on the boundary,
//   integral of G over Omega = 0.
// Diagonal entries (source expanded about itself) carry the regular part
//   R = G + (1/2pi) log|x - x0| and its derivatives at x = x0; off-diagonal
// entries carry G and its field-point derivatives evaluated at another
// source's location.
struct NeumannLocalData {
  Point source;
  double value = 0.0;          // off-diagonal: G(x_j; x_i)
  double regular_value = 0.0;  // diagonal: R(x_j; x_j)
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();  // d/dx at x_j (of R on the diagonal)
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();   // d2/dx2 at x_j (of R on the diagonal)
};

// Local expansion data of the Helmholtz Green's function
//   Delta G - mu G = -delta(x - x0),  d_n G = 0 on the boundary,
// whose regular part near the source splits as
//   G = -(1/2pi) log r - (mu/8pi) r^2 log r + (smooth part).
// Diagonal entries: regular_value and grad_regular are value/gradient of
// G + (1/2pi) log r at x = x0; hessian is the Hessian of the smooth part
// (i.e. with the r^2 log r term also removed); grad_source_of_grad is the
// total derivative of grad_regular with respect to the source position.
// Off-diagonal entries (field point x_j, source x_i): value is G(x_j; x_i),
// grad_source is the gradient with respect to the source x_i, hessian is the
// field-point Hessian at x_j, and grad_source_of_grad(k,l) is
// d/dx_i,k of d/dx_l G(x; x_i) at x = x_j.  The field-point gradient of the
// (j,i) entry equals the source gradient of the (i,j) entry by reciprocity.
struct HelmholtzLocalData {
  cplx parameter{0.0, 0.0};
  Point source;
  cplx value{0.0, 0.0};          // off-diagonal only
  cplx regular_value{0.0, 0.0};  // diagonal only
  Eigen::Vector2cd grad_regular = Eigen::Vector2cd::Zero();  // diagonal only
  Eigen::Vector2cd grad_source = Eigen::Vector2cd::Zero();   // off-diagonal only
  Eigen::Matrix2cd grad_source_of_grad = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd hessian = Eigen::Matrix2cd::Zero();
};

using NeumannMatrix = std::vector<std::vector<NeumannLocalData>>;
using HelmholtzMatrix = std::vector<std::vector<HelmholtzLocalData>>;

// Local data for all ordered source pairs; entry [j][i] expands the function
// with source x_i about the point x_j.  Sources must be strictly interior and
// pairwise distinct (for the gridded backend: at least 5h from the boundary
// and from each other).
NeumannMatrix neumann_local(const DomainSpec& domain,
                            const std::vector<Point>& sources);

// Same for the Helmholtz function with parameter mu.  Requires mu != 0 with
// Re mu >= 0 or mu pure imaginary.
HelmholtzMatrix helmholtz_local(const DomainSpec& domain, cplx mu,
                                const std::vector<Point>& sources);

// Pointwise values (diagnostic / cross-validation probes).  x may lie in the
// closure of the domain, x0 must be interior, x != x0.
double neumann_value(const DomainSpec& domain, const Point& x, const Point& x0);
cplx helmholtz_value(const DomainSpec& domain, cplx mu, const Point& x,
                     const Point& x0);

// First-order corrections to the centered-source local data when the unit
// disk boundary is perturbed to rho = 1 + sigma*f(theta): only the mode-2
// component a2*cos(2theta) + b2*sin(2theta) of f contributes at O(sigma).
// The returned matrices are additive corrections, already multiplied by
// sigma, expressed in the lab frame (internally: diagonal in the frame
// rotated by phi/2 where cos phi = a2/sqrt(a2^2+b2^2)).
struct PerturbedDiskCorrections {
  Eigen::Matrix2d neumann_hessian = Eigen::Matrix2d::Zero();
  Eigen::Matrix2cd grad_source_of_grad = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd helmholtz_hessian = Eigen::Matrix2cd::Zero();
};

PerturbedDiskCorrections perturbed_disk_corrections(double sigma, double a2,
                                                    double b2, cplx mu);

}  // namespace spotdyn
