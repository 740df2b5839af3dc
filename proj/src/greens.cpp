#include "spotdyn/greens.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "greens_internal.hpp"

namespace spotdyn {

namespace {

constexpr double pi = std::numbers::pi;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double hole_area(const std::vector<Hole>& holes) {
  double a = 0.0;
  for (const auto& h : holes) a += pi * h.radius * h.radius;
  return a;
}

void check_sources(const DomainSpec& dom, const std::vector<Point>& xs) {
  require(!xs.empty(), "greens: source list is empty");
  const double margin = dom.kind == DomainKind::gridded ? 5.0 * dom.grid_h : 1e-9;
  for (const auto& p : xs) {
    if (detail::interior_distance(dom, p) <= margin)
      throw std::invalid_argument("greens: source too close to the boundary");
  }
  for (size_t i = 0; i < xs.size(); ++i)
    for (size_t j = i + 1; j < xs.size(); ++j) {
      const double d = std::hypot(xs[i].x - xs[j].x, xs[i].y - xs[j].y);
      if (d <= margin)
        throw std::invalid_argument("greens: sources too close to each other");
    }
}

void check_mu(cplx mu) {
  require(std::abs(mu) > 1e-12,
          "greens: mu must be nonzero (use neumann_local for mu = 0)");
  require(mu.real() >= 0.0 || std::abs(mu.real()) < 1e-12 * std::abs(mu),
          "greens: mu must have Re mu >= 0 or be purely imaginary");
}

void check_perturbed_sources(const std::vector<Point>& xs) {
  require(xs.size() == 1 && std::hypot(xs[0].x, xs[0].y) < 1e-12,
          "greens: the perturbed disk backend supports a single source at the origin");
}

}  // namespace

double DomainSpec::area() const {
  switch (kind) {
    case DomainKind::unit_disk:
      return pi;
    case DomainKind::perturbed_disk: {
      double sq = 0.0;
      for (double a : fourier_cos) sq += a * a;
      for (double b : fourier_sin) sq += b * b;
      return pi * (1.0 + 0.5 * sigma * sigma * sq);
    }
    case DomainKind::rectangle:
      return width * height;
    case DomainKind::half_disk:
      return 0.5 * pi * radius * radius;
    case DomainKind::gridded:
      return detail::polygon_area(polygon) - hole_area(holes);
  }
  return 0.0;
}

DomainSpec DomainSpec::unit_disk() {
  DomainSpec d;
  d.kind = DomainKind::unit_disk;
  return d;
}

DomainSpec DomainSpec::perturbed_disk(double sigma, std::vector<double> fourier_cos,
                                      std::vector<double> fourier_sin) {
  require(sigma >= 0.0, "perturbed_disk: sigma must be >= 0");
  if (sigma > 0.3)
    std::cerr << "warning: perturbed_disk with sigma = " << sigma
              << " is outside the small-deformation regime\n";
  DomainSpec d;
  d.kind = DomainKind::perturbed_disk;
  d.sigma = sigma;
  d.fourier_cos = std::move(fourier_cos);
  d.fourier_sin = std::move(fourier_sin);
  d.fourier_sin.resize(std::max(d.fourier_cos.size(), d.fourier_sin.size()), 0.0);
  d.fourier_cos.resize(d.fourier_sin.size(), 0.0);
  return d;
}

DomainSpec DomainSpec::rectangle(double width, double height) {
  require(width > 0.0 && height > 0.0, "rectangle: sides must be positive");
  DomainSpec d;
  d.kind = DomainKind::rectangle;
  d.width = width;
  d.height = height;
  return d;
}

DomainSpec DomainSpec::half_disk(double radius) {
  require(radius > 0.0, "half_disk: radius must be positive");
  DomainSpec d;
  d.kind = DomainKind::half_disk;
  d.radius = radius;
  return d;
}

DomainSpec DomainSpec::gridded(std::vector<Point> polygon, std::vector<Hole> holes,
                               double h) {
  require(polygon.size() >= 3, "gridded: polygon needs at least 3 vertices");
  require(h > 0.0, "gridded: grid spacing must be positive");
  DomainSpec d;
  d.kind = DomainKind::gridded;
  d.polygon = std::move(polygon);
  d.holes = std::move(holes);
  d.grid_h = h;
  require(detail::polygon_area(d.polygon) > 0.0,
          "gridded: polygon must be counter-clockwise with positive area");
  for (const auto& hole : d.holes) {
    require(hole.radius >= 8.0 * h,
            "gridded: grid too coarse, need >= 8 cells per hole radius");
    require(detail::point_in_polygon(d.polygon, hole.center),
            "gridded: hole center outside the polygon");
  }
  require(d.area() > 0.0, "gridded: domain area must be positive");
  return d;
}

NeumannMatrix neumann_local(const DomainSpec& domain, const std::vector<Point>& sources) {
  if (domain.kind == DomainKind::perturbed_disk) {
    check_perturbed_sources(sources);
    return detail::perturbed_disk_neumann_local(domain);
  }
  check_sources(domain, sources);
  switch (domain.kind) {
    case DomainKind::unit_disk:
      return detail::disk_neumann_local(sources);
    case DomainKind::half_disk:
      return detail::half_disk_neumann_local(domain.radius, sources);
    case DomainKind::rectangle:
      return detail::rect_neumann_local(domain.width, domain.height, sources);
    case DomainKind::gridded:
      return detail::gridded_neumann_local(domain, sources);
    default:
      throw std::invalid_argument("neumann_local: unsupported domain kind");
  }
}

HelmholtzMatrix helmholtz_local(const DomainSpec& domain, cplx mu,
                                const std::vector<Point>& sources) {
  check_mu(mu);
  if (domain.kind == DomainKind::perturbed_disk) {
    check_perturbed_sources(sources);
    return detail::perturbed_disk_helmholtz_local(domain, mu);
  }
  check_sources(domain, sources);
  switch (domain.kind) {
    case DomainKind::unit_disk:
      return detail::disk_helmholtz_local(mu, sources);
    case DomainKind::half_disk:
      return detail::half_disk_helmholtz_local(domain.radius, mu, sources);
    case DomainKind::rectangle:
      return detail::rect_helmholtz_local(domain.width, domain.height, mu, sources);
    case DomainKind::gridded:
      return detail::gridded_helmholtz_local(domain, mu, sources);
    default:
      throw std::invalid_argument("helmholtz_local: unsupported domain kind");
  }
}

double neumann_value(const DomainSpec& domain, const Point& x, const Point& x0) {
  require(std::hypot(x.x - x0.x, x.y - x0.y) > 0.0, "neumann_value: x == x0");
  if (domain.kind == DomainKind::perturbed_disk) {
    check_perturbed_sources({x0});
    return detail::perturbed_disk_neumann_value(domain, x);
  }
  check_sources(domain, {x0});
  switch (domain.kind) {
    case DomainKind::unit_disk:
      return detail::disk_neumann_value(x, x0);
    case DomainKind::half_disk:
      return detail::half_disk_neumann_value(domain.radius, x, x0);
    case DomainKind::rectangle:
      return detail::rect_neumann_value(domain.width, domain.height, x, x0);
    case DomainKind::gridded:
      return detail::gridded_neumann_value(domain, x, x0);
    default:
      throw std::invalid_argument("neumann_value: unsupported domain kind");
  }
}

cplx helmholtz_value(const DomainSpec& domain, cplx mu, const Point& x, const Point& x0) {
  check_mu(mu);
  require(std::hypot(x.x - x0.x, x.y - x0.y) > 0.0, "helmholtz_value: x == x0");
  check_sources(domain, {x0});
  switch (domain.kind) {
    case DomainKind::unit_disk:
      return detail::disk_helmholtz_value(mu, x, x0);
    case DomainKind::half_disk:
      return detail::half_disk_helmholtz_value(domain.radius, mu, x, x0);
    case DomainKind::rectangle:
      return detail::rect_helmholtz_value(domain.width, domain.height, mu, x, x0);
    case DomainKind::gridded:
      return detail::gridded_helmholtz_value(domain, mu, x, x0);
    default:
      throw std::invalid_argument(
          "helmholtz_value: unsupported domain kind (perturbed disk has no "
          "general-source Helmholtz values)");
  }
}

namespace detail {

double polygon_area(const std::vector<Point>& poly) {
  double s = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

bool point_in_polygon(const std::vector<Point>& poly, const Point& p) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) &&
        p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

namespace {

double segment_distance(const Point& a, const Point& b, const Point& p) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(wx - t * vx, wy - t * vy);
}

}  // namespace

double interior_distance(const DomainSpec& dom, const Point& p) {
  const double rho = std::hypot(p.x, p.y);
  switch (dom.kind) {
    case DomainKind::unit_disk:
      return 1.0 - rho;
    case DomainKind::perturbed_disk: {
      // Adequate for the centered-source use of this backend.
      return 1.0 - dom.sigma - rho;
    }
    case DomainKind::rectangle:
      return std::min(std::min(p.x, dom.width - p.x),
                      std::min(p.y, dom.height - p.y));
    case DomainKind::half_disk:
      return std::min(dom.radius - rho, p.y);
    case DomainKind::gridded: {
      double d = std::numeric_limits<double>::infinity();
      const size_t n = dom.polygon.size();
      for (size_t i = 0; i < n; ++i)
        d = std::min(d, segment_distance(dom.polygon[i], dom.polygon[(i + 1) % n], p));
      for (const auto& h : dom.holes) {
        const double dc = std::hypot(p.x - h.center.x, p.y - h.center.y);
        if (dc < h.radius) return -(h.radius - dc);
        d = std::min(d, dc - h.radius);
      }
      if (!point_in_polygon(dom.polygon, p)) return -d;
      return d;
    }
  }
  return 0.0;
}

}  // namespace detail

}  // namespace spotdyn
