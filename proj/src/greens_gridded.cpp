#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "greens_internal.hpp"
#include "spotdyn/bessel.hpp"

// Finite-volume backend for polygonal domains with circular holes.  The
// singular part of each kernel is split off analytically and the smooth
// remainder W = G - G_free is solved on a uniform grid with cut cells along
// the boundary:
//
//   Neumann:    G_free = -(1/2pi) log r + |x-x0|^2/(4|Omega|),  Lap W = 0
//   Helmholtz:  G_free = (1/2pi) K0(sqrt(mu) r),      (Lap - mu) W = 0
//
// with dW/dn = -dG_free/dn on the boundary.  The flux data moves the whole
// source singularity into smooth boundary integrals, so W needs no local
// refinement.  Values and derivatives of W at evaluation points come from a
// least-squares quadratic fit over the surrounding 5x5 block of cell values;
// source derivatives reuse the factorized operator on displaced right-hand
// sides.

namespace spotdyn::detail {

namespace {

constexpr double pi = std::numbers::pi;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

Vec2 to_vec(const Point& p) { return {p.x, p.y}; }

bool inside(const DomainSpec& dom, const Vec2& p) {
  if (!point_in_polygon(dom.polygon, {p.x(), p.y()})) return false;
  for (const auto& h : dom.holes)
    if (std::hypot(p.x() - h.center.x, p.y() - h.center.y) < h.radius) return false;
  return true;
}

// Crossing parameters of segment a + t(b-a), t in (0,1), with the boundary.
void crossings(const DomainSpec& dom, const Vec2& a, const Vec2& b,
               std::vector<double>& ts) {
  ts.clear();
  const Vec2 d = b - a;
  const double lox = std::min(a.x(), b.x()) - 1e-14, hix = std::max(a.x(), b.x()) + 1e-14;
  const double loy = std::min(a.y(), b.y()) - 1e-14, hiy = std::max(a.y(), b.y()) + 1e-14;
  const size_t n = dom.polygon.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 p = to_vec(dom.polygon[i]);
    const Vec2 q = to_vec(dom.polygon[(i + 1) % n]);
    if (std::max(p.x(), q.x()) < lox || std::min(p.x(), q.x()) > hix ||
        std::max(p.y(), q.y()) < loy || std::min(p.y(), q.y()) > hiy)
      continue;
    const Vec2 e = q - p;
    const double det = d.x() * (-e.y()) - d.y() * (-e.x());
    if (std::abs(det) < 1e-30) continue;
    const Vec2 rhs = p - a;
    const double t = (rhs.x() * (-e.y()) - rhs.y() * (-e.x())) / det;
    const double s = (d.x() * rhs.y() - d.y() * rhs.x()) / det;
    if (t > 0.0 && t < 1.0 && s >= 0.0 && s <= 1.0) ts.push_back(t);
  }
  for (const auto& h : dom.holes) {
    const Vec2 c{h.center.x, h.center.y};
    const double A = d.squaredNorm();
    const double B = 2.0 * d.dot(a - c);
    const double C = (a - c).squaredNorm() - h.radius * h.radius;
    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0 || A < 1e-30) continue;
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)})
      if (t > 0.0 && t < 1.0) ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
}

// Length of the inside part of the segment [a, b].
double aperture(const DomainSpec& dom, const Vec2& a, const Vec2& b,
                std::vector<double>& ts) {
  crossings(dom, a, b, ts);
  double len = 0.0, prev = 0.0;
  const double full = (b - a).norm();
  for (size_t k = 0; k <= ts.size(); ++k) {
    const double next = k < ts.size() ? ts[k] : 1.0;
    if (next > prev) {
      const double mid = 0.5 * (prev + next);
      if (inside(dom, a + mid * (b - a))) len += (next - prev) * full;
    }
    prev = next;
  }
  return len;
}

struct QuadPoint {
  Vec2 p, n;  // position and outward normal
  double w;   // arc-length weight
  int cell;   // owning active cell
};

struct Geometry {
  double h = 0.0, area = 0.0;
  int nx = 0, ny = 0;
  Vec2 origin = Vec2::Zero();
  std::vector<int> index;         // raster -> active id (or -1)
  std::vector<int> raster;        // active id -> raster
  std::vector<double> vol;        // active id -> |cell cap Omega|
  std::vector<Vec2> centroid;     // active id -> centroid of the inside part
  std::vector<double> apx, apy;   // active id -> aperture of the +x / +y face
  std::vector<QuadPoint> bq;      // boundary quadrature

  Vec2 center(int id) const {
    const int i = raster[id] % nx, j = raster[id] / nx;
    return origin + Vec2((i + 0.5) * h, (j + 0.5) * h);
  }
  int locate(const Vec2& p) const {
    const int i = std::clamp(int(std::floor((p.x() - origin.x()) / h)), 0, nx - 1);
    const int j = std::clamp(int(std::floor((p.y() - origin.y()) / h)), 0, ny - 1);
    return j * nx + i;
  }
};

std::shared_ptr<const Geometry> build_geometry(const DomainSpec& dom) {
  auto geo = std::make_shared<Geometry>();
  Geometry& g = *geo;
  g.h = dom.grid_h;
  g.area = dom.area();
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto& p : dom.polygon) {
    xlo = std::min(xlo, p.x), xhi = std::max(xhi, p.x);
    ylo = std::min(ylo, p.y), yhi = std::max(yhi, p.y);
  }
  g.origin = {xlo, ylo};
  g.nx = std::max(1, int(std::ceil((xhi - xlo) / g.h - 1e-9)));
  g.ny = std::max(1, int(std::ceil((yhi - ylo) / g.h - 1e-9)));
  if (double(g.nx) * double(g.ny) > 4e6)
    throw std::runtime_error("gridded: grid exceeds 4e6 cells; increase h");
  const int nx = g.nx, ny = g.ny;
  const double h = g.h;

  // Face apertures on the full lattice.
  std::vector<double> vap(size_t(nx + 1) * ny), hap(size_t(nx) * (ny + 1));
  std::vector<double> ts;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const Vec2 a = g.origin + Vec2(i * h, j * h);
      vap[size_t(j) * (nx + 1) + i] = aperture(dom, a, a + Vec2(0, h), ts);
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 a = g.origin + Vec2(i * h, j * h);
      hap[size_t(j) * nx + i] = aperture(dom, a, a + Vec2(h, 0), ts);
    }

  // Classify cells, compute cut-cell volumes and centroids by subsampling.
  g.index.assign(size_t(nx) * ny, -1);
  const double tiny = 1e-10;
  constexpr int NS = 16;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double aW = vap[size_t(j) * (nx + 1) + i];
      const double aE = vap[size_t(j) * (nx + 1) + i + 1];
      const double aS = hap[size_t(j) * nx + i];
      const double aN = hap[size_t(j + 1) * nx + i];
      const Vec2 lo = g.origin + Vec2(i * h, j * h);
      const Vec2 mid = lo + Vec2(h / 2, h / 2);
      const bool full = std::min(std::min(aW, aE), std::min(aS, aN)) > h - 1e-12;
      const bool empty = std::max(std::max(aW, aE), std::max(aS, aN)) < 1e-12;
      double vol;
      Vec2 cen = mid;
      if (full && inside(dom, mid)) {
        vol = h * h;
      } else if (empty && !inside(dom, mid)) {
        continue;
      } else {
        int cnt = 0;
        Vec2 acc = Vec2::Zero();
        for (int sy = 0; sy < NS; ++sy)
          for (int sx = 0; sx < NS; ++sx) {
            const Vec2 q = lo + Vec2((sx + 0.5) * h / NS, (sy + 0.5) * h / NS);
            if (inside(dom, q)) ++cnt, acc += q;
          }
        vol = h * h * cnt / double(NS * NS);
        if (cnt > 0) cen = acc / cnt;
      }
      const double apsum = aW + aE + aS + aN;
      if (vol < tiny * h * h || apsum < tiny * h) continue;  // isolated sliver
      const int id = int(g.vol.size());
      g.index[size_t(j) * nx + i] = id;
      g.raster.push_back(j * nx + i);
      g.vol.push_back(vol);
      g.centroid.push_back(cen);
      g.apx.push_back(aE);
      g.apy.push_back(aN);
    }
  // Apertures to inactive neighbours carry no unknown; zero them out.
  for (size_t id = 0; id < g.vol.size(); ++id) {
    const int i = g.raster[id] % nx, j = int(g.raster[id] / nx);
    if (i + 1 >= nx || g.index[size_t(j) * nx + i + 1] < 0) g.apx[id] = 0.0;
    if (j + 1 >= ny || g.index[size_t(j + 1) * nx + i] < 0) g.apy[id] = 0.0;
  }

  // Boundary quadrature: short sub-segments of the polygon edges and hole
  // circles, each carrying its midpoint, outward normal, and arc length.
  auto assign_cell = [&](const Vec2& p) {
    const int r0 = g.locate(p);
    if (g.index[r0] >= 0) return g.index[r0];
    const int ci = r0 % nx, cj = r0 / nx;
    int best = -1;
    double bd = 1e300;
    for (int dj = -3; dj <= 3; ++dj)
      for (int di = -3; di <= 3; ++di) {
        const int ii = ci + di, jj = cj + dj;
        if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
        const int id = g.index[size_t(jj) * nx + ii];
        if (id < 0) continue;
        const double d = (g.centroid[id] - p).squaredNorm();
        if (d < bd) bd = d, best = id;
      }
    if (best < 0) throw std::runtime_error("gridded: boundary piece far from any cell");
    return best;
  };
  auto in_hole = [&](const Vec2& p, const Hole* skip) {
    for (const auto& hh : dom.holes) {
      if (&hh == skip) continue;
      if (std::hypot(p.x() - hh.center.x, p.y() - hh.center.y) < hh.radius) return true;
    }
    return false;
  };
  const double step = h / 3.0;
  const size_t n = dom.polygon.size();
  for (size_t e = 0; e < n; ++e) {
    const Vec2 a = to_vec(dom.polygon[e]);
    const Vec2 b = to_vec(dom.polygon[(e + 1) % n]);
    const double len = (b - a).norm();
    if (len < 1e-14) continue;
    const Vec2 t = (b - a) / len;
    const Vec2 nrm{t.y(), -t.x()};  // outward for a counter-clockwise polygon
    const int m = std::max(1, int(std::ceil(len / step)));
    for (int k = 0; k < m; ++k) {
      const Vec2 p = a + (k + 0.5) * (len / m) * t;
      if (in_hole(p, nullptr)) continue;
      g.bq.push_back({p, nrm, len / m, 0});
    }
  }
  for (const auto& hole : dom.holes) {
    const int m = std::max(8, int(std::ceil(2.0 * pi * hole.radius / step)));
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * pi * (k + 0.5) / m;
      const Vec2 rhat{std::cos(th), std::sin(th)};
      const Vec2 p = Vec2{hole.center.x, hole.center.y} + hole.radius * rhat;
      if (!point_in_polygon(dom.polygon, {p.x(), p.y()}) || in_hole(p, &hole)) continue;
      g.bq.push_back({p, -rhat, 2.0 * pi * hole.radius / m, 0});
    }
  }
  for (auto& q : g.bq) q.cell = assign_cell(q.p);
  return geo;
}

// ---- cached operators --------------------------------------------------

using GeoKey = std::vector<double>;

GeoKey geo_key(const DomainSpec& dom) {
  GeoKey k;
  k.push_back(dom.grid_h);
  for (const auto& p : dom.polygon) k.push_back(p.x), k.push_back(p.y);
  k.push_back(-1e308);
  for (const auto& h : dom.holes)
    k.push_back(h.center.x), k.push_back(h.center.y), k.push_back(h.radius);
  return k;
}

template <class Scalar>
struct Operator {
  std::shared_ptr<const Geometry> geo;
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  bool constrained = false;  // Neumann: trailing row/column pin the mean
};

template <class Scalar>
std::shared_ptr<Operator<Scalar>> factorize(std::shared_ptr<const Geometry> geo,
                                            cplx mu, bool constrained) {
  auto op = std::make_shared<Operator<Scalar>>();
  op->geo = geo;
  op->constrained = constrained;
  Scalar mu_s;
  if constexpr (std::is_same_v<Scalar, double>)
    mu_s = mu.real();
  else
    mu_s = mu;
  const Geometry& g = *geo;
  const int m = int(g.vol.size());
  const int dim = m + (constrained ? 1 : 0);
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(size_t(m) * 6);
  auto add = [&](int r, int c, Scalar v) { trip.emplace_back(r, c, v); };
  for (int id = 0; id < m; ++id) {
    const int i = g.raster[id] % g.nx, j = g.raster[id] / g.nx;
    for (int dir = 0; dir < 2; ++dir) {
      const double ap = dir == 0 ? g.apx[id] : g.apy[id];
      if (ap <= 0.0) continue;
      const int nb = dir == 0 ? g.index[size_t(j) * g.nx + i + 1]
                              : g.index[size_t(j + 1) * g.nx + i];
      const Scalar f = Scalar(ap / g.h);
      add(id, id, -f);
      add(id, nb, f);
      add(nb, nb, -f);
      add(nb, id, f);
    }
    if (mu_s != Scalar(0)) add(id, id, -mu_s * Scalar(g.vol[id]));
    if (constrained) {
      add(id, m, Scalar(g.vol[id]));
      add(m, id, Scalar(g.vol[id]));
    }
  }
  Eigen::SparseMatrix<Scalar> A(dim, dim);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  op->lu.compute(A);
  if (op->lu.info() != Eigen::Success)
    throw std::runtime_error("gridded: sparse factorization failed");
  return op;
}

std::mutex cache_mutex;

std::shared_ptr<const Geometry> geometry_for(const DomainSpec& dom) {
  static std::map<GeoKey, std::shared_ptr<const Geometry>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = geo_key(dom);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_geometry(dom)).first;
  return it->second;
}

std::shared_ptr<Operator<double>> neumann_op(const DomainSpec& dom) {
  static std::map<GeoKey, std::shared_ptr<Operator<double>>> cache;
  auto geo = geometry_for(dom);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = geo_key(dom);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, factorize<double>(geo, 0.0, true)).first;
  return it->second;
}

std::shared_ptr<Operator<cplx>> helm_op(const DomainSpec& dom, cplx mu) {
  static std::map<GeoKey, std::shared_ptr<Operator<cplx>>> cache;
  auto geo = geometry_for(dom);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = geo_key(dom);
  key.push_back(mu.real());
  key.push_back(mu.imag());
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, factorize<cplx>(geo, mu, false)).first;
  return it->second;
}

// ---- free-space kernels --------------------------------------------------

struct FreeN {
  double value;
  Vec2 grad;  // field gradient
  Mat2 hess;
};

FreeN free_neumann(const Vec2& x, const Vec2& x0, double area) {
  FreeN f;
  const Vec2 d = x - x0;
  const double r2 = d.squaredNorm();
  f.value = -std::log(r2) / (4.0 * pi) + r2 / (4.0 * area);
  f.grad = -d / (2.0 * pi * r2) + d / (2.0 * area);
  const Mat2 dd = d * d.transpose();
  f.hess = -(Mat2::Identity() - 2.0 * dd / r2) / (2.0 * pi * r2) +
           Mat2::Identity() / (2.0 * area);
  return f;
}

struct FreeH {
  cplx value;
  Vec2c grad;  // field gradient; source gradient is its negative
  Mat2c hess;  // field Hessian; mixed second derivative is its negative
};

FreeH free_helmholtz(cplx mu, const Vec2& x, const Vec2& x0) {
  FreeH f;
  const cplx z = std::sqrt(mu);
  const Vec2 d = x - x0;
  const double r = d.norm();
  const cplx zr = z * r;
  const cplx K0 = bessel_k(0, zr), K1 = bessel_k(1, zr);
  f.value = K0 / (2.0 * pi);
  const Vec2c rhat = (d / r).cast<cplx>();
  f.grad = -(z / (2.0 * pi)) * K1 * rhat;
  const Mat2c rr = rhat * rhat.transpose();
  f.hess = (mu / (2.0 * pi)) *
           (K0 * rr + (K1 / zr) * (2.0 * rr - Mat2c::Identity()));
  return f;
}

// Normal derivative of G_free at a boundary point.
double flux_neumann(const Vec2& p, const Vec2& n, const Vec2& x0, double area) {
  const Vec2 d = p - x0;
  return n.dot(-d / (2.0 * pi * d.squaredNorm()) + d / (2.0 * area));
}

cplx flux_helmholtz(cplx z, const Vec2& p, const Vec2& n, const Vec2& x0) {
  const Vec2 d = p - x0;
  const double r = d.norm();
  return -(z / (2.0 * pi)) * bessel_k(1, z * r) * (n.dot(d) / r);
}

// Integral of the Neumann free kernel over the domain (sets the constant so
// that the assembled G integrates to zero).
double integral_free_neumann(const Geometry& g, const Vec2& x0, double area) {
  double total = 0.0;
  const double near = 3.0 * g.h;
  for (size_t id = 0; id < g.vol.size(); ++id) {
    const Vec2 c = g.centroid[id];
    if ((c - x0).norm() > near) {
      total += g.vol[id] * free_neumann(c, x0, area).value;
    } else {
      constexpr int NS = 32;
      const Vec2 lo = g.center(int(id)) - Vec2(g.h / 2, g.h / 2);
      double acc = 0.0;
      for (int sy = 0; sy < NS; ++sy)
        for (int sx = 0; sx < NS; ++sx) {
          const Vec2 q = lo + Vec2((sx + 0.5) * g.h / NS, (sy + 0.5) * g.h / NS);
          if ((q - x0).norm() < 1e-12) continue;
          acc += free_neumann(q, x0, area).value;
        }
      total += acc * g.h * g.h / double(NS * NS);
    }
  }
  return total;
}

// Remainder solve with mean-zero gauge; the zero-integral normalization of G
// itself is restored afterwards by the additive constant -integral(G_free)/|O|.
Eigen::VectorXd solve_neumann(const Operator<double>& op, const Vec2& x0) {
  const Geometry& g = *op.geo;
  const int m = int(g.vol.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m + 1);
  for (const auto& q : g.bq) b[q.cell] += q.w * flux_neumann(q.p, q.n, x0, g.area);
  Eigen::VectorXd w = op.lu.solve(b);
  if (op.lu.info() != Eigen::Success)
    throw std::runtime_error("gridded: Neumann solve failed");
  return w;
}

Eigen::VectorXcd solve_helmholtz(const Operator<cplx>& op, cplx mu, const Vec2& x0) {
  const Geometry& g = *op.geo;
  const cplx z = std::sqrt(mu);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(g.vol.size());
  for (const auto& q : g.bq) b[q.cell] += q.w * flux_helmholtz(z, q.p, q.n, x0);
  Eigen::VectorXcd w = op.lu.solve(b);
  if (op.lu.info() != Eigen::Success)
    throw std::runtime_error("gridded: Helmholtz solve failed");
  return w;
}

// ---- least-squares quadratic evaluation ----------------------------------

template <class Scalar>
struct FitData {
  Scalar value;
  Eigen::Matrix<Scalar, 2, 1> grad;
  Eigen::Matrix<Scalar, 2, 2> hess;
};

// Quadratic least-squares model of the cell data around p; `anchor` fixes the
// stencil independently of p so that finite differences over tiny source
// displacements never see a stencil change.
template <class Scalar, class Vec>
FitData<Scalar> lsq_fit(const Geometry& g, const Vec& w, const Vec2& p,
                        const Vec2* anchor = nullptr) {
  std::vector<int> ids;
  const int r0 = g.locate(anchor ? *anchor : p);
  const int ci = r0 % g.nx, cj = r0 / g.nx;
  for (int reach = 2; reach <= 3; ++reach) {
    ids.clear();
    for (int dj = -reach; dj <= reach; ++dj)
      for (int di = -reach; di <= reach; ++di) {
        const int ii = ci + di, jj = cj + dj;
        if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
        const int id = g.index[size_t(jj) * g.nx + ii];
        if (id >= 0) ids.push_back(id);
      }
    if (int(ids.size()) >= 12) break;
  }
  if (int(ids.size()) < 8)
    throw std::runtime_error("gridded: too few cells near an evaluation point");
  Eigen::MatrixXd X(ids.size(), 6);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(ids.size());
  for (size_t k = 0; k < ids.size(); ++k) {
    const Vec2 d = (g.center(ids[k]) - p) / g.h;  // scaled for conditioning
    X.row(k) << 1.0, d.x(), d.y(), d.x() * d.x(), d.x() * d.y(), d.y() * d.y();
    y[k] = w[ids[k]];
  }
  const auto qr = X.colPivHouseholderQr();
  Eigen::Matrix<Scalar, 6, 1> a;
  if constexpr (std::is_same_v<Scalar, double>) {
    a = qr.solve(y);
  } else {
    const Eigen::VectorXd re = qr.solve(y.real().eval());
    const Eigen::VectorXd im = qr.solve(y.imag().eval());
    a = re.cast<cplx>() + cplx(0, 1) * im.cast<cplx>();
  }
  FitData<Scalar> out;
  out.value = a[0];
  out.grad << a[1] / g.h, a[2] / g.h;
  const double h2 = g.h * g.h;
  out.hess << 2.0 * a[3] / h2, a[4] / h2, a[4] / h2, 2.0 * a[5] / h2;
  return out;
}

constexpr double delta = 1e-4;  // source displacement for mixed derivatives

}  // namespace

NeumannMatrix gridded_neumann_local(const DomainSpec& dom,
                                    const std::vector<Point>& sources) {
  auto op = neumann_op(dom);
  const Geometry& g = *op->geo;
  const size_t n = sources.size();
  std::vector<Eigen::VectorXd> w(n);
  std::vector<double> shift(n);  // restores the zero-integral normalization
  for (size_t j = 0; j < n; ++j) {
    w[j] = solve_neumann(*op, to_vec(sources[j]));
    shift[j] = -integral_free_neumann(g, to_vec(sources[j]), g.area) / g.area;
  }

  NeumannMatrix out(n, std::vector<NeumannLocalData>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      NeumannLocalData& d = out[i][j];
      d.source = sources[j];
      const Vec2 xi = to_vec(sources[i]), xj = to_vec(sources[j]);
      const auto fit = lsq_fit<double>(g, w[j], xi);
      if (i == j) {
        d.regular_value = fit.value + shift[j];
        d.gradient = fit.grad;
        d.hessian = fit.hess + Mat2::Identity() / (2.0 * g.area);
      } else {
        const FreeN f = free_neumann(xi, xj, g.area);
        d.value = f.value + fit.value + shift[j];
        d.gradient = f.grad + fit.grad;
        d.hessian = f.hess + fit.hess;
      }
    }
  return out;
}

HelmholtzMatrix gridded_helmholtz_local(const DomainSpec& dom, cplx mu,
                                        const std::vector<Point>& sources) {
  auto op = helm_op(dom, mu);
  const Geometry& g = *op->geo;
  const cplx z = std::sqrt(mu);
  const cplx log_fac = std::numbers::egamma + std::log(z / 2.0);
  const size_t n = sources.size();

  // Solves: base field per source plus four displaced fields for the source
  // derivatives (the factorization is shared).
  std::vector<Eigen::VectorXcd> base(n);
  std::vector<std::array<Eigen::VectorXcd, 4>> disp(n);  // +x,-x,+y,-y
  for (size_t j = 0; j < n; ++j) {
    const Vec2 xj = to_vec(sources[j]);
    base[j] = solve_helmholtz(*op, mu, xj);
    for (int k = 0; k < 4; ++k) {
      Vec2 s = xj;
      s[k / 2] += (k % 2 == 0 ? delta : -delta);
      disp[j][k] = solve_helmholtz(*op, mu, s);
    }
  }

  HelmholtzMatrix out(n, std::vector<HelmholtzLocalData>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      HelmholtzLocalData& d = out[i][j];
      d.parameter = mu;
      d.source = sources[j];
      const Vec2 xi = to_vec(sources[i]), xj = to_vec(sources[j]);
      if (i == j) {
        const auto fit = lsq_fit<cplx>(g, base[j], xj);
        d.regular_value = fit.value - log_fac / (2.0 * pi);
        d.grad_regular = fit.grad;
        d.hessian =
            fit.hess - (mu / (4.0 * pi)) * (log_fac - 1.0) * Mat2c::Identity();
        for (int k = 0; k < 2; ++k) {  // total derivative of the self gradient
          Vec2 sp = xj, sm = xj;
          sp[k] += delta, sm[k] -= delta;
          const auto fp = lsq_fit<cplx>(g, disp[j][2 * k], sp, &xj);
          const auto fm = lsq_fit<cplx>(g, disp[j][2 * k + 1], sm, &xj);
          d.grad_source_of_grad.row(k) = ((fp.grad - fm.grad) / (2.0 * delta)).transpose();
        }
      } else {
        const auto fit = lsq_fit<cplx>(g, base[j], xi);
        const FreeH f = free_helmholtz(mu, xi, xj);
        d.value = f.value + fit.value;
        d.hessian = f.hess + fit.hess;
        // reciprocity: the source gradient is the field gradient of the
        // transposed pair, available from solve i
        const auto rfit = lsq_fit<cplx>(g, base[i], xj);
        d.grad_source = free_helmholtz(mu, xj, xi).grad + rfit.grad;
        for (int k = 0; k < 2; ++k) {
          const auto fp = lsq_fit<cplx>(g, disp[j][2 * k], xi);
          const auto fm = lsq_fit<cplx>(g, disp[j][2 * k + 1], xi);
          d.grad_source_of_grad.row(k) =
              ((fp.grad - fm.grad) / (2.0 * delta)).transpose();
        }
        d.grad_source_of_grad -= f.hess;  // analytic mixed part of the kernel
      }
    }
  return out;
}

double gridded_neumann_value(const DomainSpec& dom, const Point& x, const Point& x0) {
  auto op = neumann_op(dom);
  const Geometry& g = *op->geo;
  const Eigen::VectorXd w = solve_neumann(*op, to_vec(x0));
  const auto fit = lsq_fit<double>(g, w, to_vec(x));
  return free_neumann(to_vec(x), to_vec(x0), g.area).value + fit.value -
         integral_free_neumann(g, to_vec(x0), g.area) / g.area;
}

cplx gridded_helmholtz_value(const DomainSpec& dom, cplx mu, const Point& x,
                             const Point& x0) {
  auto op = helm_op(dom, mu);
  const Eigen::VectorXcd w = solve_helmholtz(*op, mu, to_vec(x0));
  const auto fit = lsq_fit<cplx>(*op->geo, w, to_vec(x));
  return free_helmholtz(mu, to_vec(x), to_vec(x0)).value + fit.value;
}

}  // namespace spotdyn::detail
