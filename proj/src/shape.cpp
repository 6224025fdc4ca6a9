#include "shapelab/shape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "shapelab/error.hpp"

namespace shapelab {
namespace {

constexpr double kCurvatureFactor = 10.0;
constexpr double kEdgeFlatness = 1e-6;

struct Worst {
  double violation = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  bool any = false;

  void offer(double v, std::size_t ii, std::size_t jj = 0) {
    if (!any || v > violation) {
      violation = v;
      i = ii;
      j = jj;
      any = true;
    }
  }
};

double step_of(const GridFunction& f) {
  return f.dim() == 2 ? std::max(f.grid().spacing(), f.grid_y().spacing()) : f.grid().spacing();
}

// Tolerance that absorbs rounding in the stencils but nothing else; used
// for the shape preconditions of the approximators.
ConeSpec rounding_cone(ConeKind kind, const GridFunction& f) {
  const double h = step_of(f);
  const double eps = std::numeric_limits<double>::epsilon();
  return ConeSpec::absolute(kind, std::max(1e-9, 64.0 * eps * f.sup_norm() / (h * h)));
}

void require_member(const GridFunction& f, const ConeSpec& cone, const char* op) {
  const auto r = is_member(f, cone);
  if (r.member) return;
  throw PreconditionFailure(std::string(op) + ": input is not " + to_string(cone.kind) +
                                " (violation " + std::to_string(r.worst_violation) + ")",
                            r.witness->x, r.witness->y);
}

}  // namespace

const char* to_string(ConeKind k) {
  switch (k) {
    case ConeKind::MonotoneNonIncreasing: return "monotone-non-increasing";
    case ConeKind::Convex: return "convex";
    case ConeKind::NegativeConvex: return "negative-convex";
    case ConeKind::HessianPSD: return "hessian-psd";
    case ConeKind::Positive: return "positive";
  }
  return "?";
}

double cone_tolerance(const GridFunction& f, const ConeSpec& cone) {
  if (!cone.tol.curvature_scaled || cone.kind == ConeKind::Positive) return cone.tol.absolute;
  const double h = step_of(f);
  return std::max(cone.tol.absolute, kCurvatureFactor * h * h * f.sup_norm());
}

MembershipReport is_member(const GridFunction& f, const ConeSpec& cone) {
  const bool needs_2d = cone.kind == ConeKind::HessianPSD;
  const bool needs_1d = cone.kind != ConeKind::HessianPSD && cone.kind != ConeKind::Positive;
  if (needs_2d && f.dim() != 2) throw DomainError("hessian-psd membership needs a 2D function");
  if (needs_1d && f.dim() != 1)
    throw DomainError(std::string(to_string(cone.kind)) + " membership needs a 1D function");

  const double tol = cone_tolerance(f, cone);
  Worst w;
  switch (cone.kind) {
    case ConeKind::MonotoneNonIncreasing: {
      const auto d = first_difference(f);
      for (std::size_t i = 0; i < d.size(); ++i) w.offer(d[i], i);
      break;
    }
    case ConeKind::Convex:
    case ConeKind::NegativeConvex: {
      const auto d2 = second_difference(f);
      for (std::size_t i = 1; i + 1 < d2.values.size(); ++i) w.offer(-d2.values[i], i);
      if (cone.kind == ConeKind::NegativeConvex)
        for (std::size_t i = 0; i < f.size(); ++i) w.offer(f[i], i);
      break;
    }
    case ConeKind::HessianPSD: {
      const auto H = hessian(f);
      for (std::size_t j = 1; j + 1 < H.grid_y.size(); ++j)
        for (std::size_t i = 1; i + 1 < H.grid_x.size(); ++i)
          w.offer(-H.at(i, j).min_eigenvalue(), i, j);
      break;
    }
    case ConeKind::Positive: {
      const std::size_t nx = f.grid().size();
      for (std::size_t k = 0; k < f.size(); ++k) w.offer(-f[k], k % nx, k / nx);
      break;
    }
  }

  MembershipReport r{true, std::max(0.0, w.violation), std::nullopt, tol};
  r.member = r.worst_violation <= tol;
  if (!r.member) {
    Witness wit{f.grid().point(w.i), std::nullopt};
    if (f.dim() == 2) wit.y = f.grid_y().point(w.j);
    r.witness = wit;
  }
  return r;
}

TrajectoryReport project_witnesses(const Trajectory& trajectory, const ConeSpec& cone) {
  if (trajectory.empty()) throw DomainError("project_witnesses: empty trajectory");
  TrajectoryReport out{{}, true};
  out.rows.reserve(trajectory.size());
  const GridFunction& first = trajectory.front().second;
  for (const auto& [t, f] : trajectory) {
    if (f.dim() != first.dim() || !(f.grid() == first.grid()) ||
        (f.dim() == 2 && !(f.grid_y() == first.grid_y())))
      throw DomainError("project_witnesses: trajectory grids differ at t = " + std::to_string(t));
    out.rows.emplace_back(t, is_member(f, cone));
    out.all_member = out.all_member && out.rows.back().second.member;
  }
  return out;
}

void write_csv(std::ostream& os, const TrajectoryReport& report) {
  char buf[128];
  os << "t,member,worst_violation,witness_x,tol\n";
  for (const auto& [t, r] : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,", t, r.member ? 1 : 0, r.worst_violation);
    os << buf;
    if (r.witness) {
      std::snprintf(buf, sizeof buf, "%.17g", r.witness->x);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", r.tol_used);
    os << buf;
  }
}

MonotoneApproximation approximate_monotone(const GridFunction& f, double eps) {
  if (f.dim() != 1) throw DomainError("approximate_monotone: needs a 1D function");
  if (!(eps > 0.0)) throw DomainError("approximate_monotone: eps must be positive");
  require_member(f, ConeSpec::absolute(ConeKind::MonotoneNonIncreasing, 0.0),
                 "approximate_monotone");
  const Grid& grid = f.grid();
  const std::size_t n = grid.size();
  for (std::size_t i = 1; i < n; ++i)
    if (f[i] > f[i - 1])
      throw PreconditionFailure("approximate_monotone: values increase", grid.point(i));

  // Holding the three edge nodes on each side makes g agree with f wherever
  // the one-sided endpoint stencils look.
  std::vector<std::size_t> nodes;
  const std::size_t lo_edge = std::min<std::size_t>(2, n - 1);
  const std::size_t hi_edge = n >= 3 ? n - 3 : 0;
  for (std::size_t i = 0; i <= lo_edge; ++i) nodes.push_back(i);
  std::size_t cur = lo_edge;
  while (cur < hi_edge) {
    std::size_t next = cur + 1;
    for (std::size_t j = hi_edge; j > cur + 1; --j)
      if (f[cur] - f[j] < eps) {
        next = j;
        break;
      }
    nodes.push_back(next);
    cur = next;
  }
  for (std::size_t i = std::max(hi_edge, lo_edge) + 1; i < n; ++i) nodes.push_back(i);

  std::vector<double> xs, ys;
  for (std::size_t k : nodes) {
    xs.push_back(grid.point(k));
    ys.push_back(f[k]);
  }
  auto arc = [xs, ys](double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    if (x == xs[k]) return ys[k];
    const double len = xs[k + 1] - xs[k];
    const double v =
        ys[k + 1] + (ys[k] - ys[k + 1]) * 0.5 * (1.0 + std::cos(std::numbers::pi * (x - xs[k]) / len));
    return std::clamp(v, ys[k + 1], ys[k]);
  };

  std::vector<double> g(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k + 1 < nodes.size() && nodes[k + 1] <= i) ++k;
    g[i] = nodes[k] == i ? ys[k] : arc(grid.point(i));
    if (i > 0) g[i] = std::min(g[i], g[i - 1]);
  }

  const bool not_flat = n >= 3 && (f[0] - f[2] > kEdgeFlatness || f[n - 3] - f[n - 1] > kEdgeFlatness);
  return {GridFunction::analytic(grid, std::move(g), FunctionSpec::custom("cosine arcs", arc)),
          std::move(nodes), not_flat};
}

GridFunction approximate_convex(const GridFunction& f, const std::vector<std::size_t>& mesh,
                                double radius) {
  if (f.dim() != 1) throw DomainError("approximate_convex: needs a 1D function");
  if (!(radius >= 0.0)) throw DomainError("approximate_convex: radius must be nonnegative");
  const Grid& grid = f.grid();
  const std::size_t n = grid.size();
  if (mesh.size() < 2 || mesh.front() != 0 || mesh.back() != n - 1)
    throw DomainError("approximate_convex: mesh must contain both endpoints");
  for (std::size_t k = 1; k < mesh.size(); ++k)
    if (mesh[k] <= mesh[k - 1]) throw DomainError("approximate_convex: mesh must be increasing");
  require_member(f, rounding_cone(ConeKind::Convex, f), "approximate_convex");

  std::vector<double> xs, ys, slopes;
  for (std::size_t k : mesh) {
    xs.push_back(grid.point(k));
    ys.push_back(f[k]);
  }
  for (std::size_t k = 0; k + 1 < xs.size(); ++k)
    slopes.push_back((ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]));

  if (radius > 0.0) {
    const double h = grid.spacing();
    if (mesh.size() > 2) {
      if (xs[1] - radius < xs[0] + h || xs[xs.size() - 2] + radius > xs.back() - h)
        throw DomainError("approximate_convex: smoothing radius reaches the first or last grid cell");
    }
    for (std::size_t k = 1; k + 2 < xs.size(); ++k)
      if (xs[k] + radius > xs[k + 1] - radius)
        throw DomainError("approximate_convex: smoothing radii overlap at mesh nodes " +
                          std::to_string(mesh[k]) + " and " + std::to_string(mesh[k + 1]));
  }

  auto eval = [xs, ys, slopes, radius](double x) {
    const std::size_t m = xs.size();
    if (x <= xs.front()) return ys.front() + slopes.front() * (x - xs.front());
    if (x >= xs.back()) return ys.back() + slopes.back() * (x - xs.back());
    if (radius > 0.0) {
      for (std::size_t k = 1; k + 1 < m; ++k) {
        const double left = xs[k] - radius;
        if (x > left && x < xs[k] + radius) {
          const double u = x - left;
          const double base = ys[k] - slopes[k - 1] * radius;
          return base + slopes[k - 1] * u + (slopes[k] - slopes[k - 1]) / (4.0 * radius) * u * u;
        }
      }
    }
    const auto k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    if (x == xs[k]) return ys[k];
    return ys[k] + slopes[k] * (x - xs[k]);
  };

  std::vector<double> g(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k + 1 < mesh.size() && mesh[k + 1] <= i) ++k;
    if (mesh[k] == i && radius == 0.0) {
      g[i] = ys[k];
    } else if (radius == 0.0) {
      const double w = static_cast<double>(i - mesh[k]) / static_cast<double>(mesh[k + 1] - mesh[k]);
      g[i] = ys[k] + w * (ys[k + 1] - ys[k]);
    } else {
      g[i] = eval(grid.point(i));
    }
  }
  return GridFunction::analytic(grid, std::move(g), FunctionSpec::custom("convex interpolant", eval));
}

GridFunction approximate_convex_2d(const GridFunction& f, double radius) {
  if (f.dim() != 2) throw DomainError("approximate_convex_2d: needs a 2D function");
  if (!(radius > 0.0)) throw DomainError("approximate_convex_2d: radius must be positive");
  const Grid& gx = f.grid();
  const Grid& gy = f.grid_y();
  const std::size_t nx = gx.size(), ny = gy.size();
  const double hx = gx.spacing(), hy = gy.spacing();

  const ConeSpec pre = rounding_cone(ConeKind::HessianPSD, f);
  require_member(f, pre, "approximate_convex_2d");
  const double line_tol = pre.tol.absolute;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const bool bad_x = i > 0 && i + 1 < nx &&
                         (f.value(i - 1, j) - 2 * f.value(i, j) + f.value(i + 1, j)) / (hx * hx) < -line_tol;
      const bool bad_y = j > 0 && j + 1 < ny &&
                         (f.value(i, j - 1) - 2 * f.value(i, j) + f.value(i, j + 1)) / (hy * hy) < -line_tol;
      if (bad_x || bad_y)
        throw PreconditionFailure("approximate_convex_2d: input not convex along a grid line",
                                  gx.point(i), gy.point(j));
    }

  const auto kx = static_cast<long>(std::floor(radius / hx));
  const auto ky = static_cast<long>(std::floor(radius / hy));
  struct Tap {
    long dx, dy;
    double w;
  };
  std::vector<Tap> taps;
  double total = 0.0;
  for (long l = -ky; l <= ky; ++l)
    for (long k = -kx; k <= kx; ++k) {
      const double dx = static_cast<double>(k) * hx, dy = static_cast<double>(l) * hy;
      const double s = (dx * dx + dy * dy) / (radius * radius);
      if (s >= 1.0) continue;
      const double w = std::exp(-1.0 / (1.0 - s));
      taps.push_back({k, l, w});
      total += w;
    }
  if (taps.size() < 5) throw DomainError("approximate_convex_2d: radius does not span a grid step");
  for (auto& t : taps) t.w /= total;

  // Values on the lattice padded by (kx, ky). Outside the window they come
  // from the continuation, or from the largest supporting plane of the data.
  const long ex = static_cast<long>(nx) + 2 * kx, ey = static_cast<long>(ny) + 2 * ky;
  std::vector<double> padded(static_cast<std::size_t>(ex * ey));
  struct Plane {
    double x, y, v, gxv, gyv;
  };
  std::vector<Plane> planes;
  if (!f.continuation_2d()) {
    auto d = [&](std::size_t i, std::size_t j, bool along_x) {
      const std::size_t m = along_x ? nx : ny;
      const std::size_t p = along_x ? i : j;
      const double h = along_x ? hx : hy;
      auto v = [&](std::size_t q) { return along_x ? f.value(q, j) : f.value(i, q); };
      if (p == 0) return (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
      if (p == m - 1) return (3 * v(m - 1) - 4 * v(m - 2) + v(m - 3)) / (2 * h);
      return (v(p + 1) - v(p - 1)) / (2 * h);
    };
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        planes.push_back({gx.point(i), gy.point(j), f.value(i, j), d(i, j, true), d(i, j, false)});
  }
  for (long jj = 0; jj < ey; ++jj)
    for (long ii = 0; ii < ex; ++ii) {
      const long i = ii - kx, j = jj - ky;
      double v;
      if (i >= 0 && j >= 0 && i < static_cast<long>(nx) && j < static_cast<long>(ny)) {
        v = f.value(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      } else {
        const double x = gx.a() + static_cast<double>(i) * hx;
        const double y = gy.a() + static_cast<double>(j) * hy;
        if (f.continuation_2d()) {
          v = (*f.continuation_2d())(x, y);
        } else {
          v = -std::numeric_limits<double>::infinity();
          for (const auto& p : planes) v = std::max(v, p.v + p.gxv * (x - p.x) + p.gyv * (y - p.y));
        }
      }
      padded[static_cast<std::size_t>(jj * ex + ii)] = v;
    }

  std::vector<double> out(nx * ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (const auto& t : taps) {
        const long ii = static_cast<long>(i) + kx + t.dx, jj = static_cast<long>(j) + ky + t.dy;
        acc += t.w * padded[static_cast<std::size_t>(jj * ex + ii)];
      }
      out[j * nx + i] = acc;
    }
  return GridFunction(gx, gy, std::move(out), Extension::Unspecified);
}

double lp_norm(const GridFunction& f, double p) {
  if (f.dim() != 1) throw DomainError("lp_norm: needs a 1D function");
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be at least 1");
  const std::size_t n = f.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += w * std::pow(std::abs(f[i]), p);
  }
  return std::pow(acc * f.grid().spacing(), 1.0 / p);
}

LpReport lp_limit_convexity_check(const std::vector<GridFunction>& sequence,
                                  const GridFunction& limit, double p) {
  if (!(p > 1.0)) throw DomainError("lp_limit_convexity_check: p must exceed 1");
  LpReport r{{}, true, false, is_member(limit, ConeSpec::scaled(ConeKind::Convex)), false};
  for (const auto& fk : sequence) {
    if (!same_grid(fk, limit)) throw DomainError("lp_limit_convexity_check: grids differ");
    r.norms.push_back(lp_norm(axpy(-1.0, limit, fk), p));
    r.sequence_convex = r.sequence_convex && is_member(fk, rounding_cone(ConeKind::Convex, fk)).member;
  }
  constexpr double threshold = 1e-8;
  if (!r.norms.empty()) {
    const std::size_t m = r.norms.size();
    const std::size_t start = m >= 2 ? std::min(m / 2, m - 2) : 0;
    bool decreasing = r.norms.size() >= 2;
    for (std::size_t k = start + 1; k < r.norms.size(); ++k)
      decreasing = decreasing && r.norms[k] < r.norms[k - 1];
    r.converging = r.norms.back() <= threshold || decreasing;
  }
  r.passed = r.converging && r.limit_membership.member;
  return r;
}

}  // namespace shapelab
