#include "shapelab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "shapelab/error.hpp"

namespace shapelab {
namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_1d(const GridFunction& f, const char* op) {
  if (f.dim() != 1) throw DomainError(std::string(op) + ": unsupported dimension (needs 1D)");
}

// Integral over [lo, hi] of the interpolant through the lattice values
// at_index(k), which continues the grid past either end.
double integrate_lattice(const GridFunction& f, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const Grid& g = f.grid();
  const double h = g.spacing();
  const auto k0 = static_cast<long>(std::floor((lo - g.a()) / h));
  const auto k1 = static_cast<long>(std::floor((hi - g.a()) / h));
  double acc = 0.0;
  for (long k = k0; k <= k1; ++k) {
    const double x0 = g.a() + static_cast<double>(k) * h;
    const double l = std::max(lo, x0), r = std::min(hi, x0 + h);
    if (!(r > l)) continue;
    const double v0 = f.at_index(k), v1 = f.at_index(k + 1);
    const double wl = (l - x0) / h, wr = (r - x0) / h;
    acc += 0.5 * (r - l) * ((v0 + wl * (v1 - v0)) + (v0 + wr * (v1 - v0)));
  }
  return acc;
}

// Integral of the piecewise-linear interpolant over [lo, hi] inside the window.
double integrate_inside(const GridFunction& f, double lo, double hi) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  const std::size_t n = g.size();
  auto cell = [&](double x) {
    auto k = static_cast<std::size_t>(std::floor((x - g.a()) / h));
    return std::min<std::size_t>(k, n - 2);
  };
  auto interp = [&](std::size_t k, double x) {
    const double w = (x - g.point(k)) / h;
    return f[k] + w * (f[k + 1] - f[k]);
  };
  const std::size_t k0 = cell(lo);
  const std::size_t k1 = cell(hi);
  if (k0 == k1) return 0.5 * (hi - lo) * (interp(k0, lo) + interp(k0, hi));
  double acc = 0.5 * (g.point(k0 + 1) - lo) * (interp(k0, lo) + f[k0 + 1]);
  for (std::size_t k = k0 + 1; k < k1; ++k) acc += 0.5 * h * (f[k] + f[k + 1]);
  acc += 0.5 * (hi - g.point(k1)) * (f[k1] + interp(k1, hi));
  return acc;
}

}  // namespace

Grid::Grid(double a, double b, std::size_t n) : a_(a), b_(b), n_(n), h_(0.0) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a))
    throw DomainError("grid needs finite endpoints with b > a");
  if (n < 3) throw DomainError("grid needs at least 3 points");
  h_ = (b - a) / static_cast<double>(n - 1);
}

std::vector<double> Grid::points() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = point(i);
  return xs;
}

const char* to_string(Extension e) {
  switch (e) {
    case Extension::Constant: return "constant";
    case Extension::Reflect2f0: return "reflect2f0";
    case Extension::Zero: return "zero";
    case Extension::Analytic: return "analytic";
    case Extension::Unspecified: return "unspecified";
  }
  return "?";
}

GridFunction::GridFunction(Grid grid, std::vector<double> values, Extension ext)
    : grid_x_(grid), values_(std::move(values)), ext_(ext) {
  if (ext == Extension::Analytic)
    throw DomainError("analytic extension needs a continuation; use GridFunction::analytic");
  validate();
}

GridFunction::GridFunction(Grid grid_x, Grid grid_y, std::vector<double> values, Extension ext)
    : grid_x_(grid_x), grid_y_(grid_y), values_(std::move(values)), ext_(ext) {
  if (ext == Extension::Analytic)
    throw DomainError("analytic extension needs a continuation; use GridFunction::analytic");
  if (ext == Extension::Reflect2f0) throw DomainError("reflect2f0 extension is 1D only");
  validate();
}

GridFunction GridFunction::analytic(Grid grid, std::vector<double> values,
                                    FunctionSpec continuation) {
  GridFunction f(grid, std::move(values), Extension::Constant);
  f.ext_ = Extension::Analytic;
  f.spec_ = std::move(continuation);
  return f;
}

GridFunction GridFunction::analytic(Grid grid_x, Grid grid_y, std::vector<double> values,
                                    FunctionSpec2D continuation) {
  GridFunction f(grid_x, grid_y, std::move(values), Extension::Constant);
  f.ext_ = Extension::Analytic;
  f.spec2d_ = std::move(continuation);
  return f;
}

void GridFunction::validate() const {
  const std::size_t expected = grid_x_.size() * (grid_y_ ? grid_y_->size() : 1);
  if (values_.size() != expected)
    throw DomainError("grid function has " + std::to_string(values_.size()) +
                      " values, grid needs " + std::to_string(expected));
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw DomainError("grid function value " + std::to_string(i) + " is not finite");
  if (ext_ == Extension::Reflect2f0 && grid_x_.a() != 0.0)
    throw DomainError("reflect2f0 extension requires the window to start at 0");
}

const Grid& GridFunction::grid_y() const {
  if (!grid_y_) throw DomainError("1D grid function has no y grid");
  return *grid_y_;
}

double GridFunction::at(double x) const {
  if (dim() != 1) throw DomainError("at(x) on a 2D grid function");
  if (ext_ == Extension::Analytic) return (*spec_)(x);
  const Grid& g = grid_x_;
  const std::size_t n = g.size();
  if (x < g.a()) {
    switch (ext_) {
      case Extension::Constant: return values_.front();
      case Extension::Zero: return 0.0;
      case Extension::Reflect2f0: return 2.0 * values_.front() - at(-x);
      default: throw DomainError("evaluation left of the window needs an extension");
    }
  }
  if (x > g.last()) {
    switch (ext_) {
      case Extension::Constant:
      case Extension::Reflect2f0: return values_.back();
      case Extension::Zero: return 0.0;
      default: throw DomainError("evaluation right of the window needs an extension");
    }
  }
  const double s = (x - g.a()) / g.spacing();
  auto k = static_cast<std::size_t>(std::floor(s));
  if (k >= n - 1) return values_.back();
  const double w = s - static_cast<double>(k);
  if (w == 0.0) return values_[k];
  return values_[k] + w * (values_[k + 1] - values_[k]);
}

double GridFunction::at(double x, double y) const {
  if (dim() != 2) throw DomainError("at(x, y) on a 1D grid function");
  if (ext_ == Extension::Analytic) return (*spec2d_)(x, y);
  const Grid& gx = grid_x_;
  const Grid& gy = *grid_y_;
  const bool outside = x < gx.a() || x > gx.last() || y < gy.a() || y > gy.last();
  if (outside) {
    if (ext_ == Extension::Zero) return 0.0;
    if (ext_ != Extension::Constant) throw DomainError("evaluation outside a 2D window");
  }
  const double sx = std::clamp((x - gx.a()) / gx.spacing(), 0.0, double(gx.size() - 1));
  const double sy = std::clamp((y - gy.a()) / gy.spacing(), 0.0, double(gy.size() - 1));
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(sx), gx.size() - 2);
  const auto j = std::min<std::size_t>(static_cast<std::size_t>(sy), gy.size() - 2);
  const double u = sx - double(i), v = sy - double(j);
  return (1 - u) * (1 - v) * value(i, j) + u * (1 - v) * value(i + 1, j) +
         (1 - u) * v * value(i, j + 1) + u * v * value(i + 1, j + 1);
}

double GridFunction::at_index(long j) const {
  const long n = static_cast<long>(grid_x_.size());
  if (j >= 0 && j < n) return values_[static_cast<std::size_t>(j)];
  if (j < 0 && ext_ == Extension::Reflect2f0) return 2.0 * values_.front() - at_index(-j);
  return at(grid_x_.a() + static_cast<double>(j) * grid_x_.spacing());
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

GridFunction GridFunction::with_values(std::vector<double> values) const {
  const Extension ext = ext_ == Extension::Analytic ? Extension::Constant : ext_;
  if (grid_y_) return GridFunction(grid_x_, *grid_y_, std::move(values), ext);
  return GridFunction(grid_x_, std::move(values), ext);
}

GridFunction GridFunction::with_extension(Extension ext) const {
  if (ext == Extension::Analytic && ext_ != Extension::Analytic)
    throw DomainError("cannot attach an analytic extension without a continuation");
  GridFunction f = *this;
  f.ext_ = ext;
  if (ext != Extension::Analytic) {
    f.spec_.reset();
    f.spec2d_.reset();
  }
  f.validate();
  return f;
}

double Sym2::min_eigenvalue() const {
  const double mean = 0.5 * (xx + yy);
  const double half_gap = std::hypot(0.5 * (xx - yy), xy);
  return mean - half_gap;
}

GridFunction sample(const FunctionSpec& spec, const Grid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i);
    v[i] = spec(x);
    if (!std::isfinite(v[i]))
      throw DomainError("sample: " + spec.describe() + " is not finite at x = " + fmt17(x));
  }
  return GridFunction::analytic(grid, std::move(v), spec);
}

GridFunction sample(const FunctionSpec2D& spec, const Grid& grid_x, const Grid& grid_y) {
  std::vector<double> v(grid_x.size() * grid_y.size());
  for (std::size_t j = 0; j < grid_y.size(); ++j)
    for (std::size_t i = 0; i < grid_x.size(); ++i) {
      const double x = grid_x.point(i), y = grid_y.point(j);
      const double val = spec(x, y);
      if (!std::isfinite(val))
        throw DomainError("sample: " + spec.name() + " is not finite at (" + fmt17(x) + ", " +
                          fmt17(y) + ")");
      v[j * grid_x.size() + i] = val;
    }
  return GridFunction::analytic(grid_x, grid_y, std::move(v), spec);
}

GridFunction first_difference(const GridFunction& f) {
  require_1d(f, "first_difference");
  const Grid& g = f.grid();
  const std::size_t n = g.size();
  const double h = g.spacing();
  std::vector<double> d(n);
  // differences first: exact zero on constants, correct sign on monotone data
  d[0] = (3.0 * (f[1] - f[0]) - (f[2] - f[1])) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * (f[n - 1] - f[n - 2]) - (f[n - 2] - f[n - 3])) / (2.0 * h);
  if (f.extension() == Extension::Analytic) {
    const FunctionSpec spec = *f.continuation();
    return GridFunction::analytic(
        g, std::move(d), FunctionSpec::custom("central difference", [spec, h](double x) {
          return (spec(x + h) - spec(x - h)) / (2.0 * h);
        }));
  }
  return GridFunction(g, std::move(d), Extension::Unspecified);
}

PartialField second_difference(const GridFunction& f) {
  require_1d(f, "second_difference");
  const Grid& g = f.grid();
  const std::size_t n = g.size();
  const double h2 = g.spacing() * g.spacing();
  PartialField out{g, std::vector<double>(n, 0.0), std::vector<bool>(n, true)};
  for (std::size_t i = 1; i + 1 < n; ++i) out.values[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / h2;
  if (f.extension() == Extension::Unspecified) {
    out.defined.front() = false;
    out.defined.back() = false;
  } else {
    out.values[0] = (f.at_index(-1) - 2.0 * f[0] + f[1]) / h2;
    out.values[n - 1] = (f[n - 2] - 2.0 * f[n - 1] + f.at_index(static_cast<long>(n))) / h2;
  }
  return out;
}

HessianField hessian(const GridFunction& f) {
  if (f.dim() != 2) throw DomainError("hessian: unsupported dimension (needs 2D)");
  const Grid& gx = f.grid();
  const Grid& gy = f.grid_y();
  const std::size_t nx = gx.size(), ny = gy.size();
  const double hx = gx.spacing(), hy = gy.spacing();
  HessianField out{gx, gy, std::vector<Sym2>(nx * ny), std::vector<bool>(nx * ny, false)};
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      Sym2 m;
      m.xx = (f.value(i - 1, j) - 2.0 * f.value(i, j) + f.value(i + 1, j)) / (hx * hx);
      m.yy = (f.value(i, j - 1) - 2.0 * f.value(i, j) + f.value(i, j + 1)) / (hy * hy);
      m.xy = (f.value(i + 1, j + 1) - f.value(i + 1, j - 1) - f.value(i - 1, j + 1) +
              f.value(i - 1, j - 1)) /
             (4.0 * hx * hy);
      out.entries[j * nx + i] = m;
      out.defined[j * nx + i] = true;
    }
  return out;
}

double trapezoid(const GridFunction& f, double lo, double hi) {
  require_1d(f, "trapezoid");
  if (!(lo <= hi)) throw DomainError("trapezoid: lower limit exceeds upper limit");
  const Grid& g = f.grid();
  const double a = g.a(), last = g.last();
  double acc = 0.0;

  if (lo < a) {
    const double end = std::min(hi, a);
    switch (f.extension()) {
      case Extension::Constant: acc += f[0] * (end - lo); break;
      case Extension::Zero: break;
      case Extension::Analytic:
        acc += integrate_lattice(f, lo, end);
        break;
      case Extension::Reflect2f0:
        // f(x) = 2 f(0) - f(-x) on [lo, end] with end <= 0
        acc += 2.0 * f[0] * (end - lo) - trapezoid(f, -end, -lo);
        break;
      case Extension::Unspecified:
        throw DomainError("trapezoid: interval leaves the window and no extension is declared");
    }
  }
  const double in_lo = std::max(lo, a), in_hi = std::min(hi, last);
  if (in_lo < in_hi) acc += integrate_inside(f, in_lo, in_hi);
  if (hi > last) {
    const double start = std::max(lo, last);
    switch (f.extension()) {
      case Extension::Constant:
      case Extension::Reflect2f0: acc += f[g.size() - 1] * (hi - start); break;
      case Extension::Zero: break;
      case Extension::Analytic:
        acc += integrate_lattice(f, start, hi);
        break;
      case Extension::Unspecified:
        throw DomainError("trapezoid: interval leaves the window and no extension is declared");
    }
  }
  return acc;
}

bool same_grid(const GridFunction& f, const GridFunction& g) {
  if (f.dim() != g.dim() || !(f.grid() == g.grid())) return false;
  return f.dim() == 1 || f.grid_y() == g.grid_y();
}

double sup_distance(const GridFunction& f, const GridFunction& g) {
  if (!same_grid(f, g)) throw DomainError("sup_distance: grid mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g[i]));
  return m;
}

GridFunction axpy(double a, const GridFunction& x, const GridFunction& y) {
  if (!same_grid(x, y)) throw DomainError("axpy: grid mismatch");
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * x[i] + y[i];
  Extension ext = Extension::Constant;
  if (x.extension() == y.extension() && x.extension() != Extension::Analytic)
    ext = x.extension();
  if (x.dim() == 2) return GridFunction(x.grid(), x.grid_y(), std::move(v), ext);
  return GridFunction(x.grid(), std::move(v), ext);
}

GridFunction scaled(const GridFunction& f, double a) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& e : v) e *= a;
  return f.with_values(std::move(v));
}

GridFunction zero_like(const GridFunction& f) {
  return f.with_values(std::vector<double>(f.size(), 0.0));
}

void write_csv(std::ostream& os, const GridFunction& f) {
  if (f.dim() == 1) {
    os << "x,value\n";
    for (std::size_t i = 0; i < f.size(); ++i)
      os << fmt17(f.grid().point(i)) << ',' << fmt17(f[i]) << '\n';
    return;
  }
  os << "x,y,value\n";
  for (std::size_t j = 0; j < f.grid_y().size(); ++j)
    for (std::size_t i = 0; i < f.grid().size(); ++i)
      os << fmt17(f.grid().point(i)) << ',' << fmt17(f.grid_y().point(j)) << ','
         << fmt17(f.value(i, j)) << '\n';
}

}  // namespace shapelab
