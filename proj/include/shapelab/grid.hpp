#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "shapelab/function_spec.hpp"

namespace shapelab {

/// Uniform 1D grid with n points on [a, b]. Point i is exactly a + i*h.
class Grid {
 public:
  Grid(double a, double b, std::size_t n);

  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t size() const { return n_; }
  double spacing() const { return h_; }
  double point(std::size_t i) const { return a_ + static_cast<double>(i) * h_; }
  double last() const { return point(n_ - 1); }
  std::vector<double> points() const;

  /// Grid with 2n-1 points sharing every point of this one.
  Grid refined() const { return Grid(a_, b_, 2 * n_ - 1); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double a_;
  double b_;
  std::size_t n_;
  double h_;
};

/// How a grid function continues outside its window.
enum class Extension {
  Constant,    ///< endpoint values held
  Reflect2f0,  ///< f(x) = 2 f(0) - f(-x) for x < 0 (needs a = 0); constant on the right
  Zero,
  Analytic,  ///< evaluated through an attached FunctionSpec
  Unspecified,
};

const char* to_string(Extension e);

/// Sampled real function on a 1D grid or on a tensor-product 2D grid.
/// Values are immutable and finite. 2D values are stored row-major with x
/// varying fastest: value(i, j) = values[j * nx + i].
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values, Extension ext = Extension::Constant);
  GridFunction(Grid grid_x, Grid grid_y, std::vector<double> values,
               Extension ext = Extension::Constant);

  /// 1D function whose continuation is the given spec everywhere.
  static GridFunction analytic(Grid grid, std::vector<double> values, FunctionSpec continuation);
  static GridFunction analytic(Grid grid_x, Grid grid_y, std::vector<double> values,
                               FunctionSpec2D continuation);

  int dim() const { return grid_y_ ? 2 : 1; }
  const Grid& grid() const { return grid_x_; }
  const Grid& grid_y() const;
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double value(std::size_t i, std::size_t j) const {
    return values_[j * grid_x_.size() + i];
  }
  Extension extension() const { return ext_; }
  const std::optional<FunctionSpec>& continuation() const { return spec_; }
  const std::optional<FunctionSpec2D>& continuation_2d() const { return spec2d_; }

  /// Evaluation anywhere on the line: the continuation when analytic,
  /// linear interpolation inside the window, the extension rule outside.
  double at(double x) const;
  /// Bilinear inside, continuation or clamped value outside.
  double at(double x, double y) const;
  /// Value at lattice index j (may lie outside [0, n)), grid-aligned.
  double at_index(long j) const;

  double sup_norm() const;
  double max() const;
  double min() const;

  /// Same grid, new values. An analytic continuation no longer describes
  /// the new values, so it degrades to Constant.
  GridFunction with_values(std::vector<double> values) const;
  GridFunction with_extension(Extension ext) const;

 private:
  void validate() const;

  Grid grid_x_;
  std::optional<Grid> grid_y_;
  std::vector<double> values_;
  Extension ext_;
  std::optional<FunctionSpec> spec_;
  std::optional<FunctionSpec2D> spec2d_;
};

/// Stencil output with endpoint entries that may be undefined.
struct PartialField {
  Grid grid;
  std::vector<double> values;
  std::vector<bool> defined;
};

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
  double min_eigenvalue() const;
};

struct HessianField {
  Grid grid_x;
  Grid grid_y;
  std::vector<Sym2> entries;  // same layout as 2D values
  std::vector<bool> defined;
  const Sym2& at(std::size_t i, std::size_t j) const { return entries[j * grid_x.size() + i]; }
  bool is_defined(std::size_t i, std::size_t j) const { return defined[j * grid_x.size() + i]; }
};

GridFunction sample(const FunctionSpec& spec, const Grid& grid);
GridFunction sample(const FunctionSpec2D& spec, const Grid& grid_x, const Grid& grid_y);

/// Central differences inside, one-sided second-order differences at both
/// ends. Analytic inputs carry the central stencil of their continuation.
GridFunction first_difference(const GridFunction& f);

/// (f(x-h) - 2 f(x) + f(x+h)) / h^2; endpoint entries use the extension and
/// are undefined when the extension is Unspecified.
PartialField second_difference(const GridFunction& f);

HessianField hessian(const GridFunction& f);

/// Integral over [lo, hi] of the piecewise-linear interpolant, with the
/// extension rule supplying values outside the window. Rejects lo > hi.
double trapezoid(const GridFunction& f, double lo, double hi);

/// max_i |f_i - g_i| on identical grids.
double sup_distance(const GridFunction& f, const GridFunction& g);

bool same_grid(const GridFunction& f, const GridFunction& g);

/// a*x + y on identical grids. The result keeps a shared non-analytic
/// extension; mixed or analytic inputs fall back to Constant.
GridFunction axpy(double a, const GridFunction& x, const GridFunction& y);
GridFunction scaled(const GridFunction& f, double a);
GridFunction zero_like(const GridFunction& f);

/// CSV with header `x,value` (1D) or `x,y,value` (2D), 17 significant digits.
void write_csv(std::ostream& os, const GridFunction& f);

}  // namespace shapelab
