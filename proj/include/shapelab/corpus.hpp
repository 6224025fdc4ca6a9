#pragma once

#include <random>

#include "shapelab/grid.hpp"

namespace shapelab::corpus {

using Rng = std::mt19937_64;

/// offset + sum_j a_j (1 - tanh((x - c_j) / w_j)) / 2 with a_j in (0, amplitude],
/// c_j in [center_lo, center_hi], w_j in [width_lo, width_hi]: non-increasing.
struct SigmoidOptions {
  double center_lo = -3.0;
  double center_hi = 3.0;
  double width_lo = 0.3;
  double width_hi = 1.0;
  int max_terms = 4;
  double amplitude = 1.0;
  double offset_lo = 0.0;
  double offset_hi = 0.0;
};

FunctionSpec monotone_sigmoids(Rng& rng, const SigmoidOptions& opt);

/// Convex piecewise-linear function on [a, b] with sorted random slopes in
/// [slope_lo, slope_hi] at random knots, corners rounded by softplus of
/// width `smoothing` (0 keeps the corners).
struct ConvexOptions {
  double slope_lo = -2.0;
  double slope_hi = 2.0;
  int min_knots = 3;
  int max_knots = 7;
  double smoothing = 0.05;
};

FunctionSpec convex_slopes(Rng& rng, double a, double b, const ConvexOptions& opt);

/// convex_slopes shifted so that its maximum on [a, b] is -U(0, 1].
FunctionSpec negative_convex(Rng& rng, double a, double b, const ConvexOptions& opt);

/// Cumulative negative increments on the grid: each step drops by
/// U(0, max_drop) with probability 1 - flat_fraction. The two cells at each
/// end are flat.
GridFunction monotone_increments(Rng& rng, const Grid& grid, double max_drop = 0.05,
                                 double flat_fraction = 0.3);

}  // namespace shapelab::corpus
