#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "shapelab/grid.hpp"

namespace shapelab {

enum class ConeKind { MonotoneNonIncreasing, Convex, NegativeConvex, HessianPSD, Positive };

const char* to_string(ConeKind k);

struct TolPolicy {
  double absolute = 1e-9;
  bool curvature_scaled = true;
};

/// A discretized shape cone {f : Sf >= 0} with its tolerance policy.
struct ConeSpec {
  ConeKind kind;
  TolPolicy tol;

  /// absolute 1e-9 floor plus 10 h^2 max|f|
  static ConeSpec scaled(ConeKind kind) { return {kind, {1e-9, true}}; }
  static ConeSpec absolute(ConeKind kind, double tol) { return {kind, {tol, false}}; }
};

struct Witness {
  double x;
  std::optional<double> y;
};

struct MembershipReport {
  bool member;
  double worst_violation;
  std::optional<Witness> witness;  // absent when member
  double tol_used;
};

/// Tolerance the policy yields for f. Positive ignores curvature scaling.
double cone_tolerance(const GridFunction& f, const ConeSpec& cone);

MembershipReport is_member(const GridFunction& f, const ConeSpec& cone);

using Trajectory = std::vector<std::pair<double, GridFunction>>;

struct TrajectoryReport {
  std::vector<std::pair<double, MembershipReport>> rows;
  bool all_member;
};

TrajectoryReport project_witnesses(const Trajectory& trajectory, const ConeSpec& cone);

/// Rows `t,member,worst_violation,witness_x,tol`.
void write_csv(std::ostream& os, const TrajectoryReport& report);

struct MonotoneApproximation {
  GridFunction g;
  std::vector<std::size_t> nodes;  // grid indices where g equals f
  bool edges_not_flat;             // f drops by more than 1e-6 near a window edge
};

/// C^1 non-increasing approximation built from cosine arcs between mesh
/// nodes where f drops by less than eps. Flat beyond the window.
MonotoneApproximation approximate_monotone(const GridFunction& f, double eps);

/// Piecewise-linear interpolant of a convex f at the mesh indices, with an
/// optional quadratic corner blend of half-width radius at interior nodes.
/// Extends linearly beyond the window.
GridFunction approximate_convex(const GridFunction& f, const std::vector<std::size_t>& mesh,
                                double radius);

/// Average of a convex 2D f against a normalized smooth bump of radius r.
GridFunction approximate_convex_2d(const GridFunction& f, double radius);

struct LpReport {
  std::vector<double> norms;  // ||f_k - limit||_p
  bool sequence_convex;
  bool converging;
  MembershipReport limit_membership;
  bool passed;
};

LpReport lp_limit_convexity_check(const std::vector<GridFunction>& sequence,
                                  const GridFunction& limit, double p);

/// Discrete L^p norm of f on its window by the trapezoid rule.
double lp_norm(const GridFunction& f, double p);

}  // namespace shapelab
