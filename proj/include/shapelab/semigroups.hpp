#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include "shapelab/grid.hpp"

namespace shapelab {

enum class SemigroupKind {
  LeftShift,
  GaussWholeLine,
  StoppedBMHalfLine,
  StoppedBMInterval,
  DirichletHeat,
  NeumannHeat,
  CompoundPoisson,
  Multiplication,
  FeynmanKacTransport,
};

const char* to_string(SemigroupKind k);

/// ||T(t)|| <= M e^{omega t}
struct Growth {
  double M = 1.0;
  double omega = 0.0;
};

struct NoParams {};

struct SpectralParams {
  std::size_t modes = 256;
};

/// Jumps of size `jump` at rate `rate`, plus optional Brownian part with
/// variance sigma2 per unit time and drift: T(t)f(x) = E f(x + drift t + ...).
struct PoissonParams {
  double rate = 1.0;
  double jump = 1.0;
  double sigma2 = 0.0;
  double drift = 0.0;
  std::size_t max_terms = 10000;
};

/// beta absent means beta = 0 (the identity semigroup).
struct MultiplicationParams {
  std::optional<GridFunction> beta;
};

struct FeynmanKacParams {
  GridFunction beta;
  double epsilon;
};

using SemigroupParams =
    std::variant<NoParams, SpectralParams, PoissonParams, MultiplicationParams, FeynmanKacParams>;

struct SpectralResult {
  GridFunction value;
  double tail_bound;  // e^{-lambda_N t} ||f||
};

/// t -> e^{tA} acting on grid functions. Immutable and safe to share.
class SemigroupEvaluator {
 public:
  static SemigroupEvaluator left_shift();
  static SemigroupEvaluator gauss_whole_line();
  static SemigroupEvaluator stopped_bm_half_line();
  static SemigroupEvaluator stopped_bm_interval();
  static SemigroupEvaluator dirichlet_heat(std::size_t modes = 256);
  static SemigroupEvaluator neumann_heat(std::size_t modes = 256);
  static SemigroupEvaluator compound_poisson(PoissonParams p);
  static SemigroupEvaluator multiplication(GridFunction beta);
  static SemigroupEvaluator identity();
  static SemigroupEvaluator feynman_kac(GridFunction beta, double epsilon);

  SemigroupKind kind() const { return kind_; }
  const SemigroupParams& params() const { return params_; }
  const Growth& growth() const { return growth_; }
  std::string name() const;

  /// Accuracy of one apply on smooth data, used to scale the semigroup-law checks.
  double backend_tolerance() const;

  /// Backends that evaluate a closed formula pointwise.
  bool exact_formula() const;

  GridFunction apply(double t, const GridFunction& f) const;

  /// Spectral kinds report the truncation bound; others report 0.
  SpectralResult apply_with_diagnostics(double t, const GridFunction& f) const;

 private:
  SemigroupEvaluator(SemigroupKind kind, SemigroupParams params, Growth growth)
      : kind_(kind), params_(std::move(params)), growth_(growth) {}

  SemigroupKind kind_;
  SemigroupParams params_;
  Growth growth_;
};

enum class DifferenceOp { First, Second };
enum class DerivativeSource { Stencil, Exact };

/// sup over interior points of |S e^{tA} f - e^{tA} S f|. With Exact, Sf is
/// the sampled closed-form derivative of f's continuation; with Stencil it is
/// the difference stencil applied to f.
double commutation_defect(const SemigroupEvaluator& ev, double t, const GridFunction& f,
                          DifferenceOp op, DerivativeSource source = DerivativeSource::Stencil);

}  // namespace shapelab
