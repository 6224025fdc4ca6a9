#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shapelab/semigroups.hpp"
#include "shapelab/shape.hpp"

namespace shapelab {

/// dt, f -> e^{dt X} f for some generator X.
using Propagator = std::function<GridFunction(double, const GridFunction&)>;

Propagator propagator(const SemigroupEvaluator& ev);

enum class SplitKind { Lie, Strang };

const char* to_string(SplitKind k);

struct SplittingScheme {
  SplitKind kind = SplitKind::Lie;
  std::size_t n_steps = 1;
};

/// Called after every sub-application: step in [0, n), substep in order of
/// application within the step.
using SplitObserver = std::function<void(std::size_t step, int substep, const GridFunction& state)>;

struct SplitOptions {
  /// Lie factors apply B first, then A, as the product e^{dt A} e^{dt B}
  /// acts on f. With transpose the A step comes first.
  bool transpose = false;
  SplitObserver observer;
};

GridFunction lie_product(const Propagator& A, const Propagator& B, double t, std::size_t n,
                         const GridFunction& f, const SplitOptions& opt = {});
/// (e^{dt/2 B} e^{dt A} e^{dt/2 B})^n f
GridFunction strang_product(const Propagator& A, const Propagator& B, double t, std::size_t n,
                            const GridFunction& f, const SplitOptions& opt = {});

GridFunction lie_split(const SemigroupEvaluator& evA, const SemigroupEvaluator& evB, double t,
                       std::size_t n, const GridFunction& f, const SplitOptions& opt = {});
GridFunction strang_split(const SemigroupEvaluator& evA, const SemigroupEvaluator& evB, double t,
                          std::size_t n, const GridFunction& f, const SplitOptions& opt = {});
GridFunction split(const SplittingScheme& scheme, const SemigroupEvaluator& evA,
                   const SemigroupEvaluator& evB, double t, const GridFunction& f,
                   const SplitOptions& opt = {});

struct OrderRow {
  std::size_t n;
  double error;
  std::optional<double> estimated_order;  // absent on the first row and below the noise floor
};

struct OrderTable {
  std::vector<OrderRow> rows;
  std::optional<double> min_order() const;
  std::optional<double> max_order() const;
};

/// Errors of solve(n) against the reference and log-ratio order estimates
/// between consecutive rows. Ratios whose finer error is below 100 eps are
/// skipped.
OrderTable order_table(const std::function<GridFunction(std::size_t)>& solve,
                       const std::vector<std::size_t>& ns, const GridFunction& reference);

/// Rows `n,error,estimated_order`; a skipped estimate is an empty field.
void write_csv(std::ostream& os, const OrderTable& table);

/// Operator on grid functions with a sup-norm bound. Immutable; copies share
/// the implementation.
class BoundedOperator {
 public:
  enum class Kind { Zero, Multiplication, Shift, Sum, Compose, Custom };

  static BoundedOperator zero();
  /// (Bf)(x) = beta(x) f(x); beta is held constant beyond its window.
  static BoundedOperator multiplication(GridFunction beta);
  /// (Bf)(x) = scale * f(x + offset)
  static BoundedOperator shift(double offset, double scale = 1.0);
  static BoundedOperator sum(const BoundedOperator& a, const BoundedOperator& b);
  /// a after b
  static BoundedOperator compose(const BoundedOperator& a, const BoundedOperator& b);
  static BoundedOperator custom(std::string name, std::function<GridFunction(const GridFunction&)> fn,
                                double norm_bound);

  Kind kind() const;
  const std::string& name() const;
  double norm_bound() const;
  GridFunction apply(const GridFunction& f) const;
  BoundedOperator scaled(double a) const;

 private:
  struct Impl;
  explicit BoundedOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct SeriesResult {
  GridFunction value;
  std::size_t terms;
};

/// sum_k (tB)^k f / k!, stopped once a term's sup norm is below 1e-15.
/// Throws ConvergenceError after max_terms terms.
SeriesResult series_exponential(const BoundedOperator& B, double t, const GridFunction& f,
                                std::size_t max_terms = 500);

/// Lie product of evA with the series-evaluated e^{(t/n) B}.
GridFunction bounded_perturbation(const SemigroupEvaluator& evA, const BoundedOperator& B, double t,
                                  std::size_t n, const GridFunction& f, const SplitOptions& opt = {});

/// V(h) with ||V(h)^n|| <= M e^{h n omega}.
struct ChernoffFamily {
  std::string name;
  std::function<GridFunction(double, const GridFunction&)> V;
  Growth stability;
};

ChernoffFamily exact_family(const SemigroupEvaluator& ev);
/// V(h) = I + h D with D the three-point Laplacian; endpoint values frozen.
ChernoffFamily euler_laplacian_family();
/// V(h) = e^{hB} by its power series.
ChernoffFamily series_family(const BoundedOperator& B);

/// V(t/n) applied n times.
GridFunction chernoff_iterate(const ChernoffFamily& fam, double t, std::size_t n, const GridFunction& f);

struct TrotterKatoRow {
  std::size_t corpus_index;
  std::vector<double> errors;  // per sequence member
  std::vector<bool> members;   // per sequence member
  bool limit_member;
  bool errors_decreasing;
};

struct TrotterKatoReport {
  Growth uniform_growth;  // max M and omega over the sequence and the limit
  std::vector<TrotterKatoRow> rows;
  std::size_t skipped;  // corpus members outside the cone
  bool all_member;
  bool all_decreasing;
};

TrotterKatoReport trotter_kato_probe(const std::vector<SemigroupEvaluator>& seq,
                                     const SemigroupEvaluator& limit, const ConeSpec& cone, double t,
                                     const std::vector<GridFunction>& corpus);

}  // namespace shapelab
