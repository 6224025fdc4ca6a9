#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "shapelab/compose.hpp"
#include "shapelab/error.hpp"
#include "shapelab/semigroups.hpp"

namespace shapelab {

/// Linear structure needed to run the Dyson-Phillips recursion on a state
/// space: the unperturbed semigroup, the perturbation, and a*x + y.
template <class State>
struct DysonOps {
  std::function<State(double, const State&)> semigroup;
  std::function<State(const State&)> perturbation;
  std::function<State(double, const State&, const State&)> axpy;
};

/// Terms U_0(t)f, ..., U_{n_terms-1}(t)f of the Dyson-Phillips series
///   U_n(t) = int_0^t T(t - s) B U_{n-1}(s) ds
/// on quad_steps trapezoid panels. Each term is propagated node to node:
///   U_n(s + d) = T(d) [U_n(s) + d/2 B U_{n-1}(s)] + d/2 B U_{n-1}(s + d),
/// so the whole table costs O(n_terms quad_steps) semigroup steps.
template <class State>
std::vector<State> dyson_terms(const DysonOps<State>& ops, double t, std::size_t n_terms,
                               std::size_t quad_steps, const State& f) {
  if (!(t >= 0.0)) throw DomainError("dyson: t must be >= 0");
  if (n_terms < 1) throw DomainError("dyson: n_terms must be >= 1");
  if (quad_steps < 4) throw DomainError("dyson: quad_steps must be >= 4");
  const double d = t / static_cast<double>(quad_steps);

  std::vector<State> prev;  // U_{n-1} at every node
  prev.reserve(quad_steps + 1);
  prev.push_back(f);
  for (std::size_t j = 0; j < quad_steps; ++j) prev.push_back(ops.semigroup(d, prev.back()));

  std::vector<State> terms{ops.semigroup(t, f)};
  for (std::size_t n = 1; n < n_terms; ++n) {
    std::vector<State> Bprev;
    Bprev.reserve(prev.size());
    for (const auto& u : prev) Bprev.push_back(ops.perturbation(u));
    std::vector<State> cur;
    cur.reserve(prev.size());
    cur.push_back(ops.axpy(-1.0, f, f));
    for (std::size_t j = 0; j < quad_steps; ++j) {
      const State inner = ops.axpy(0.5 * d, Bprev[j], cur.back());
      cur.push_back(ops.axpy(0.5 * d, Bprev[j + 1], ops.semigroup(d, inner)));
    }
    terms.push_back(cur.back());
    prev = std::move(cur);
  }
  return terms;
}

struct PerturbationSpec {
  BoundedOperator B;
  double q_target = 0.5;
  double t0 = 1.0;

  void validate() const;
};

struct MiyaderaEstimate {
  double q_hat;  // empirical: a lower estimate over the probe set
  std::size_t probe_index;
};

/// max over probes of int_0^{t0} ||B e^{tA} p|| dt / ||p|| by the trapezoid
/// rule on 64 nodes.
MiyaderaEstimate miyadera_estimate(const SemigroupEvaluator& evA, const PerturbationSpec& pert,
                                   const std::vector<GridFunction>& probes);

struct DysonState {
  std::vector<GridFunction> terms;
  GridFunction partial_sum;
  std::vector<double> term_norms;
  std::vector<double> tail_estimates;  // ||U_n|| q/(1-q) after term n
  double tail_estimate;
  MiyaderaEstimate q;
};

/// Dyson-Phillips partial sum of e^{t(A+B)} f. q-hat comes from the probes,
/// or from f alone when none are given. Throws ConvergenceError when q-hat >= 1.
DysonState dyson_phillips(const SemigroupEvaluator& evA, const PerturbationSpec& pert, double t,
                          std::size_t n_terms, std::size_t quad_steps, const GridFunction& f,
                          const std::vector<GridFunction>& probes = {});

/// Rows `n,term_norm,tail_estimate`.
void write_csv(std::ostream& os, const DysonState& state);

}  // namespace shapelab
