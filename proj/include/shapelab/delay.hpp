#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "shapelab/perturb.hpp"
#include "shapelab/semigroups.hpp"
#include "shapelab/shape.hpp"

namespace shapelab {

/// One atom of the delay measure: eta_k acting on u(t + lag * span).
struct DelayAtom {
  double lag;  // in [-1, 0]
  std::string name;
  std::function<GridFunction(const GridFunction&)> op;
};

/// u'(t) = B u(t) + sum_k eta_k u(t + lag_k span), with u given on [-span, 0].
/// The history is stored on m + 1 equally spaced times; its last entry is the
/// initial value u(0).
struct DelayProblem {
  SemigroupEvaluator B;
  std::vector<DelayAtom> atoms;
  double span;
  std::vector<GridFunction> history;
  double horizon;
  double p = 2.0;

  void validate() const;
  std::size_t intervals() const { return history.size() - 1; }
  double node_spacing() const { return span / static_cast<double>(intervals()); }
};

/// (u(t), u_t): segment[i] = u(t - span + i * node_spacing), segment.back() == head.
struct DelayState {
  double t;
  GridFunction head;
  std::vector<GridFunction> segment;
};

DelayState initial_state(const DelayProblem& problem);

/// sum_k eta_k(segment(lag_k)), linear in the history variable between nodes.
GridFunction phi_apply(const DelayProblem& problem, const std::vector<GridFunction>& segment);

/// u(t + dt) = e^{dt B} [u + dt/2 Phi u_t] + dt/2 Phi u_{t+dt}. Values of
/// u inside (t, t + dt] that Phi needs come from an Euler predictor; steps
/// longer than the shortest delay are split when the history grid allows.
/// dt must be a multiple of the history spacing.
DelayState step(const DelayProblem& problem, const DelayState& state, double dt);

/// States at t = 0, dt, ..., horizon.
std::vector<DelayState> solve(const DelayProblem& problem, double dt);

using HistorySpec = std::function<FunctionSpec(double s)>;  // s in [-tau, 0]

/// u_t = u_x + c u(t - tau) on the window: LeftShift plus c I at lag -1.
DelayProblem transport_delay(double c, double tau, const Grid& window, const HistorySpec& history,
                             double horizon, std::size_t history_intervals = 64);

/// (eta f)(x) = c f(x + 1/2) on [0, 1/2], c f(x - 1/2) on [1/2, 1], endpoints 0.
GridFunction half_shift(const GridFunction& f, double c);

/// u_t = u_xx + c (half-shifted u(t - tau)) on [0, 1] with u(t, 0) = u(t, 1) = 0.
DelayProblem diffusion_delay(double c, double tau, std::size_t n, const HistorySpec& history, double horizon,
                             std::size_t history_intervals = 64, std::size_t modes = 256);

/// Product-space formulation: the unperturbed semigroup advances the head
/// by e^{sB} and slides the segment, the perturbation is (x, f) -> (Phi f, 0).
DysonOps<DelayState> product_ops(const DelayProblem& problem);

/// Head of the Dyson-Phillips partial sum at time t on the product space.
GridFunction product_dyson_head(const DelayProblem& problem, double t, std::size_t n_terms,
                                std::size_t quad_steps);

Trajectory heads(const std::vector<DelayState>& states);

/// Rows `t,x,value`.
void write_csv(std::ostream& os, const std::vector<DelayState>& states);

}  // namespace shapelab
