#include "shapelab/delay.hpp"

#include <cmath>
#include <memory>
#include <ostream>

#include "shapelab/error.hpp"

namespace shapelab {
namespace {

std::size_t multiple_of(double dt, double d, const char* what) {
  const double k = dt / d;
  const double r = std::round(k);
  if (!(dt > 0.0) || r < 1.0 || std::abs(k - r) > 1e-9 * r)
    throw DomainError(std::string(what) + ": step must be a positive multiple of the history spacing");
  return static_cast<std::size_t>(r);
}

GridFunction lerp(const GridFunction& a, double theta, const GridFunction& b) {
  if (theta == 0.0) return a;
  if (theta == 1.0) return b;
  return axpy(theta, b, scaled(a, 1.0 - theta));
}

// y + a x that keeps y (and its continuation) when the increment vanishes
GridFunction add_scaled(double a, const GridFunction& x, const GridFunction& y) {
  if (a == 0.0 || x.sup_norm() == 0.0) return y;
  return axpy(a, x, y);
}

GridFunction segment_at(const std::vector<GridFunction>& segment, double pos) {
  const double fl = std::floor(pos);
  const auto i = static_cast<std::size_t>(fl);
  if (i + 1 >= segment.size()) return segment.back();
  return lerp(segment[i], pos - fl, segment[i + 1]);
}

double position(const DelayProblem& problem, const DelayAtom& atom) {
  return static_cast<double>(problem.intervals()) * (1.0 + atom.lag);
}

DelayState single_step(const DelayProblem& pr, const DelayState& st, double dt, std::size_t kk) {
  const std::size_t m = pr.intervals();
  const GridFunction phi_now = phi_apply(pr, st.segment);
  const GridFunction base = pr.B.apply(dt, add_scaled(0.5 * dt, phi_now, st.head));

  std::optional<GridFunction> predictor;
  auto value = [&](double pos) {
    const double old = pos + static_cast<double>(kk);
    if (old <= static_cast<double>(m)) return segment_at(st.segment, old);
    if (!predictor) predictor = pr.B.apply(dt, add_scaled(dt, phi_now, st.head));
    return lerp(st.head, (old - static_cast<double>(m)) / static_cast<double>(kk), *predictor);
  };
  GridFunction phi_next = zero_like(st.head);
  for (const auto& atom : pr.atoms) phi_next = axpy(1.0, atom.op(value(position(pr, atom))), phi_next);
  const GridFunction head = add_scaled(0.5 * dt, phi_next, base);

  std::vector<GridFunction> seg;
  seg.reserve(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t old = i + kk;
    seg.push_back(old <= m ? st.segment[old]
                           : lerp(st.head, static_cast<double>(old - m) / static_cast<double>(kk), head));
  }
  seg.push_back(head);
  return {st.t + dt, head, std::move(seg)};
}

}  // namespace

void DelayProblem::validate() const {
  if (!(span > 0.0)) throw DomainError("delay problem: span must be > 0");
  if (history.size() < 2) throw DomainError("delay problem: history needs at least two nodes");
  for (const auto& h : history) {
    if (h.dim() != 1) throw DomainError("delay problem: history must be 1D");
    if (!same_grid(h, history.front())) throw DomainError("delay problem: history grids differ");
  }
  for (const auto& a : atoms) {
    if (!(a.lag >= -1.0 && a.lag <= 0.0)) throw DomainError("delay problem: lag " + std::to_string(a.lag) + " outside [-1, 0]");
    if (!a.op) throw DomainError("delay problem: atom without operator");
  }
  if (!(horizon >= 0.0)) throw DomainError("delay problem: horizon must be >= 0");
  if (!(p > 1.0)) throw DomainError("delay problem: p must be > 1");
}

DelayState initial_state(const DelayProblem& problem) {
  problem.validate();
  return {0.0, problem.history.back(), problem.history};
}

GridFunction phi_apply(const DelayProblem& problem, const std::vector<GridFunction>& segment) {
  if (segment.size() != problem.history.size()) throw DomainError("phi_apply: segment does not cover the lags");
  GridFunction out = zero_like(segment.back());
  for (const auto& atom : problem.atoms) {
    if (!(atom.lag >= -1.0 && atom.lag <= 0.0)) throw DomainError("phi_apply: lag outside the covered window");
    out = axpy(1.0, atom.op(segment_at(segment, position(problem, atom))), out);
  }
  return out;
}

DelayState step(const DelayProblem& problem, const DelayState& state, double dt) {
  if (state.segment.size() != problem.history.size()) throw DomainError("step: state does not match the problem");
  const std::size_t k = multiple_of(dt, problem.node_spacing(), "step");

  // shortest positive delay in history intervals
  double reach = INFINITY;
  for (const auto& a : problem.atoms)
    if (a.lag < 0.0) reach = std::min(reach, -a.lag * static_cast<double>(problem.intervals()));
  std::size_t q = 1;
  while (static_cast<double>(k / q) > reach && q < k) {
    ++q;
    while (k % q != 0) ++q;
  }
  const std::size_t kk = k / q;
  const double sub = dt / static_cast<double>(q);
  DelayState st = state;
  for (std::size_t r = 0; r < q; ++r) st = single_step(problem, st, sub, kk);
  st.t = state.t + dt;
  return st;
}

std::vector<DelayState> solve(const DelayProblem& problem, double dt) {
  std::vector<DelayState> out{initial_state(problem)};
  if (problem.horizon == 0.0) return out;
  if (!(dt > 0.0)) throw DomainError("solve: dt must be > 0");
  const double steps = problem.horizon / dt;
  const double r = std::round(steps);
  if (std::abs(steps - r) > 1e-9 * std::max(1.0, r)) throw DomainError("solve: horizon is not a multiple of dt");
  for (std::size_t i = 0; i < static_cast<std::size_t>(r); ++i) {
    DelayState next = step(problem, out.back(), dt);
    next.t = static_cast<double>(i + 1) * dt;
    out.push_back(std::move(next));
  }
  return out;
}

namespace {

std::vector<GridFunction> sample_history(const HistorySpec& history, double tau, const Grid& grid, std::size_t m) {
  if (m < 1) throw DomainError("history: at least one interval required");
  std::vector<GridFunction> out;
  for (std::size_t i = 0; i <= m; ++i) {
    const double s = i == m ? 0.0 : -tau + tau * static_cast<double>(i) / static_cast<double>(m);
    out.push_back(sample(history(s), grid));
  }
  return out;
}

}  // namespace

DelayProblem transport_delay(double c, double tau, const Grid& window, const HistorySpec& history, double horizon,
                             std::size_t history_intervals) {
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("transport_delay: tau must lie in (0, 1]");
  DelayAtom atom{-1.0, "c*I", [c](const GridFunction& f) { return scaled(f, c); }};
  DelayProblem pr{SemigroupEvaluator::left_shift(), {atom}, tau,
                  sample_history(history, tau, window, history_intervals), horizon};
  pr.validate();
  return pr;
}

GridFunction half_shift(const GridFunction& f, double c) {
  const Grid& g = f.grid();
  if (g.a() != 0.0 || g.b() != 1.0) throw DomainError("half_shift: grid must be [0, 1]");
  std::vector<double> out(g.size());
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double x = g.point(i);
    out[i] = c * (x <= 0.5 ? f.at(x + 0.5) : f.at(x - 0.5));
  }
  return GridFunction(g, std::move(out), Extension::Zero);
}

DelayProblem diffusion_delay(double c, double tau, std::size_t n, const HistorySpec& history, double horizon,
                             std::size_t history_intervals, std::size_t modes) {
  if (!(c > 0.0)) throw DomainError("diffusion_delay: c must be > 0");
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("diffusion_delay: tau must lie in (0, 1]");
  const Grid grid(0.0, 1.0, n);
  DelayAtom atom{-1.0, "half-shift", [c](const GridFunction& f) { return half_shift(f, c); }};
  DelayProblem pr{SemigroupEvaluator::dirichlet_heat(modes), {atom}, tau,
                  sample_history(history, tau, grid, history_intervals), horizon};
  pr.validate();
  return pr;
}

DysonOps<DelayState> product_ops(const DelayProblem& problem) {
  problem.validate();
  const auto shared = std::make_shared<const DelayProblem>(problem);
  auto semigroup = [shared](double s, const DelayState& x) {
    const DelayProblem& pr = *shared;
    if (s == 0.0) return x;
    const std::size_t m = pr.intervals();
    const std::size_t kk = multiple_of(s, pr.node_spacing(), "product semigroup");
    std::vector<GridFunction> fresh;  // e^{j d B} x for j = 1..kk
    for (std::size_t j = 0; j < kk; ++j) fresh.push_back(pr.B.apply(pr.node_spacing(), j == 0 ? x.head : fresh.back()));
    const GridFunction head = pr.B.apply(s, x.head);
    std::vector<GridFunction> seg;
    for (std::size_t i = 0; i < m; ++i) seg.push_back(i + kk <= m ? x.segment[i + kk] : fresh[i + kk - m - 1]);
    seg.push_back(head);
    return DelayState{x.t + s, head, std::move(seg)};
  };
  auto perturbation = [shared](const DelayState& x) {
    const DelayProblem& pr = *shared;
    std::vector<GridFunction> seg;
    for (const auto& f : x.segment) seg.push_back(zero_like(f));
    return DelayState{x.t, phi_apply(pr, x.segment), std::move(seg)};
  };
  auto combine = [](double a, const DelayState& x, const DelayState& y) {
    std::vector<GridFunction> seg;
    for (std::size_t i = 0; i < x.segment.size(); ++i) seg.push_back(axpy(a, x.segment[i], y.segment[i]));
    return DelayState{y.t, axpy(a, x.head, y.head), std::move(seg)};
  };
  return {semigroup, perturbation, combine};
}

GridFunction product_dyson_head(const DelayProblem& problem, double t, std::size_t n_terms, std::size_t quad_steps) {
  const auto ops = product_ops(problem);
  const auto terms = dyson_terms(ops, t, n_terms, quad_steps, initial_state(problem));
  GridFunction sum = terms.front().head;
  for (std::size_t n = 1; n < terms.size(); ++n) sum = axpy(1.0, terms[n].head, sum);
  return sum;
}

Trajectory heads(const std::vector<DelayState>& states) {
  Trajectory out;
  for (const auto& s : states) out.emplace_back(s.t, s.head);
  return out;
}

void write_csv(std::ostream& os, const std::vector<DelayState>& states) {
  const auto old = os.precision(17);
  os << "t,x,value\n";
  for (const auto& s : states)
    for (std::size_t i = 0; i < s.head.size(); ++i) os << s.t << ',' << s.head.grid().point(i) << ',' << s.head[i] << '\n';
  os.precision(old);
}

}  // namespace shapelab
