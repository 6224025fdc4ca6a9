#include "shapelab/perturb.hpp"

#include <ostream>

namespace shapelab {

void PerturbationSpec::validate() const {
  if (!(q_target > 0.0 && q_target < 1.0)) throw DomainError("perturbation: q_target must lie in (0, 1)");
  if (!(t0 > 0.0)) throw DomainError("perturbation: t0 must be > 0");
}

MiyaderaEstimate miyadera_estimate(const SemigroupEvaluator& evA, const PerturbationSpec& pert,
                                   const std::vector<GridFunction>& probes) {
  pert.validate();
  if (probes.empty()) throw DomainError("miyadera_estimate: empty probe set");
  constexpr std::size_t nodes = 64;
  const double dt = pert.t0 / static_cast<double>(nodes - 1);
  MiyaderaEstimate best{0.0, 0};
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const double norm = probes[p].sup_norm();
    if (norm == 0.0) throw DomainError("miyadera_estimate: zero probe");
    double integral = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      const double w = (j == 0 || j + 1 == nodes) ? 0.5 : 1.0;
      const double s = static_cast<double>(j) * dt;
      integral += w * pert.B.apply(evA.apply(s, probes[p])).sup_norm();
    }
    const double q = integral * dt / norm;
    if (q > best.q_hat) best = {q, p};
  }
  return best;
}

DysonState dyson_phillips(const SemigroupEvaluator& evA, const PerturbationSpec& pert, double t,
                          std::size_t n_terms, std::size_t quad_steps, const GridFunction& f,
                          const std::vector<GridFunction>& probes) {
  pert.validate();
  const MiyaderaEstimate q = f.sup_norm() == 0.0 && probes.empty()
                                 ? MiyaderaEstimate{0.0, 0}
                                 : miyadera_estimate(evA, pert, probes.empty() ? std::vector{f} : probes);
  if (q.q_hat >= 1.0)
    throw ConvergenceError("dyson_phillips: empirical Miyadera constant " + std::to_string(q.q_hat) + " >= 1");

  DysonOps<GridFunction> ops{
      [&evA](double s, const GridFunction& g) { return evA.apply(s, g); },
      [&pert](const GridFunction& g) { return pert.B.apply(g); },
      [](double a, const GridFunction& x, const GridFunction& y) { return axpy(a, x, y); }};
  auto terms = dyson_terms(ops, t, n_terms, quad_steps, f);

  DysonState st{{}, terms.front(), {}, {}, 0.0, q};
  for (std::size_t n = 1; n < terms.size(); ++n) st.partial_sum = axpy(1.0, terms[n], st.partial_sum);
  const double factor = q.q_hat / (1.0 - q.q_hat);
  for (const auto& u : terms) {
    st.term_norms.push_back(u.sup_norm());
    st.tail_estimates.push_back(st.term_norms.back() * factor);
  }
  st.tail_estimate = st.tail_estimates.back();
  st.terms = std::move(terms);
  return st;
}

void write_csv(std::ostream& os, const DysonState& state) {
  const auto old = os.precision(17);
  os << "n,term_norm,tail_estimate\n";
  for (std::size_t n = 0; n < state.term_norms.size(); ++n)
    os << n << ',' << state.term_norms[n] << ',' << state.tail_estimates[n] << '\n';
  os.precision(old);
}

}  // namespace shapelab
