#include "shapelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "shapelab/compose.hpp"
#include "shapelab/corpus.hpp"
#include "shapelab/delay.hpp"
#include "shapelab/error.hpp"
#include "shapelab/perturb.hpp"

namespace shapelab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Informational: return "informational";
  }
  return "?";
}

int exit_code(Verdict v) { return v == Verdict::Fail ? 1 : 0; }

namespace {

using std::numbers::pi;
using Rng = corpus::Rng;

struct Table {
  std::string stem;
  std::ostringstream os;

  Table(std::string name, const char* header) : stem(std::move(name)) {
    os.precision(17);
    os << header << '\n';
  }
  template <class... T>
  void row(const T&... cells) {
    std::size_t k = 0;
    ((os << (k++ ? "," : "") << cells), ...);
    os << '\n';
  }
};

struct Builder {
  ExperimentReport rep;
  void add(Table& t) { rep.tables.emplace_back(t.stem, t.os.str()); }
  void note(std::string s) { rep.notes.push_back(std::move(s)); }
  ExperimentReport done(bool pass) {
    rep.verdict = pass ? Verdict::Pass : Verdict::Fail;
    return std::move(rep);
  }
  ExperimentReport informational() {
    rep.verdict = Verdict::Informational;
    return std::move(rep);
  }
};

std::vector<double> reals(const Json& j) { return j.get<std::vector<double>>(); }
std::size_t count(const Json& p, const char* key) { return p.at(key).get<std::size_t>(); }
double real(const Json& p, const char* key) { return p.at(key).get<double>(); }

Grid window(const Json& p) { return Grid(real(p, "a"), real(p, "b"), count(p, "n")); }

corpus::SigmoidOptions centred(const Grid& g, double width_lo, double width_hi) {
  corpus::SigmoidOptions opt;
  const double mid = 0.5 * (g.a() + g.b()), half = 0.5 * (g.b() - g.a());
  opt.center_lo = mid - 0.3 * half;
  opt.center_hi = mid + 0.3 * half;
  opt.width_lo = width_lo;
  opt.width_hi = width_hi;
  return opt;
}

std::vector<GridFunction> monotone_corpus(Rng& rng, const Grid& g, std::size_t n, corpus::SigmoidOptions opt) {
  std::vector<GridFunction> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(sample(corpus::monotone_sigmoids(rng, opt), g));
  return out;
}

// positive part of the cone: needed when multiplication weights are involved
corpus::SigmoidOptions nonneg(corpus::SigmoidOptions opt) {
  opt.offset_lo = 0.1;
  opt.offset_hi = 1.0;
  return opt;
}

GridFunction feynman_kac_beta(const Grid& g) { return sample(FunctionSpec::tanh(0.0, -0.5, 0.5, 0.0), g); }

struct Membership {
  bool all = true;
  std::size_t failures = 0;
};

void record(Table& t, Membership& m, const std::string& label, double time, std::size_t index,
            const GridFunction& img, const ConeSpec& cone) {
  const auto r = is_member(img, cone);
  if (!r.member) {
    m.all = false;
    ++m.failures;
  }
  t.row(label, time, index, r.member ? 1 : 0, r.worst_violation, r.witness ? r.witness->x : NAN);
}

constexpr const char* kMemberHeader = "evaluator,t,index,member,worst_violation,witness_x";

ExperimentReport catalogue_membership(const Json& p, std::uint64_t seed,
                                      const std::vector<std::pair<std::string, SemigroupEvaluator>>& evs,
                                      const Grid& g, const std::vector<GridFunction>& data, const ConeSpec& cone) {
  (void)seed;
  Builder b;
  Table t("membership", kMemberHeader);
  Membership m;
  for (const auto& [label, ev] : evs)
    for (double time : reals(p.at("times")))
      for (std::size_t i = 0; i < data.size(); ++i) record(t, m, label, time, i, ev.apply(time, data[i]), cone);
  b.add(t);
  b.rep.metrics["images"] = evs.size() * reals(p.at("times")).size() * data.size();
  b.rep.metrics["failures"] = m.failures;
  b.rep.metrics["grid_points"] = g.size();
  return b.done(m.all);
}

ExperimentReport monotone_levy(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  const Grid g = window(p);
  const auto data = monotone_corpus(rng, g, count(p, "count"), centred(g, real(p, "width_lo"), real(p, "width_hi")));
  std::vector<std::pair<std::string, SemigroupEvaluator>> evs{{"left-shift", SemigroupEvaluator::left_shift()},
                                                              {"gauss", SemigroupEvaluator::gauss_whole_line()}};
  for (double rate : reals(p.at("rates"))) {
    PoissonParams pp{rate, real(p, "jump"), real(p, "sigma2"), real(p, "drift")};
    evs.emplace_back("compound-poisson[" + std::to_string(rate) + "]", SemigroupEvaluator::compound_poisson(pp));
  }
  return catalogue_membership(p, seed, evs, g, data, ConeSpec::scaled(ConeKind::MonotoneNonIncreasing));
}

ExperimentReport stopped_bm_halfline(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  const Grid g(0.0, real(p, "length"), count(p, "n"));
  const auto data = monotone_corpus(rng, g, count(p, "count"), centred(g, real(p, "width_lo"), real(p, "width_hi")));
  return catalogue_membership(p, seed, {{"stopped-bm-half-line", SemigroupEvaluator::stopped_bm_half_line()}}, g,
                              data, ConeSpec::scaled(ConeKind::MonotoneNonIncreasing));
}

ExperimentReport feynman_kac_limit(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  const Grid g = window(p);
  const auto data =
      monotone_corpus(rng, g, count(p, "count"), nonneg(centred(g, real(p, "width_lo"), real(p, "width_hi"))));
  const auto beta = feynman_kac_beta(g);
  std::vector<std::pair<std::string, SemigroupEvaluator>> evs;
  for (double eps : reals(p.at("epsilons")))
    evs.emplace_back("feynman-kac[" + std::to_string(eps) + "]", SemigroupEvaluator::feynman_kac(beta, eps));
  evs.emplace_back("multiplication", SemigroupEvaluator::multiplication(beta));
  return catalogue_membership(p, seed, evs, g, data, ConeSpec::scaled(ConeKind::MonotoneNonIncreasing));
}

ExperimentReport shift_convexity(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  const Grid g = window(p);
  std::vector<GridFunction> data;
  for (std::size_t k = 0; k < count(p, "count"); ++k)
    data.push_back(sample(corpus::convex_slopes(rng, g.a(), g.b(), {}), g));
  return catalogue_membership(p, seed, {{"left-shift", SemigroupEvaluator::left_shift()}}, g, data,
                              ConeSpec::scaled(ConeKind::Convex));
}

ExperimentReport wentzell_interval(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  const Grid g(0.0, 1.0, count(p, "n"));
  std::vector<GridFunction> data;
  for (std::size_t k = 0; k < count(p, "count"); ++k)
    data.push_back(sample(corpus::convex_slopes(rng, 0.0, 1.0, {}), g));
  return catalogue_membership(p, seed, {{"stopped-bm-interval", SemigroupEvaluator::stopped_bm_interval()}}, g,
                              data, ConeSpec::scaled(ConeKind::Convex));
}

ExperimentReport dirichlet_negative_convex(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  const Grid g(0.0, pi, count(p, "n"));
  corpus::ConvexOptions opt;
  opt.smoothing = real(p, "smoothing");
  std::vector<GridFunction> data;
  for (std::size_t k = 0; k < count(p, "count"); ++k)
    data.push_back(sample(corpus::negative_convex(rng, 0.0, pi, opt), g));
  return catalogue_membership(p, seed, {{"dirichlet-heat", SemigroupEvaluator::dirichlet_heat(count(p, "modes"))}},
                              g, data, ConeSpec::scaled(ConeKind::NegativeConvex));
}

ExperimentReport eigenfunction_decay(const Json& p, std::uint64_t) {
  Builder b;
  const Grid g(0.0, pi, count(p, "n"));
  const auto heat = SemigroupEvaluator::dirichlet_heat(count(p, "modes"));
  Table t("errors", "mode,t,error");
  double worst = 0.0;
  for (double k : reals(p.at("modes_tested")))
    for (double time : reals(p.at("times"))) {
      const auto out = heat.apply(time, sample(FunctionSpec::trig(1.0, k), g));
      const double err = sup_distance(out, sample(FunctionSpec::trig(std::exp(-k * k * time), k), g));
      worst = std::max(worst, err);
      t.row(k, time, err);
    }
  b.add(t);
  b.rep.metrics["max_error"] = worst;
  return b.done(worst <= real(p, "tolerance"));
}

ExperimentReport dirichlet_counterexample(const Json& p, std::uint64_t) {
  Builder b;
  const Grid g(0.0, pi, count(p, "n"));
  const double time = real(p, "t");
  const auto out = SemigroupEvaluator::dirichlet_heat(count(p, "modes")).apply(time, sample(FunctionSpec::polynomial({0, 0, 1}), g));
  const auto d2 = second_difference(out);
  Table t("second_difference", "x,second_difference");
  double lowest = INFINITY, where = NAN;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    t.row(g.point(i), d2.values[i]);
    if (d2.values[i] < lowest) {
      lowest = d2.values[i];
      where = g.point(i);
    }
  }
  b.add(t);
  b.rep.metrics["min_second_difference"] = lowest;
  b.rep.metrics["witness_x"] = where;
  b.note("pass means convexity is violated: the image vanishes at both ends, so it cannot stay convex");
  return b.done(lowest < real(p, "threshold"));
}

ExperimentReport neumann_counterexample(const Json& p, std::uint64_t) {
  Builder b;
  const Grid g(0.0, pi, count(p, "n"));
  const auto f = sample(FunctionSpec::polynomial({pi * pi / 4.0, -pi, 1.0}), g);
  const auto heat = SemigroupEvaluator::neumann_heat(count(p, "modes"));
  Table t("witnesses", "t,member,worst_violation,witness_x,oracle_second_derivative");
  bool violated = false, confirmed = true;
  for (double time : reals(p.at("times"))) {
    const auto r = is_member(heat.apply(time, f), ConeSpec::scaled(ConeKind::Convex));
    double oracle = NAN;
    if (!r.member) {
      violated = true;
      // g'' from the first three cosine modes of (x - pi/2)^2
      const double x = r.witness->x;
      oracle = 0.0;
      for (int k = 1; k <= 3; ++k) oracle -= 4.0 * std::exp(-4.0 * k * k * time) * std::cos(2.0 * k * x);
      confirmed = confirmed && oracle < 0.0;
    }
    t.row(time, r.member ? 1 : 0, r.worst_violation, r.witness ? r.witness->x : NAN, oracle);
  }
  b.add(t);
  b.rep.metrics["violated"] = violated;
  b.rep.metrics["oracle_confirms"] = confirmed;
  b.note("pass means some image is not convex and the three-mode oracle has the same sign at the witness");
  return b.done(violated && confirmed);
}

ExperimentReport hessian_2d(const Json& p, std::uint64_t) {
  Builder b;
  const Grid g(-1.0, 1.0, count(p, "n"));
  const auto cone = ConeSpec::scaled(ConeKind::HessianPSD);
  const auto bowl = sample(FunctionSpec2D::polynomial({{0, 0, 1}, {0, 1}, {1}}), g, g);
  const auto saddle = sample(FunctionSpec2D::polynomial({{0, 0, -1}, {0}, {1}}), g, g);
  const auto smooth = approximate_convex_2d(bowl, real(p, "radius"));
  Table t("membership", "case,member,worst_violation,witness_x,witness_y");
  bool ok = true;
  auto row = [&](const char* name, const GridFunction& f, bool expect) {
    const auto r = is_member(f, cone);
    ok = ok && r.member == expect;
    t.row(name, r.member ? 1 : 0, r.worst_violation, r.witness ? r.witness->x : NAN,
          r.witness && r.witness->y ? *r.witness->y : NAN);
  };
  row("bowl", bowl, true);
  row("saddle", saddle, false);
  row("smoothed-bowl", smooth, true);
  b.add(t);
  b.rep.metrics["smoothing_distance"] = sup_distance(bowl, smooth);
  return b.done(ok);
}

ExperimentReport splitting_orders(const Json& p, std::uint64_t) {
  Builder b;
  const Grid g(0.0, pi, count(p, "n"));
  const double t = real(p, "t");
  const auto f = sample(FunctionSpec::polynomial({0.0, -pi, 1.0}), g);
  const auto heat = SemigroupEvaluator::dirichlet_heat(count(p, "modes"));
  const auto mult = SemigroupEvaluator::multiplication(sample(FunctionSpec::polynomial({0.0, -1.0}), g));
  const auto cone = ConeSpec::scaled(ConeKind::NegativeConvex);
  const bool data_member = is_member(f, cone).member;

  Table states("intermediate", "scheme,n,states,violations,worst_violation,first_witness_x,first_witness_step");
  bool all_member = true;
  auto tracked = [&](SplitKind kind, std::size_t n) {
    std::size_t seen = 0, bad = 0, first_step = 0;
    double worst = 0.0, first_x = NAN;
    SplitOptions opt;
    opt.observer = [&](std::size_t step, int, const GridFunction& s) {
      ++seen;
      const auto r = is_member(s, cone);
      if (!r.member) {
        if (bad++ == 0) {
          first_x = r.witness->x;
          first_step = step;
        }
        worst = std::max(worst, r.worst_violation);
      }
    };
    auto out = split({kind, n}, heat, mult, t, f, opt);
    all_member = all_member && bad == 0;
    states.row(to_string(kind), n, seen, bad, worst, first_x, first_step);
    return out;
  };
  const auto ns = p.at("ns").get<std::vector<std::size_t>>();
  const std::size_t ref_n = count(p, "reference");
  auto orders = [&](SplitKind kind, const char* stem) {
    const auto ref = tracked(kind, ref_n);
    const auto table = order_table([&](std::size_t n) { return tracked(kind, n); }, ns, ref);
    std::ostringstream os;
    write_csv(os, table);
    b.rep.tables.emplace_back(stem, os.str());
    return table;
  };
  const auto lie = orders(SplitKind::Lie, "lie_orders");
  const auto strang = orders(SplitKind::Strang, "strang_orders");
  b.add(states);

  const auto lr = reals(p.at("lie_range")), sr = reals(p.at("strang_range"));
  const bool lie_ok = lie.min_order() && *lie.min_order() >= lr[0] && *lie.max_order() <= lr[1];
  const bool strang_ok = strang.min_order() && *strang.min_order() >= sr[0] && *strang.max_order() <= sr[1];
  b.rep.metrics["lie_order_min"] = lie.min_order().value_or(NAN);
  b.rep.metrics["lie_order_max"] = lie.max_order().value_or(NAN);
  b.rep.metrics["strang_order_min"] = strang.min_order().value_or(NAN);
  b.rep.metrics["strang_order_max"] = strang.max_order().value_or(NAN);
  b.rep.metrics["orders_ok"] = lie_ok && strang_ok;
  b.rep.metrics["intermediate_all_member"] = all_member;
  if (!all_member)
    b.note("multiplication by exp(-s x) bends states that vanish at x = pi with positive slope there, so "
           "intermediate states leave the negative convex cone");
  return b.done(lie_ok && strang_ok && (!data_member || all_member));
}

ExperimentReport chernoff_euler(const Json& p, std::uint64_t) {
  Builder b;
  const Grid g(0.0, 1.0, count(p, "n"));
  const double t = real(p, "t");
  const auto f = sample(FunctionSpec::polynomial({0.2, 0.5, -1.0, 0.3}), g);
  const auto target = SemigroupEvaluator::stopped_bm_interval().apply(t, f);
  const auto fam = euler_laplacian_family();
  Table tab("errors", "n,error");
  double prev = INFINITY;
  bool decreasing = true;
  for (std::size_t n : p.at("ns").get<std::vector<std::size_t>>()) {
    const double err = sup_distance(chernoff_iterate(fam, t, n, f), target);
    decreasing = decreasing && err < prev;
    prev = err;
    tab.row(n, err);
  }
  b.add(tab);
  b.rep.metrics["final_error"] = prev;
  return b.done(decreasing);
}

ExperimentReport trotter_kato_fk(const Json& p, std::uint64_t seed) {
  Builder b;
  Rng rng(seed);
  const Grid g = window(p);
  auto opt = centred(g, real(p, "width_lo"), real(p, "width_hi"));
  opt.amplitude = real(p, "amplitude");
  opt.max_terms = p.at("max_terms").get<int>();
  opt.offset_lo = real(p, "offset_lo");
  opt.offset_hi = real(p, "offset_hi");
  const auto data = monotone_corpus(rng, g, count(p, "count"), opt);
  const auto beta = sample(FunctionSpec::tanh(0.0, -real(p, "beta_amplitude"), real(p, "beta_rate"), 0.0), g);
  std::vector<SemigroupEvaluator> seq;
  const std::size_t kmax = count(p, "k_max");
  for (std::size_t k = 0; k <= kmax; ++k)
    seq.push_back(SemigroupEvaluator::feynman_kac(beta, std::ldexp(1.0, -static_cast<int>(k))));
  const auto rep = trotter_kato_probe(seq, SemigroupEvaluator::multiplication(beta),
                                      ConeSpec::scaled(ConeKind::MonotoneNonIncreasing), real(p, "t"), data);
  Table t("errors", "index,k,epsilon,error,member");
  bool strict = true;
  double last = 0.0;
  for (const auto& row : rep.rows) {
    for (std::size_t k = 0; k < row.errors.size(); ++k) {
      t.row(row.corpus_index, k, std::ldexp(1.0, -static_cast<int>(k)), row.errors[k], row.members[k] ? 1 : 0);
      if (k > 0 && !(row.errors[k] < row.errors[k - 1])) strict = false;
    }
    last = std::max(last, row.errors.back());
  }
  b.add(t);
  b.rep.metrics["max_final_error"] = last;
  b.rep.metrics["strictly_decreasing"] = strict;
  b.rep.metrics["all_member"] = rep.all_member;
  b.rep.metrics["skipped"] = rep.skipped;
  return b.done(strict && rep.all_member && last < real(p, "tolerance") && rep.skipped == 0);
}

ExperimentReport bounded_perturbation_monotone(const Json& p, std::uint64_t seed) {
  Builder b;
  Rng rng(seed);
  const Grid g = window(p);
  const auto data = monotone_corpus(rng, g, count(p, "count"), nonneg(centred(g, 0.3, 1.0)));
  const auto ev = SemigroupEvaluator::compound_poisson({real(p, "rate"), real(p, "jump")});
  const auto B = BoundedOperator::multiplication(feynman_kac_beta(g));
  const auto cone = ConeSpec::scaled(ConeKind::MonotoneNonIncreasing);
  Table t("membership", "index,member,intermediate_violations,worst_violation");
  bool ok = true;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t bad = 0;
    SplitOptions opt;
    opt.observer = [&](std::size_t, int, const GridFunction& s) { bad += is_member(s, cone).member ? 0 : 1; };
    const auto r = is_member(bounded_perturbation(ev, B, real(p, "t"), count(p, "steps"), data[i], opt), cone);
    ok = ok && r.member && bad == 0;
    t.row(i, r.member ? 1 : 0, bad, r.worst_violation);
  }
  b.add(t);
  return b.done(ok);
}

GridFunction dyson_beta(const Grid& g) { return sample(FunctionSpec::tanh(-0.25, -0.25, 1.0, 0.0), g); }

ExperimentReport dyson_closed_form(const Json& p, std::uint64_t seed) {
  Builder b;
  Rng rng(seed);
  const Grid g = window(p);
  const double t = real(p, "t");
  const auto beta = dyson_beta(g);
  const PerturbationSpec pert{BoundedOperator::multiplication(beta), 0.5, t};
  const auto closed = SemigroupEvaluator::multiplication(beta);
  const auto unit = sample(FunctionSpec::constant(1.0), g);
  Table errs("errors", "index,error,q_hat,max_ratio");
  Table terms("terms", "index,n,term_norm,tail_estimate");
  bool ok = true;
  double worst = 0.0, worst_gap = -INFINITY;
  for (const auto& raw : monotone_corpus(rng, g, count(p, "count"), centred(g, 0.3, 1.0))) {
    const auto f = scaled(raw, 1.0 / raw.sup_norm());  // unit sup norm
    const auto st = dyson_phillips(SemigroupEvaluator::identity(), pert, t, count(p, "terms"), count(p, "quad_steps"), f,
                                   {f, unit});
    const double err = sup_distance(st.partial_sum, closed.apply(t, f));
    double ratio = 0.0;
    for (std::size_t n = 1; n < st.term_norms.size(); ++n)
      if (st.term_norms[n - 1] > 0.0) ratio = std::max(ratio, st.term_norms[n] / st.term_norms[n - 1]);
    const std::size_t i = static_cast<std::size_t>(b.rep.metrics.value("cases", 0));
    b.rep.metrics["cases"] = i + 1;
    errs.row(i, err, st.q.q_hat, ratio);
    for (std::size_t n = 0; n < st.term_norms.size(); ++n) terms.row(i, n, st.term_norms[n], st.tail_estimates[n]);
    worst = std::max(worst, err);
    worst_gap = std::max(worst_gap, ratio - st.q.q_hat);
    ok = ok && err <= real(p, "tolerance") && ratio <= st.q.q_hat + real(p, "ratio_slack");
  }
  b.add(errs);
  b.add(terms);
  b.rep.metrics["max_error"] = worst;
  b.rep.metrics["max_ratio_minus_q_hat"] = worst_gap;
  return b.done(ok);
}

ExperimentReport miyadera(const Json& p, std::uint64_t seed) {
  Builder b;
  Rng rng(seed);
  const Grid g = window(p);
  const auto probes = monotone_corpus(rng, g, count(p, "count"), centred(g, 0.3, 1.0));
  const auto B = BoundedOperator::multiplication(feynman_kac_beta(g));
  Table t("estimates", "scale,q_hat,probe_index,below_one");
  for (double s : reals(p.at("scales"))) {
    const auto est = miyadera_estimate(SemigroupEvaluator::left_shift(), {B.scaled(s), 0.5, real(p, "t0")}, probes);
    t.row(s, est.q_hat, est.probe_index, est.q_hat < 1.0 ? 1 : 0);
  }
  b.add(t);
  b.note("q_hat is an empirical lower estimate over the probes; values >= 1 falsify the small-integral "
         "hypothesis, values < 1 do not prove it");
  return b.informational();
}

struct DelayRun {
  std::vector<std::vector<DelayState>> runs;  // per step size
  bool all_member = true;
  double order = NAN;
};

DelayRun run_delay(const DelayProblem& pr, const std::vector<double>& dts, const ConeSpec& cone, Table& members,
                   std::size_t index) {
  DelayRun out;
  for (double dt : dts) {
    out.runs.push_back(solve(pr, dt));
    const auto rep = project_witnesses(heads(out.runs.back()), cone);
    out.all_member = out.all_member && rep.all_member;
    for (const auto& [time, r] : rep.rows)
      members.row(index, dt, time, r.member ? 1 : 0, r.worst_violation, r.witness ? r.witness->x : NAN, r.tol_used);
  }
  if (out.runs.size() >= 3) {
    const auto& a = out.runs[out.runs.size() - 3].back().head;
    const auto& b = out.runs[out.runs.size() - 2].back().head;
    const auto& c = out.runs.back().back().head;
    out.order = std::log2(sup_distance(a, b) / sup_distance(b, c));
  }
  return out;
}

constexpr const char* kDelayMemberHeader = "index,dt,t,member,worst_violation,witness_x,tol";

ExperimentReport delay_common(const Json& p, const std::vector<DelayProblem>& problems, const ConeSpec& cone) {
  Builder b;
  const auto dts = reals(p.at("dts"));
  if (real(p, "horizon") == 0.0) {
    b.note("horizon 0: the trajectory holds only the initial state");
    return b.informational();
  }
  Table members("membership", kDelayMemberHeader);
  Table orders("orders", "index,order");
  bool members_ok = true, orders_ok = true;
  std::optional<std::vector<DelayState>> first;
  double first_violation_t = NAN, first_violation_x = NAN;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    auto r = run_delay(problems[i], dts, cone, members, i);
    members_ok = members_ok && r.all_member;
    orders_ok = orders_ok && std::isfinite(r.order) && r.order >= real(p, "min_order");
    orders.row(i, r.order);
    if (!first) first = r.runs.back();
    if (!r.all_member && std::isnan(first_violation_t))
      for (const auto& s : r.runs.back()) {
        const auto m = is_member(s.head, cone);
        if (!m.member) {
          first_violation_t = s.t;
          first_violation_x = m.witness->x;
          break;
        }
      }
  }
  b.add(members);
  b.add(orders);
  std::ostringstream traj;
  write_csv(traj, *first);
  b.rep.tables.emplace_back("trajectory", traj.str());
  b.rep.metrics["all_member"] = members_ok;
  b.rep.metrics["orders_ok"] = orders_ok;
  if (!members_ok) {
    b.rep.metrics["first_violation_t"] = first_violation_t;
    b.rep.metrics["first_violation_x"] = first_violation_x;
  }
  return b.done(members_ok && orders_ok);
}

ExperimentReport delay_transport(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  const Grid g = window(p);
  std::uniform_real_distribution<double> drift(0.0, 1.0);
  std::vector<DelayProblem> problems;
  for (std::size_t k = 0; k < count(p, "count"); ++k) {
    const auto spec = corpus::monotone_sigmoids(rng, centred(g, 0.5, 2.0));
    const double v = drift(rng);
    HistorySpec hist = [spec, v](double s) {
      return FunctionSpec::custom("drifting", [spec, v, s](double x) { return spec(x - v * s); });
    };
    problems.push_back(transport_delay(real(p, "c"), real(p, "tau"), g, hist, real(p, "horizon"),
                                       count(p, "history_intervals")));
    if (p.at("beta_weighted").get<bool>()) {
      // c beta(x) u(t - tau) with beta(x) = 1 + x / (b - a), positive and increasing
      const auto beta = sample(FunctionSpec::polynomial({1.0 - g.a() / (g.b() - g.a()), 1.0 / (g.b() - g.a())}), g);
      const double c = real(p, "c");
      problems.back().atoms.front() = {-1.0, "c*beta", [beta, c](const GridFunction& f) {
                                         std::vector<double> v(f.size());
                                         for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * beta[i] * f[i];
                                         return f.with_values(std::move(v));
                                       }};
    }
  }
  auto rep = delay_common(p, problems, ConeSpec::scaled(ConeKind::MonotoneNonIncreasing));
  if (p.at("beta_weighted").get<bool>() && rep.verdict != Verdict::Informational) {
    rep.verdict = Verdict::Informational;
    rep.notes.push_back("beta-weighted variant: reported without an acceptance predicate");
  }
  return rep;
}

ExperimentReport delay_diffusion(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DelayProblem> problems;
  for (std::size_t k = 0; k < count(p, "count"); ++k) {
    const double a = 1.0 - u(rng), c = 1.0 - u(rng), grow = u(rng);
    // -(a sin(pi x) + c x (1 - x)), scaled by a positive factor in the history variable
    HistorySpec hist = [a, c, grow](double s) {
      return FunctionSpec::custom("negative convex", [a, c, grow, s](double x) {
        return -(1.0 + grow * s) * (a * std::sin(pi * x) + c * x * (1.0 - x));
      });
    };
    problems.push_back(diffusion_delay(real(p, "c"), real(p, "tau"), count(p, "n"), hist, real(p, "horizon"),
                                       count(p, "history_intervals"), count(p, "modes")));
  }
  auto rep = delay_common(p, problems, ConeSpec::scaled(ConeKind::NegativeConvex));
  if (rep.verdict == Verdict::Fail && rep.metrics.contains("first_violation_x"))
    rep.notes.push_back("the half-shifted delayed term has a concave kink at x = 1/2, which the heat flow "
                        "cannot smooth out before it shows in the head");
  return rep;
}

ExperimentReport appendix_monotone(const Json& p, std::uint64_t seed) {
  Builder b;
  Rng rng(seed);
  std::uniform_real_distribution<double> ue(real(p, "eps_lo"), real(p, "eps_hi"));
  const Grid g(0.0, 1.0, count(p, "n"));
  Table t("approximations", "index,eps,distance,values_nonincreasing,slopes_nonpositive,edges_not_flat");
  bool ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < count(p, "count"); ++k) {
    const auto f = corpus::monotone_increments(rng, g);
    const double eps = ue(rng);
    const auto r = approximate_monotone(f, eps);
    bool values = true, slopes = true;
    for (std::size_t i = 1; i < g.size(); ++i) values = values && r.g[i] <= r.g[i - 1];
    const auto d1 = first_difference(r.g);
    for (double d : d1.values()) slopes = slopes && d <= 0.0;
    const double dist = sup_distance(f, r.g);
    ok = ok && values && slopes && dist < eps;
    worst = std::max(worst, dist / eps);
    t.row(k, eps, dist, values ? 1 : 0, slopes ? 1 : 0, r.edges_not_flat ? 1 : 0);
  }
  b.add(t);
  b.rep.metrics["max_distance_over_eps"] = worst;
  return b.done(ok);
}

ExperimentReport appendix_convex(const Json& p, std::uint64_t seed) {
  Builder b;
  Rng rng(seed);
  const Grid g(-1.0, 1.0, count(p, "n"));
  const std::size_t last = g.size() - 1;
  corpus::ConvexOptions opt;
  opt.smoothing = 0.0;
  Table t("approximations", "index,mesh_step,nodes_exact,member,endpoint_second_difference");
  bool ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < count(p, "count"); ++k) {
    const auto f = sample(corpus::convex_slopes(rng, g.a(), g.b(), opt), g);
    const std::size_t step = 3 + k % 17;
    std::vector<std::size_t> mesh{0};
    while (mesh.back() + step < last) mesh.push_back(mesh.back() + step);
    mesh.push_back(last);
    const auto out = approximate_convex(f, mesh, 0.0);
    bool exact = true;
    for (std::size_t i : mesh) exact = exact && out[i] == f[i];
    const bool member = is_member(out, ConeSpec::scaled(ConeKind::Convex)).member;
    const auto d2 = second_difference(out);
    const double ends = std::max(std::abs(d2.values.front()), std::abs(d2.values.back()));
    ok = ok && exact && member && ends <= real(p, "endpoint_tolerance");
    worst = std::max(worst, ends);
    t.row(k, step, exact ? 1 : 0, member ? 1 : 0, ends);
  }
  b.add(t);
  b.rep.metrics["max_endpoint_second_difference"] = worst;
  return b.done(ok);
}

ExperimentReport lp_closure(const Json& p, std::uint64_t) {
  Builder b;
  const Grid g(-1.0, 1.0, count(p, "n"));
  std::vector<GridFunction> seq;
  for (std::size_t k = 1; k <= count(p, "terms"); ++k) {
    const double e = std::ldexp(1.0, -2 * static_cast<int>(k));
    seq.push_back(sample(FunctionSpec::custom("hyperbola", [e](double x) { return std::sqrt(x * x + e); }), g));
  }
  const auto limit = sample(FunctionSpec::custom("abs", [](double x) { return std::abs(x); }), g);
  const auto r = lp_limit_convexity_check(seq, limit, real(p, "p"));
  Table t("norms", "k,lp_distance");
  for (std::size_t k = 0; k < r.norms.size(); ++k) t.row(k + 1, r.norms[k]);
  b.add(t);
  b.rep.metrics["sequence_convex"] = r.sequence_convex;
  b.rep.metrics["converging"] = r.converging;
  b.rep.metrics["limit_member"] = r.limit_membership.member;
  return b.done(r.passed);
}

ExperimentReport compatibility(const Json& p, std::uint64_t seed) {
  Rng rng(seed);
  const Grid g = window(p);
  corpus::ConvexOptions opt;
  opt.smoothing = 0.0;
  std::vector<GridFunction> data{sample(FunctionSpec::constant(0.5), g)};
  for (std::size_t k = 0; k < count(p, "count"); ++k) data.push_back(sample(corpus::convex_slopes(rng, g.a(), g.b(), opt), g));
  data.push_back(sample(FunctionSpec::trig(1.0, 3.0), g));  // not convex
  return compatibility_probe(ConeSpec::scaled(ConeKind::Convex), SemigroupEvaluator::left_shift(), data,
                             real(p, "eps"));
}

struct Case {
  std::string label;
  SemigroupEvaluator ev;
  Grid grid;
};

ExperimentReport semigroup_law(const Json& p, std::uint64_t seed) {
  Builder b;
  Rng rng(seed);
  const Grid line(-15.0, 15.0, 601), half(0.0, 30.0, 601), unit(0.0, 1.0, 101), span(0.0, pi, 257);
  const auto beta = feynman_kac_beta(line);
  std::vector<Case> cases{
      {"left-shift", SemigroupEvaluator::left_shift(), line},
      {"gauss", SemigroupEvaluator::gauss_whole_line(), line},
      {"stopped-bm-half-line", SemigroupEvaluator::stopped_bm_half_line(), half},
      {"stopped-bm-interval", SemigroupEvaluator::stopped_bm_interval(), unit},
      {"dirichlet-heat", SemigroupEvaluator::dirichlet_heat(), span},
      {"neumann-heat", SemigroupEvaluator::neumann_heat(), span},
      {"compound-poisson", SemigroupEvaluator::compound_poisson({0.5, 0.37}), line},
      {"levy", SemigroupEvaluator::compound_poisson({2.0, 0.37, 0.2, -0.3}), line},
      {"multiplication", SemigroupEvaluator::multiplication(beta), line},
      {"feynman-kac", SemigroupEvaluator::feynman_kac(beta, 0.5), line},
  };
  const auto times = reals(p.at("times"));
  const double factor = real(p, "factor");
  Table t("checks", "evaluator,index,law_error,law_limit,min_value,identity_exact");
  bool ok = true;
  double worst_ratio = 0.0, worst_low = INFINITY;
  for (const auto& c : cases) {
    const double mid = 0.5 * (c.grid.a() + c.grid.b()), halfw = 0.5 * (c.grid.b() - c.grid.a());
    corpus::SigmoidOptions opt;
    opt.center_lo = mid - 0.2 * halfw;
    opt.center_hi = mid + 0.2 * halfw;
    opt.width_lo = 0.05 * halfw;
    opt.width_hi = 0.06 * halfw;
    for (std::size_t i = 0; i < count(p, "count"); ++i) {
      const auto f = sample(corpus::monotone_sigmoids(rng, opt), c.grid);
      const double limit = factor * c.ev.backend_tolerance() * std::max(1.0, f.sup_norm());
      double law = 0.0, lowest = INFINITY;
      std::vector<GridFunction> images;
      for (double s : times) {
        images.push_back(c.ev.apply(s, f));
        lowest = std::min(lowest, images.back().min());
      }
      for (double s : times)
        for (std::size_t j = 0; j < times.size(); ++j)
          law = std::max(law, sup_distance(c.ev.apply(s + times[j], f), c.ev.apply(s, images[j])));
      const auto zero = c.ev.apply(0.0, f);
      bool exact = true;
      for (std::size_t k = 0; k < f.size(); ++k) exact = exact && zero[k] == f[k];
      const bool exact_required = c.ev.exact_formula();
      ok = ok && law <= limit && lowest >= -1e-12 && (exact || !exact_required);
      worst_ratio = std::max(worst_ratio, law / limit);
      worst_low = std::min(worst_low, lowest);
      t.row(c.label, i, law, limit, lowest, exact ? 1 : 0);
    }
  }
  b.add(t);
  b.rep.metrics["max_law_error_over_limit"] = worst_ratio;
  b.rep.metrics["min_value"] = worst_low;
  return b.done(ok);
}

struct Entry {
  ExperimentInfo info;
  Json defaults;
  std::function<ExperimentReport(const Json&, std::uint64_t)> fn;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    const Json catalogue_window = {{"a", -10.0}, {"b", 10.0}, {"n", 401}};
    auto with = [](Json base, const Json& more) {
      for (auto it = more.begin(); it != more.end(); ++it) base[it.key()] = it.value();
      return base;
    };
    std::vector<Entry> e;
    e.push_back({{"monotone-levy", "shift, Gaussian and compound Poisson images of non-increasing data",
                  "Levy-process semigroups keep non-increasing functions non-increasing"},
                 with(catalogue_window, {{"count", 50}, {"times", {0.1, 1.0, 5.0}}, {"rates", {0.5, 2.0}},
                                         {"jump", 0.37}, {"sigma2", 0.0}, {"drift", 0.0},
                                         {"width_lo", 0.3}, {"width_hi", 1.0}}),
                 monotone_levy});
    e.push_back({{"feynman-kac-limit", "Feynman-Kac transport and its multiplication limit on non-increasing data",
                  "transport with a non-increasing killing rate preserves monotonicity for every speed"},
                 with(catalogue_window, {{"count", 50}, {"times", {0.1, 1.0, 5.0}}, {"epsilons", {1.0, 0.1}},
                                         {"width_lo", 0.3}, {"width_hi", 1.0}}),
                 feynman_kac_limit});
    e.push_back({{"stopped-bm-halfline", "absorbed Brownian motion on the half-line via odd reflection",
                  "the half-line heat flow with frozen boundary value preserves monotonicity"},
                 {{"length", 20.0}, {"n", 401}, {"count", 50}, {"times", {0.1, 1.0, 5.0}},
                  {"width_lo", 0.3}, {"width_hi", 1.0}},
                 stopped_bm_halfline});
    e.push_back({{"shift-convexity", "left shift of convex data", "translation preserves convexity"},
                 with(catalogue_window, {{"count", 20}, {"times", {0.1, 1.0, 5.0}}}), shift_convexity});
    e.push_back({{"wentzell-interval-convexity", "stopped Brownian motion on [0, 1] applied to convex data",
                  "the interval heat flow with frozen boundary values preserves convexity"},
                 {{"n", 101}, {"count", 20}, {"times", {0.01, 0.1, 1.0}}}, wentzell_interval});
    e.push_back({{"dirichlet-negative-convex", "Dirichlet heat flow of negative convex data",
                  "the Dirichlet heat semigroup keeps f <= 0, f'' >= 0"},
                 {{"n", 513}, {"count", 50}, {"times", {0.01, 0.1, 0.5, 1.0}}, {"smoothing", 0.05}, {"modes", 256}},
                 dirichlet_negative_convex});
    e.push_back({{"dirichlet-convexity-counterexample", "Dirichlet heat flow of x^2",
                  "Dirichlet heat images vanish at both ends, so a convex datum cannot stay convex"},
                 {{"n", 257}, {"t", 0.05}, {"threshold", -0.01}, {"modes", 256}}, dirichlet_counterexample});
    e.push_back({{"neumann-convexity-counterexample", "Neumann heat flow of (x - pi/2)^2",
                  "the Neumann heat semigroup does not preserve convexity"},
                 {{"n", 257}, {"times", {0.05, 0.1, 0.5}}, {"modes", 256}}, neumann_counterexample});
    e.push_back({{"hessian-2d-membership", "Hessian cone membership in two dimensions",
                  "convexity in the plane is positive semidefiniteness of the Hessian"},
                 {{"n", 41}, {"radius", 0.1}}, hessian_2d});
    e.push_back({{"splitting-orders", "Lie and Strang splitting of Dirichlet heat and multiplication by -x",
                  "sequential and symmetric splittings converge and inherit shape preservation of the factors"},
                 {{"n", 257}, {"t", 0.5}, {"ns", {16, 32, 64, 128}}, {"reference", 4096}, {"modes", 256},
                  {"lie_range", {0.9, 1.1}}, {"strang_range", {1.8, 2.2}}},
                 splitting_orders});
    e.push_back({{"chernoff-euler", "explicit Euler Chernoff family for the interval heat flow",
                  "a stable consistent family V(t/n)^n converges to the semigroup"},
                 {{"n", 21}, {"t", 0.05}, {"ns", {64, 128, 256, 512, 1024, 2048, 4096}}}, chernoff_euler});
    e.push_back({{"trotter-kato-feynman-kac", "Feynman-Kac transport with speed 2^-k against multiplication",
                  "semigroups converging strongly carry an invariant closed cone to the limit"},
                 {{"a", -20.0}, {"b", 20.0}, {"n", 801}, {"t", 1.0}, {"k_max", 6}, {"count", 10},
                  {"width_lo", 12.5}, {"width_hi", 25.0}, {"amplitude", 0.5}, {"max_terms", 2}, {"offset_lo", 0.1},
                  {"offset_hi", 0.5}, {"beta_amplitude", 0.5}, {"beta_rate", 0.125}, {"tolerance", 1e-3}},
                 trotter_kato_fk});
    e.push_back({{"bounded-perturbation-monotone", "compound Poisson plus a non-increasing multiplication",
                  "a bounded perturbation leaving the cone invariant keeps the perturbed semigroup shape preserving"},
                 with(catalogue_window, {{"count", 20}, {"t", 1.0}, {"steps", 16}, {"rate", 2.0}, {"jump", 0.37}}),
                 bounded_perturbation_monotone});
    e.push_back({{"dyson-phillips-closed-form", "Dyson-Phillips series for the identity plus multiplication",
                  "the perturbed semigroup is the sum of the Dyson-Phillips series"},
                 with(catalogue_window, {{"count", 10}, {"t", 1.0}, {"terms", 12}, {"quad_steps", 128},
                                         {"tolerance", 1e-6}, {"ratio_slack", 0.05}}),
                 dyson_closed_form});
    e.push_back({{"miyadera-estimate", "empirical small-integral constant for shift plus multiplication",
                  "a perturbation with small integrated norm along orbits generates"},
                 with(catalogue_window, {{"count", 5}, {"t0", 0.5}, {"scales", {0.5, 1.0, 2.0, 4.0}}}), miyadera});
    e.push_back({{"delay-transport", "transport equation with a delayed linear feed",
                  "delayed transport keeps monotone histories monotone"},
                 {{"a", 0.0}, {"b", 20.0}, {"n", 641}, {"c", 0.5}, {"tau", 0.5}, {"horizon", 3.0},
                  {"history_intervals", 32}, {"dts", {0.125, 0.0625, 0.03125}}, {"count", 5}, {"min_order", 0.9},
                  {"beta_weighted", false}},
                 delay_transport});
    e.push_back({{"delay-diffusion", "Dirichlet heat equation with a delayed half-shift feed",
                  "delayed diffusion with a cone-preserving delay keeps heads negative and convex"},
                 {{"n", 129}, {"c", 0.5}, {"tau", 0.5}, {"horizon", 2.0}, {"history_intervals", 32},
                  {"dts", {0.0625, 0.03125, 0.015625}}, {"count", 5}, {"modes", 256}, {"min_order", 0.9}},
                 delay_diffusion});
    e.push_back({{"appendix-monotone-approx", "cosine-arc approximation of non-increasing data",
                  "non-increasing functions are uniform limits of C^1 non-increasing functions"},
                 {{"n", 201}, {"count", 50}, {"eps_lo", 0.02}, {"eps_hi", 0.2}}, appendix_monotone});
    e.push_back({{"appendix-convex-approx", "piecewise-linear interpolation of convex data",
                  "convex functions are uniform limits of convex interpolants with flat second differences at the ends"},
                 {{"n", 201}, {"count", 50}, {"endpoint_tolerance", 1e-10}}, appendix_convex});
    e.push_back({{"lp-closure-convexity", "L^p limit of convex hyperbolas",
                  "the L^p closure of convex functions consists of convex functions"},
                 {{"n", 201}, {"terms", 8}, {"p", 2.0}}, lp_closure});
    e.push_back({{"compatibility-probe", "smooth cone members near piecewise-linear convex data",
                  "the cone equals the closure of its smooth part"},
                 {{"a", -1.0}, {"b", 1.0}, {"n", 201}, {"count", 10}, {"eps", 0.05}}, compatibility});
    e.push_back({{"eigenfunction-decay", "Dirichlet heat flow of sin(kx)",
                  "sine modes decay like exp(-k^2 t)"},
                 {{"n", 513}, {"modes", 256}, {"modes_tested", {1, 2, 3}}, {"times", {0.1, 1.0}}, {"tolerance", 1e-8}},
                 eigenfunction_decay});
    e.push_back({{"semigroup-law-positivity", "composition, positivity and identity checks for every evaluator",
                  "every catalogue member is a positive strongly continuous semigroup"},
                 {{"count", 10}, {"times", {0.1, 0.5}}, {"factor", 10.0}}, semigroup_law});
    return e;
  }();
  return entries;
}

const Entry& entry(const std::string& name) {
  for (const auto& e : registry())
    if (e.info.name == name) return e;
  throw ConfigError("unknown experiment '" + name + "'");
}

bool compatible(const Json& def, const Json& val) {
  if (def.is_number_float()) return val.is_number();
  // integer parameters are counts
  if (def.is_number_integer()) return val.is_number_integer() && (def < 0 || val >= 0);
  if (def.is_array()) {
    if (!val.is_array()) return false;
    if (def.empty()) return true;
    for (const auto& v : val)
      if (!compatible(def.front(), v)) return false;
    return true;
  }
  return def.type() == val.type();
}

}  // namespace

std::vector<ExperimentInfo> list_experiments() {
  std::vector<ExperimentInfo> out;
  for (const auto& e : registry()) out.push_back(e.info);
  return out;
}

const ExperimentInfo& find_experiment(const std::string& name) { return entry(name).info; }

Json default_params(const std::string& name) { return entry(name).defaults; }

Json resolve_params(const std::string& name, const Json& overrides) {
  Json params = default_params(name);
  if (!overrides.is_object()) throw ConfigError("params must be a JSON object");
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (!params.contains(it.key())) throw ConfigError(name + ": unknown parameter '" + it.key() + "'");
    if (!compatible(params[it.key()], it.value()))
      throw ConfigError(name + ": parameter '" + it.key() + "' expects " + params[it.key()].type_name() +
                        ", got " + it.value().dump());
    params[it.key()] = it.value();
  }
  return params;
}

void add_override(Json& overrides, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  overrides[key] = value.is_discarded() ? Json(text) : value;
}

Json summary_json(const ExperimentReport& report) {
  Json j;
  j["name"] = report.name;
  j["anchor"] = find_experiment(report.name).anchor;
  j["seed"] = report.seed;
  j["params"] = report.params;
  j["verdict"] = to_string(report.verdict);
  j["metrics"] = report.metrics;
  j["notes"] = report.notes;
  Json tables = Json::array();
  for (const auto& [stem, csv] : report.tables) tables.push_back(stem + ".csv");
  j["tables"] = tables;
  return j;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [stem, csv] : report.tables) {
    std::ofstream os(dir / (stem + ".csv"), std::ios::binary);
    os << csv;
    if (!os) throw Error("cannot write " + (dir / (stem + ".csv")).string());
  }
  std::ofstream os(dir / "summary.json", std::ios::binary);
  os << summary_json(report).dump(2) << '\n';
  if (!os) throw Error("cannot write " + (dir / "summary.json").string());
}

ExperimentReport run(const ExperimentConfig& config) {
  const Entry& e = entry(config.name);
  const Json params = resolve_params(config.name, config.params);
  ExperimentReport rep;
  try {
    rep = e.fn(params, config.seed);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(config.name + ": " + ex.what());
  }
  rep.name = config.name;
  rep.params = params;
  rep.seed = config.seed;
  if (!config.output_dir.empty()) write_report(rep, config.output_dir);
  return rep;
}

ExperimentReport compatibility_probe(const ConeSpec& cone, const SemigroupEvaluator& ev,
                                     const std::vector<GridFunction>& corpus, double eps) {
  if (cone.kind != ConeKind::MonotoneNonIncreasing && cone.kind != ConeKind::Convex &&
      cone.kind != ConeKind::NegativeConvex)
    throw DomainError(std::string("compatibility_probe: no approximator for the ") + to_string(cone.kind) + " cone");
  Builder b;
  b.rep.name = "compatibility-probe";
  Table t("distances", "index,member,witness_x,distance,approximant_member");
  double worst = 0.0;
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& f = corpus[i];
    const auto m = is_member(f, cone);
    if (!m.member) {
      ++rejected;
      t.row(i, 0, m.witness->x, NAN, 0);
      continue;
    }
    GridFunction approx = f;
    try {
      if (cone.kind == ConeKind::MonotoneNonIncreasing) {
        approx = approximate_monotone(f, eps).g;
      } else {
        // every other node, corners rounded over a quarter of the mesh spacing
        const std::size_t n = f.size();
        std::vector<std::size_t> mesh;
        for (std::size_t k = 0; k + 1 < n; k += 2) mesh.push_back(k);
        if (mesh.back() != n - 1) mesh.push_back(n - 1);
        approx = approximate_convex(f, mesh, 0.5 * f.grid().spacing());
      }
    } catch (const PreconditionFailure& ex) {
      ++rejected;
      t.row(i, 0, ex.witness_x(), NAN, 0);
      continue;
    }
    const double d = sup_distance(f, approx);
    worst = std::max(worst, d);
    t.row(i, 1, NAN, d, is_member(approx, cone).member ? 1 : 0);
  }
  b.add(t);
  b.rep.metrics["evaluator"] = ev.name();
  b.rep.metrics["max_distance"] = worst;
  b.rep.metrics["rejected"] = rejected;
  b.note("distances are evidence that smooth members are dense in the cone near the corpus, not a proof");
  return b.informational();
}

}  // namespace shapelab
