#include "shapelab/compose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "shapelab/error.hpp"

namespace shapelab {

Propagator propagator(const SemigroupEvaluator& ev) {
  return [ev](double dt, const GridFunction& f) { return ev.apply(dt, f); };
}

const char* to_string(SplitKind k) { return k == SplitKind::Lie ? "lie" : "strang"; }

namespace {

void check_split(double t, std::size_t n) {
  if (!(t >= 0.0)) throw DomainError("splitting: t must be >= 0");
  if (n == 0) throw DomainError("splitting: n must be >= 1");
}

void notify(const SplitOptions& opt, std::size_t step, int sub, const GridFunction& g) {
  if (opt.observer) opt.observer(step, sub, g);
}

}  // namespace

GridFunction lie_product(const Propagator& A, const Propagator& B, double t, std::size_t n,
                         const GridFunction& f, const SplitOptions& opt) {
  check_split(t, n);
  const double dt = t / static_cast<double>(n);
  const Propagator& first = opt.transpose ? A : B;
  const Propagator& second = opt.transpose ? B : A;
  GridFunction g = f;
  for (std::size_t k = 0; k < n; ++k) {
    g = first(dt, g);
    notify(opt, k, 0, g);
    g = second(dt, g);
    notify(opt, k, 1, g);
  }
  return g;
}

GridFunction strang_product(const Propagator& A, const Propagator& B, double t, std::size_t n,
                            const GridFunction& f, const SplitOptions& opt) {
  check_split(t, n);
  const double dt = t / static_cast<double>(n);
  GridFunction g = f;
  for (std::size_t k = 0; k < n; ++k) {
    g = B(0.5 * dt, g);
    notify(opt, k, 0, g);
    g = A(dt, g);
    notify(opt, k, 1, g);
    g = B(0.5 * dt, g);
    notify(opt, k, 2, g);
  }
  return g;
}

GridFunction lie_split(const SemigroupEvaluator& evA, const SemigroupEvaluator& evB, double t,
                       std::size_t n, const GridFunction& f, const SplitOptions& opt) {
  return lie_product(propagator(evA), propagator(evB), t, n, f, opt);
}

GridFunction strang_split(const SemigroupEvaluator& evA, const SemigroupEvaluator& evB, double t,
                          std::size_t n, const GridFunction& f, const SplitOptions& opt) {
  return strang_product(propagator(evA), propagator(evB), t, n, f, opt);
}

GridFunction split(const SplittingScheme& scheme, const SemigroupEvaluator& evA,
                   const SemigroupEvaluator& evB, double t, const GridFunction& f,
                   const SplitOptions& opt) {
  return scheme.kind == SplitKind::Lie ? lie_split(evA, evB, t, scheme.n_steps, f, opt)
                                       : strang_split(evA, evB, t, scheme.n_steps, f, opt);
}

std::optional<double> OrderTable::min_order() const {
  std::optional<double> out;
  for (const auto& r : rows)
    if (r.estimated_order) out = out ? std::min(*out, *r.estimated_order) : *r.estimated_order;
  return out;
}

std::optional<double> OrderTable::max_order() const {
  std::optional<double> out;
  for (const auto& r : rows)
    if (r.estimated_order) out = out ? std::max(*out, *r.estimated_order) : *r.estimated_order;
  return out;
}

OrderTable order_table(const std::function<GridFunction(std::size_t)>& solve,
                       const std::vector<std::size_t>& ns, const GridFunction& reference) {
  const double floor = 100.0 * std::numeric_limits<double>::epsilon();
  OrderTable table;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (k > 0 && ns[k] <= ns[k - 1]) throw DomainError("order_table: n must increase");
    OrderRow row{ns[k], sup_distance(solve(ns[k]), reference), std::nullopt};
    if (k > 0) {
      const double coarse = table.rows.back().error;
      if (row.error > floor && coarse > floor)
        row.estimated_order = std::log(coarse / row.error) /
                              std::log(static_cast<double>(ns[k]) / static_cast<double>(ns[k - 1]));
    }
    table.rows.push_back(row);
  }
  return table;
}

void write_csv(std::ostream& os, const OrderTable& table) {
  const auto old = os.precision(17);
  os << "n,error,estimated_order\n";
  for (const auto& r : table.rows) {
    os << r.n << ',' << r.error << ',';
    if (r.estimated_order) os << *r.estimated_order;
    os << '\n';
  }
  os.precision(old);
}

struct BoundedOperator::Impl {
  Kind kind;
  std::string name;
  double norm;
  std::function<GridFunction(const GridFunction&)> fn;
};

BoundedOperator BoundedOperator::zero() {
  return BoundedOperator(std::make_shared<const Impl>(
      Impl{Kind::Zero, "zero", 0.0, [](const GridFunction& f) { return zero_like(f); }}));
}

BoundedOperator BoundedOperator::multiplication(GridFunction beta) {
  if (beta.dim() != 1) throw DomainError("multiplication: beta must be 1D");
  const GridFunction b = beta.with_extension(Extension::Constant);
  auto fn = [b](const GridFunction& f) {
    const Grid& g = f.grid();
    const bool aligned = b.grid() == g;
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = (aligned ? b[i] : b.at(g.point(i))) * f[i];
    if (f.extension() == Extension::Analytic) {
      const FunctionSpec spec = *f.continuation();
      return GridFunction::analytic(g, std::move(out),
                                    FunctionSpec::custom("product", [spec, b](double x) { return b.at(x) * spec(x); }));
    }
    return GridFunction(g, std::move(out), f.extension() == Extension::Zero ? Extension::Zero : Extension::Constant);
  };
  return BoundedOperator(std::make_shared<const Impl>(Impl{Kind::Multiplication, "multiplication", b.sup_norm(), fn}));
}

BoundedOperator BoundedOperator::shift(double offset, double scale) {
  auto fn = [offset, scale](const GridFunction& f) {
    const Grid& g = f.grid();
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = scale * f.at(g.point(i) + offset);
    if (f.extension() == Extension::Analytic) {
      const FunctionSpec spec = *f.continuation();
      return GridFunction::analytic(
          g, std::move(out),
          FunctionSpec::custom("shift", [spec, offset, scale](double x) { return scale * spec(x + offset); }));
    }
    return GridFunction(g, std::move(out));
  };
  return BoundedOperator(std::make_shared<const Impl>(Impl{Kind::Shift, "shift", std::abs(scale), fn}));
}

BoundedOperator BoundedOperator::sum(const BoundedOperator& a, const BoundedOperator& b) {
  auto fn = [a, b](const GridFunction& f) { return axpy(1.0, a.apply(f), b.apply(f)); };
  return BoundedOperator(std::make_shared<const Impl>(
      Impl{Kind::Sum, a.name() + "+" + b.name(), a.norm_bound() + b.norm_bound(), fn}));
}

BoundedOperator BoundedOperator::compose(const BoundedOperator& a, const BoundedOperator& b) {
  auto fn = [a, b](const GridFunction& f) { return a.apply(b.apply(f)); };
  return BoundedOperator(std::make_shared<const Impl>(
      Impl{Kind::Compose, a.name() + "*" + b.name(), a.norm_bound() * b.norm_bound(), fn}));
}

BoundedOperator BoundedOperator::custom(std::string name, std::function<GridFunction(const GridFunction&)> fn,
                                        double norm_bound) {
  if (!fn) throw DomainError("custom operator: empty function");
  if (!(norm_bound >= 0.0)) throw DomainError("custom operator: norm bound must be >= 0");
  return BoundedOperator(std::make_shared<const Impl>(Impl{Kind::Custom, std::move(name), norm_bound, std::move(fn)}));
}

BoundedOperator::Kind BoundedOperator::kind() const { return impl_->kind; }
const std::string& BoundedOperator::name() const { return impl_->name; }
double BoundedOperator::norm_bound() const { return impl_->norm; }

GridFunction BoundedOperator::apply(const GridFunction& f) const {
  if (f.dim() != 1) throw DomainError("bounded operator: 1D input required");
  GridFunction out = impl_->fn(f);
  if (!same_grid(out, f)) throw DomainError("bounded operator: output left the input grid");
  return out;
}

BoundedOperator BoundedOperator::scaled(double a) const {
  const BoundedOperator self = *this;
  auto fn = [self, a](const GridFunction& f) { return shapelab::scaled(self.apply(f), a); };
  return BoundedOperator(
      std::make_shared<const Impl>(Impl{Kind::Custom, std::to_string(a) + "*" + name(), std::abs(a) * norm_bound(), fn}));
}

SeriesResult series_exponential(const BoundedOperator& B, double t, const GridFunction& f, std::size_t max_terms) {
  if (!(t >= 0.0)) throw DomainError("series_exponential: t must be >= 0");
  GridFunction term = f;
  GridFunction sum = f;
  for (std::size_t k = 1; k <= max_terms; ++k) {
    if (term.sup_norm() < 1e-15) return {sum, k};
    term = scaled(B.apply(term), t / static_cast<double>(k));
    sum = axpy(1.0, term, sum);
  }
  throw ConvergenceError("series_exponential: no convergence within " + std::to_string(max_terms) + " terms");
}

GridFunction bounded_perturbation(const SemigroupEvaluator& evA, const BoundedOperator& B, double t,
                                  std::size_t n, const GridFunction& f, const SplitOptions& opt) {
  Propagator series = [B](double dt, const GridFunction& g) { return series_exponential(B, dt, g).value; };
  return lie_product(propagator(evA), series, t, n, f, opt);
}

ChernoffFamily exact_family(const SemigroupEvaluator& ev) {
  return {ev.name(), [ev](double h, const GridFunction& f) { return ev.apply(h, f); }, ev.growth()};
}

ChernoffFamily euler_laplacian_family() {
  auto V = [](double h, const GridFunction& f) {
    if (f.dim() != 1 || f.size() < 3) throw DomainError("euler family: 1D input with >= 3 points required");
    const double dx = f.grid().spacing();
    const double r = h / (dx * dx);
    std::vector<double> out(f.values().begin(), f.values().end());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) out[i] = f[i] + r * ((f[i - 1] - f[i]) + (f[i + 1] - f[i]));
    return f.with_values(std::move(out));
  };
  // stable (M = 1) under h <= dx^2 / 2
  return {"euler-laplacian", V, {1.0, 0.0}};
}

ChernoffFamily series_family(const BoundedOperator& B) {
  return {"series[" + B.name() + "]",
          [B](double h, const GridFunction& f) { return series_exponential(B, h, f).value; },
          {1.0, B.norm_bound()}};
}

GridFunction chernoff_iterate(const ChernoffFamily& fam, double t, std::size_t n, const GridFunction& f) {
  if (!(t >= 0.0)) throw DomainError("chernoff_iterate: t must be >= 0");
  if (n == 0) throw DomainError("chernoff_iterate: n must be >= 1");
  const double h = t / static_cast<double>(n);
  GridFunction g = f;
  for (std::size_t k = 0; k < n; ++k) g = fam.V(h, g);
  return g;
}

TrotterKatoReport trotter_kato_probe(const std::vector<SemigroupEvaluator>& seq, const SemigroupEvaluator& limit,
                                     const ConeSpec& cone, double t, const std::vector<GridFunction>& corpus) {
  TrotterKatoReport rep{limit.growth(), {}, 0, true, true};
  for (const auto& ev : seq) {
    rep.uniform_growth.M = std::max(rep.uniform_growth.M, ev.growth().M);
    rep.uniform_growth.omega = std::max(rep.uniform_growth.omega, ev.growth().omega);
  }
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const GridFunction& f = corpus[c];
    if (!is_member(f, cone).member) {
      ++rep.skipped;
      continue;
    }
    const GridFunction target = limit.apply(t, f);
    TrotterKatoRow row{c, {}, {}, is_member(target, cone).member, true};
    for (const auto& ev : seq) {
      const GridFunction img = ev.apply(t, f);
      row.errors.push_back(sup_distance(img, target));
      row.members.push_back(is_member(img, cone).member);
    }
    for (std::size_t k = 1; k < row.errors.size(); ++k)
      if (row.errors[k] > row.errors[k - 1]) row.errors_decreasing = false;
    const bool members = row.limit_member && std::all_of(row.members.begin(), row.members.end(), [](bool b) { return b; });
    rep.all_member = rep.all_member && members;
    rep.all_decreasing = rep.all_decreasing && row.errors_decreasing;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace shapelab
