#include "shapelab/semigroups.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "shapelab/error.hpp"

namespace shapelab {
namespace {

using std::numbers::pi;

constexpr double kGaussCutoff = 8.0;     // kernel truncated at 8 standard deviations
constexpr double kMinSpectralTime = 1e-4;
constexpr double kPoissonTail = 1e-14;

// Values of f on the lattice indices [-pad, n - 1 + pad].
template <class Lattice>
std::vector<double> padded_values(std::size_t n, long pad, Lattice&& at) {
  std::vector<double> v(n + 2 * static_cast<std::size_t>(pad));
  for (long j = -pad; j < static_cast<long>(n) + pad; ++j) v[static_cast<std::size_t>(j + pad)] = at(j);
  return v;
}

std::vector<double> gauss_weights(double variance, double h) {
  const auto K = static_cast<long>(std::floor(kGaussCutoff * std::sqrt(variance) / h));
  std::vector<double> w(static_cast<std::size_t>(K) + 1);
  double total = 0.0;
  for (long k = 0; k <= K; ++k) {
    const double x = static_cast<double>(k) * h;
    w[static_cast<std::size_t>(k)] = std::exp(-x * x / (2.0 * variance));
    total += k == 0 ? w[0] : 2.0 * w[static_cast<std::size_t>(k)];
  }
  for (double& v : w) v /= total;
  return w;
}

// Symmetric discrete convolution; `at(j)` supplies lattice values, including
// indices outside the window.
template <class Lattice>
std::vector<double> gauss_convolve(std::size_t n, double variance, double h, Lattice&& at) {
  const auto w = gauss_weights(variance, h);
  const auto K = static_cast<long>(w.size()) - 1;
  const auto ext = padded_values(n, K, at);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i + static_cast<std::size_t>(K);
    double acc = w[0] * ext[c];
    for (std::size_t k = 1; k < w.size(); ++k) acc += w[k] * (ext[c + k] + ext[c - k]);
    out[i] = acc;
  }
  return out;
}

struct SpectralTable {
  std::size_t first_mode;
  std::size_t modes;
  std::vector<double> basis;  // basis[(k - first_mode) * n + i]
};

std::shared_ptr<const SpectralTable> spectral_table(bool dirichlet, std::size_t n, std::size_t modes) {
  static std::mutex mu;
  static std::map<std::tuple<bool, std::size_t, std::size_t>, std::shared_ptr<const SpectralTable>> cache;
  const auto key = std::make_tuple(dirichlet, n, modes);
  std::lock_guard lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto table = std::make_shared<SpectralTable>();
  table->first_mode = dirichlet ? 1 : 0;
  table->modes = modes;
  const std::size_t count = dirichlet ? modes : modes + 1;
  table->basis.resize(count * n);
  const double m = static_cast<double>(n - 1);
  for (std::size_t c = 0; c < count; ++c) {
    const double k = static_cast<double>(c + table->first_mode);
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = pi * k * static_cast<double>(i) / m;
      table->basis[c * n + i] = dirichlet ? std::sin(theta) : std::cos(theta);
    }
  }
  cache.emplace(key, table);
  return table;
}

SpectralResult spectral_apply(bool dirichlet, std::size_t mode_cap, double t, const GridFunction& f) {
  const Grid& g = f.grid();
  const std::size_t n = g.size();
  const std::size_t modes = std::min(mode_cap, n - 2);
  const auto table = spectral_table(dirichlet, n, modes);
  const double L = g.b() - g.a();
  const double m = static_cast<double>(n - 1);
  const std::size_t count = dirichlet ? modes : modes + 1;

  // DST-I / DCT-I coefficients by the trapezoid rule on the grid.
  std::vector<double> coeff(count);
  for (std::size_t c = 0; c < count; ++c) {
    const double* row = &table->basis[c * n];
    double acc = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) acc += f[i] * row[i];
    if (!dirichlet) acc += 0.5 * (f[0] * row[0] + f[n - 1] * row[n - 1]);
    coeff[c] = 2.0 * acc / m;
  }
  if (!dirichlet) coeff[0] *= 0.5;

  std::vector<double> out(n, 0.0);
  for (std::size_t c = 0; c < count; ++c) {
    const double k = static_cast<double>(c + table->first_mode);
    const double lambda = (k * pi / L) * (k * pi / L);
    const double a = std::exp(-lambda * t) * coeff[c];
    if (a == 0.0) continue;
    const double* row = &table->basis[c * n];
    for (std::size_t i = 0; i < n; ++i) out[i] += a * row[i];
  }
  if (dirichlet) {
    out.front() = 0.0;
    out.back() = 0.0;
  }
  const double kN = static_cast<double>(modes);
  const double tail = std::exp(-(kN * pi / L) * (kN * pi / L) * t) * f.sup_norm();
  return {GridFunction(g, std::move(out), Extension::Unspecified), tail};
}

// e^{M} by scaling and squaring with a Taylor core on ||M||_1 / 2^s <= 0.5.
Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
  const double norm = M.cwiseAbs().colwise().sum().maxCoeff();
  const int s = norm > 0.5 ? static_cast<int>(std::ceil(std::log2(norm / 0.5))) : 0;
  const Eigen::MatrixXd B = M / std::ldexp(1.0, s);
  const auto n = M.rows();
  Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = E;
  for (int k = 1; k <= 40; ++k) {
    term = (term * B) / static_cast<double>(k);
    E += term;
    if (term.cwiseAbs().colwise().sum().maxCoeff() < 1e-18) break;
  }
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

std::shared_ptr<const Eigen::MatrixXd> interval_propagator(const Grid& g, double t) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, std::size_t, double>, std::shared_ptr<const Eigen::MatrixXd>> cache;
  const auto key = std::make_tuple(g.a(), g.b(), g.size(), t);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  const double h2 = g.spacing() * g.spacing();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    A(i, i - 1) = 1.0 / h2;
    A(i, i) = -2.0 / h2;
    A(i, i + 1) = 1.0 / h2;
  }
  auto E = std::make_shared<const Eigen::MatrixXd>(expm(t * A));
  std::lock_guard lock(mu);
  if (cache.size() > 64) cache.clear();
  cache.emplace(key, E);
  return E;
}

// Grid-aligned offset in units of h, when there is one.
std::optional<long> lattice_offset(double shift, double h) {
  const double s = shift / h;
  const double r = std::round(s);
  if (std::abs(s - r) <= 1e-9 * std::max(1.0, std::abs(s))) return static_cast<long>(r);
  return std::nullopt;
}

Extension carried_extension(Extension e) {
  return e == Extension::Reflect2f0 || e == Extension::Analytic ? Extension::Constant : e;
}

GridFunction shift_backend(double t, const GridFunction& f) {
  const Grid& g = f.grid();
  std::vector<double> out(g.size());
  if (const auto m = lattice_offset(t, g.spacing())) {
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = f.at_index(static_cast<long>(i) + *m);
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = f.at(g.point(i) + t);
  }
  if (f.extension() == Extension::Analytic) {
    const FunctionSpec spec = *f.continuation();
    return GridFunction::analytic(g, std::move(out),
                                  FunctionSpec::custom("shift", [spec, t](double x) { return spec(x + t); }));
  }
  return GridFunction(g, std::move(out), carried_extension(f.extension()));
}

GridFunction gauss(double variance, const GridFunction& f) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  auto out = gauss_convolve(g.size(), variance, h, [&](long j) { return f.at_index(j); });
  if (f.extension() != Extension::Analytic) return GridFunction(g, std::move(out), Extension::Constant);
  // the same discrete kernel, centred anywhere
  const FunctionSpec spec = *f.continuation();
  const auto w = gauss_weights(variance, h);
  return GridFunction::analytic(g, std::move(out), FunctionSpec::custom("gauss", [spec, w, h](double x) {
    double acc = w[0] * spec(x);
    for (std::size_t k = 1; k < w.size(); ++k) {
      const double d = static_cast<double>(k) * h;
      acc += w[k] * (spec(x + d) + spec(x - d));
    }
    return acc;
  }));
}

GridFunction stopped_half_line(double t, const GridFunction& f) {
  const Grid& g = f.grid();
  if (g.a() != 0.0) throw DomainError("stopped Brownian motion on the half-line needs a window starting at 0");
  const double f0 = f[0];
  auto out = gauss_convolve(g.size(), t, g.spacing(), [&](long j) {
    return j < 0 ? 2.0 * f0 - f.at_index(-j) : f.at_index(j);
  });
  out[0] = f0;
  return GridFunction(g, std::move(out), Extension::Reflect2f0);
}

GridFunction stopped_interval(double t, const GridFunction& f) {
  const auto E = interval_propagator(f.grid(), t);
  const Eigen::Map<const Eigen::VectorXd> v(f.values().data(), static_cast<Eigen::Index>(f.size()));
  const Eigen::VectorXd r = (*E) * v;
  return GridFunction(f.grid(), std::vector<double>(r.data(), r.data() + r.size()), Extension::Unspecified);
}

std::vector<double> poisson_weights(double mean, std::size_t max_terms) {
  std::vector<double> p;
  if (mean == 0.0) return {1.0};
  const double log_mean = std::log(mean);
  double total = 0.0;
  for (std::size_t k = 0;; ++k) {
    if (k >= max_terms)
      throw ConvergenceError("compound Poisson: tail above 1e-14 after " + std::to_string(max_terms) + " terms");
    const double kd = static_cast<double>(k);
    const double pk = std::exp(-mean + kd * log_mean - std::lgamma(kd + 1.0));
    p.push_back(pk);
    total += pk;
    // past the mode the tail is bounded by a geometric series
    if (kd + 1.0 > mean) {
      const double ratio = mean / (kd + 2.0);
      const double tail = pk * (mean / (kd + 1.0)) / (1.0 - ratio);
      if (tail < kPoissonTail) break;
    }
  }
  for (double& v : p) v /= total;
  return p;
}

GridFunction poisson_backend(const PoissonParams& prm, double t, const GridFunction& f) {
  const Grid& g = f.grid();
  const auto w = poisson_weights(prm.rate * t, prm.max_terms);
  const double shift = prm.drift * t;
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i) + shift;
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * f.at(x + static_cast<double>(k) * prm.jump);
    out[i] = acc;
  }
  GridFunction jumped = [&] {
    if (f.extension() != Extension::Analytic) return GridFunction(g, std::move(out), carried_extension(f.extension()));
    const FunctionSpec spec = *f.continuation();
    const double jump = prm.jump;
    return GridFunction::analytic(g, std::move(out), FunctionSpec::custom("poisson", [spec, w, shift, jump](double x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * spec(x + shift + static_cast<double>(k) * jump);
      return acc;
    }));
  }();
  if (prm.sigma2 > 0.0) return gauss(prm.sigma2 * t, jumped);
  return jumped;
}

GridFunction multiply(const MultiplicationParams& prm, double t, const GridFunction& f) {
  if (!prm.beta) return f;
  const GridFunction& beta = *prm.beta;
  const Grid& g = f.grid();
  const bool aligned = beta.grid() == g;
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double b = aligned ? beta[i] : beta.at(g.point(i));
    out[i] = std::exp(t * b) * f[i];
  }
  if (f.extension() == Extension::Analytic && beta.extension() != Extension::Unspecified) {
    const FunctionSpec spec = *f.continuation();
    return GridFunction::analytic(g, std::move(out), FunctionSpec::custom("weighted", [spec, beta, t](double x) {
      return std::exp(t * beta.at(x)) * spec(x);
    }));
  }
  return GridFunction(g, std::move(out), carried_extension(f.extension()));
}

GridFunction feynman_kac_backend(const FeynmanKacParams& prm, double t, const GridFunction& f) {
  const Grid& g = f.grid();
  const GridFunction& beta = prm.beta;
  const double eps = prm.epsilon;
  const double lag = eps * t;
  auto weight = [beta, eps, lag](double x) { return std::exp(trapezoid(beta, x - lag, x) / eps); };
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i);
    out[i] = weight(x) * f.at(x - lag);
  }
  if (f.extension() == Extension::Analytic) {
    const FunctionSpec spec = *f.continuation();
    return GridFunction::analytic(g, std::move(out), FunctionSpec::custom("feynman-kac", [spec, weight, lag](double x) {
      return weight(x) * spec(x - lag);
    }));
  }
  return GridFunction(g, std::move(out), carried_extension(f.extension()));
}

GridFunction difference(const GridFunction& f, DifferenceOp op) {
  if (op == DifferenceOp::First) return first_difference(f);
  const auto d = second_difference(f);
  std::vector<double> v = d.values;
  const std::size_t n = v.size();
  const double h2 = f.grid().spacing() * f.grid().spacing();
  if (!d.defined.front() && n >= 4) v[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h2;
  if (!d.defined.back() && n >= 4) v[n - 1] = (2 * f[n - 1] - 5 * f[n - 2] + 4 * f[n - 3] - f[n - 4]) / h2;
  if (f.extension() == Extension::Analytic) {
    const FunctionSpec spec = *f.continuation();
    const double h = f.grid().spacing();
    return GridFunction::analytic(f.grid(), std::move(v), FunctionSpec::custom("second difference", [spec, h](double x) {
      return (spec(x - h) - 2.0 * spec(x) + spec(x + h)) / (h * h);
    }));
  }
  return GridFunction(f.grid(), std::move(v), Extension::Constant);
}

}  // namespace

const char* to_string(SemigroupKind k) {
  switch (k) {
    case SemigroupKind::LeftShift: return "left-shift";
    case SemigroupKind::GaussWholeLine: return "gauss-whole-line";
    case SemigroupKind::StoppedBMHalfLine: return "stopped-bm-half-line";
    case SemigroupKind::StoppedBMInterval: return "stopped-bm-interval";
    case SemigroupKind::DirichletHeat: return "dirichlet-heat";
    case SemigroupKind::NeumannHeat: return "neumann-heat";
    case SemigroupKind::CompoundPoisson: return "compound-poisson";
    case SemigroupKind::Multiplication: return "multiplication";
    case SemigroupKind::FeynmanKacTransport: return "feynman-kac-transport";
  }
  return "?";
}

SemigroupEvaluator SemigroupEvaluator::left_shift() { return {SemigroupKind::LeftShift, NoParams{}, {}}; }

SemigroupEvaluator SemigroupEvaluator::gauss_whole_line() {
  return {SemigroupKind::GaussWholeLine, NoParams{}, {}};
}

SemigroupEvaluator SemigroupEvaluator::stopped_bm_half_line() {
  return {SemigroupKind::StoppedBMHalfLine, NoParams{}, {}};
}

SemigroupEvaluator SemigroupEvaluator::stopped_bm_interval() {
  return {SemigroupKind::StoppedBMInterval, NoParams{}, {}};
}

SemigroupEvaluator SemigroupEvaluator::dirichlet_heat(std::size_t modes) {
  if (modes < 1) throw DomainError("dirichlet heat needs at least one mode");
  return {SemigroupKind::DirichletHeat, SpectralParams{modes}, {}};
}

SemigroupEvaluator SemigroupEvaluator::neumann_heat(std::size_t modes) {
  return {SemigroupKind::NeumannHeat, SpectralParams{modes}, {}};
}

SemigroupEvaluator SemigroupEvaluator::compound_poisson(PoissonParams p) {
  if (!(p.rate >= 0.0) || !(p.sigma2 >= 0.0) || !std::isfinite(p.jump) || !std::isfinite(p.drift))
    throw DomainError("compound Poisson: rate and variance must be nonnegative, jump and drift finite");
  return {SemigroupKind::CompoundPoisson, p, {}};
}

SemigroupEvaluator SemigroupEvaluator::multiplication(GridFunction beta) {
  if (beta.dim() != 1) throw DomainError("multiplication coefficient must be 1D");
  // coefficients are grid data: held constant beyond the window
  const double top = beta.max();
  return {SemigroupKind::Multiplication, MultiplicationParams{beta.with_extension(Extension::Constant)},
          {1.0, top}};
}

SemigroupEvaluator SemigroupEvaluator::identity() {
  return {SemigroupKind::Multiplication, MultiplicationParams{}, {1.0, 0.0}};
}

SemigroupEvaluator SemigroupEvaluator::feynman_kac(GridFunction beta, double epsilon) {
  if (beta.dim() != 1) throw DomainError("feynman-kac coefficient must be 1D");
  if (!(epsilon > 0.0)) throw DomainError("feynman-kac needs epsilon > 0");
  const double top = beta.max();
  return {SemigroupKind::FeynmanKacTransport, FeynmanKacParams{beta.with_extension(Extension::Constant), epsilon},
          {1.0, top}};
}

std::string SemigroupEvaluator::name() const {
  std::string s = to_string(kind_);
  if (const auto* sp = std::get_if<SpectralParams>(&params_)) s += "[" + std::to_string(sp->modes) + " modes]";
  if (const auto* fk = std::get_if<FeynmanKacParams>(&params_)) s += "[eps=" + std::to_string(fk->epsilon) + "]";
  if (const auto* m = std::get_if<MultiplicationParams>(&params_); m && !m->beta) s = "identity";
  return s;
}

double SemigroupEvaluator::backend_tolerance() const {
  switch (kind_) {
    case SemigroupKind::LeftShift:
    case SemigroupKind::Multiplication: return 1e-12;
    case SemigroupKind::GaussWholeLine:
    case SemigroupKind::StoppedBMHalfLine: return 1e-8;
    default: return 1e-9;
  }
}

bool SemigroupEvaluator::exact_formula() const {
  switch (kind_) {
    case SemigroupKind::LeftShift:
    case SemigroupKind::Multiplication:
    case SemigroupKind::FeynmanKacTransport:
    case SemigroupKind::CompoundPoisson: return true;
    default: return false;
  }
}

SpectralResult SemigroupEvaluator::apply_with_diagnostics(double t, const GridFunction& f) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError(name() + ": time must be finite and nonnegative");
  if (f.dim() != 1) throw DomainError(name() + ": needs a 1D grid function");
  if (t == 0.0) return {f, 0.0};
  switch (kind_) {
    case SemigroupKind::LeftShift: return {shift_backend(t, f), 0.0};
    case SemigroupKind::GaussWholeLine: return {gauss(t, f), 0.0};
    case SemigroupKind::StoppedBMHalfLine: return {stopped_half_line(t, f), 0.0};
    case SemigroupKind::StoppedBMInterval: return {stopped_interval(t, f), 0.0};
    case SemigroupKind::DirichletHeat:
    case SemigroupKind::NeumannHeat: {
      if (t < kMinSpectralTime)
        throw DomainError(name() + ": t = " + std::to_string(t) + " is below 1e-4 and under-resolved");
      return spectral_apply(kind_ == SemigroupKind::DirichletHeat, std::get<SpectralParams>(params_).modes, t, f);
    }
    case SemigroupKind::CompoundPoisson: return {poisson_backend(std::get<PoissonParams>(params_), t, f), 0.0};
    case SemigroupKind::Multiplication: return {multiply(std::get<MultiplicationParams>(params_), t, f), 0.0};
    case SemigroupKind::FeynmanKacTransport:
      return {feynman_kac_backend(std::get<FeynmanKacParams>(params_), t, f), 0.0};
  }
  throw DomainError("unknown semigroup kind");
}

GridFunction SemigroupEvaluator::apply(double t, const GridFunction& f) const {
  return apply_with_diagnostics(t, f).value;
}

double commutation_defect(const SemigroupEvaluator& ev, double t, const GridFunction& f, DifferenceOp op,
                          DerivativeSource source) {
  const GridFunction lhs = difference(ev.apply(t, f), op);
  GridFunction sf = [&] {
    if (source == DerivativeSource::Stencil) return difference(f, op);
    if (f.extension() != Extension::Analytic)
      throw DomainError("commutation_defect: exact derivatives need an analytic continuation");
    auto d = f.continuation()->derivative();
    if (d && op == DifferenceOp::Second) d = d->derivative();
    if (!d) throw DomainError("commutation_defect: continuation has no closed-form derivative");
    return sample(*d, f.grid());
  }();
  const GridFunction rhs = ev.apply(t, sf);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < lhs.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  return worst;
}

}  // namespace shapelab
