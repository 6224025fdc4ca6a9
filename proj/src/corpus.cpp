#include "shapelab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapelab/error.hpp"

namespace shapelab::corpus {
namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double logistic(double z) { return z > 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

struct Hinges {
  double c0, s0, a, w;
  std::vector<double> knots, jumps;

  double operator()(double x) const {
    double v = c0 + s0 * (x - a);
    for (std::size_t j = 0; j < knots.size(); ++j)
      v += jumps[j] * (w > 0.0 ? w * softplus((x - knots[j]) / w) : std::max(0.0, x - knots[j]));
    return v;
  }
  double slope(double x) const {
    double v = s0;
    for (std::size_t j = 0; j < knots.size(); ++j)
      v += jumps[j] * (w > 0.0 ? logistic((x - knots[j]) / w) : (x > knots[j] ? 1.0 : 0.0));
    return v;
  }
};

Hinges random_hinges(Rng& rng, double a, double b, const ConvexOptions& opt) {
  if (!(b > a)) throw DomainError("corpus: empty interval");
  std::uniform_int_distribution<int> count(opt.min_knots, opt.max_knots);
  std::uniform_real_distribution<double> where(a, b), slope(opt.slope_lo, opt.slope_hi);
  const int m = count(rng);
  std::vector<double> knots(static_cast<std::size_t>(m)), slopes(static_cast<std::size_t>(m) + 1);
  for (auto& k : knots) k = where(rng);
  for (auto& s : slopes) s = slope(rng);
  std::sort(knots.begin(), knots.end());
  std::sort(slopes.begin(), slopes.end());
  Hinges h{0.0, slopes[0], a, opt.smoothing, knots, {}};
  for (std::size_t j = 0; j < knots.size(); ++j) h.jumps.push_back(slopes[j + 1] - slopes[j]);
  return h;
}

FunctionSpec to_spec(const Hinges& h, const char* name) {
  return FunctionSpec::custom(name, [h](double x) { return h(x); }, [h](double x) { return h.slope(x); });
}

}  // namespace

FunctionSpec monotone_sigmoids(Rng& rng, const SigmoidOptions& opt) {
  std::uniform_int_distribution<int> count(1, std::max(1, opt.max_terms));
  std::uniform_real_distribution<double> amp(0.0, opt.amplitude), center(opt.center_lo, opt.center_hi),
      width(opt.width_lo, opt.width_hi), offset(opt.offset_lo, opt.offset_hi);
  struct Term {
    double a, c, w;
  };
  std::vector<Term> terms(static_cast<std::size_t>(count(rng)));
  for (auto& t : terms) {
    t.a = opt.amplitude - amp(rng);  // in (0, amplitude]
    t.c = center(rng);
    t.w = width(rng);
  }
  const double off = opt.offset_hi > opt.offset_lo ? offset(rng) : opt.offset_lo;
  return FunctionSpec::custom(
      "sigmoids",
      [terms, off](double x) {
        double v = off;
        for (const auto& t : terms) v += t.a * 0.5 * (1.0 - std::tanh((x - t.c) / t.w));
        return v;
      },
      [terms](double x) {
        double v = 0.0;
        for (const auto& t : terms) {
          const double th = std::tanh((x - t.c) / t.w);
          v -= t.a * 0.5 * (1.0 - th * th) / t.w;
        }
        return v;
      });
}

FunctionSpec convex_slopes(Rng& rng, double a, double b, const ConvexOptions& opt) {
  std::uniform_real_distribution<double> level(-1.0, 1.0);
  Hinges h = random_hinges(rng, a, b, opt);
  h.c0 = level(rng);
  return to_spec(h, "convex slopes");
}

FunctionSpec negative_convex(Rng& rng, double a, double b, const ConvexOptions& opt) {
  std::uniform_real_distribution<double> gap(0.0, 1.0);
  Hinges h = random_hinges(rng, a, b, opt);
  // a convex function peaks at an endpoint
  const double top = std::max(h(a), h(b));
  h.c0 = -top - (1.0 - gap(rng));
  return to_spec(h, "negative convex");
}

GridFunction monotone_increments(Rng& rng, const Grid& grid, double max_drop, double flat_fraction) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = grid.size();
  std::vector<double> v(n);
  v[0] = 2.0 * u(rng) - 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const bool edge = i <= 2 || i + 2 >= n;
    const double coin = u(rng), drop = u(rng);
    v[i] = v[i - 1] - (edge || coin < flat_fraction ? 0.0 : max_drop * drop);
  }
  return GridFunction(grid, std::move(v));
}

}  // namespace shapelab::corpus
