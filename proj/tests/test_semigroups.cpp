#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <future>
#include <numbers>
#include <random>

#include "doctest.h"
#include "shapelab/corpus.hpp"
#include "shapelab/error.hpp"
#include "shapelab/semigroups.hpp"
#include "shapelab/shape.hpp"

using namespace shapelab;
using std::numbers::pi;

namespace {

const Grid kLine(-15.0, 15.0, 601);
const Grid kHalf(0.0, 30.0, 601);
const Grid kUnit(0.0, 1.0, 101);
const Grid kPi(0.0, pi, 257);

GridFunction beta_decreasing(const Grid& g) {
  return sample(FunctionSpec::tanh(0.0, -0.5, 0.5, 0.0), g);
}

struct Case {
  SemigroupEvaluator ev;
  Grid grid;
};

std::vector<Case> catalogue() {
  return {
      {SemigroupEvaluator::left_shift(), kLine},
      {SemigroupEvaluator::gauss_whole_line(), kLine},
      {SemigroupEvaluator::stopped_bm_half_line(), kHalf},
      {SemigroupEvaluator::stopped_bm_interval(), kUnit},
      {SemigroupEvaluator::dirichlet_heat(), kPi},
      {SemigroupEvaluator::neumann_heat(), kPi},
      {SemigroupEvaluator::compound_poisson({0.5, 0.37, 0.0, 0.0}), kLine},
      {SemigroupEvaluator::compound_poisson({2.0, 0.37, 0.2, -0.3}), kLine},
      {SemigroupEvaluator::multiplication(beta_decreasing(kLine)), kLine},
      {SemigroupEvaluator::feynman_kac(beta_decreasing(kLine), 0.5), kLine},
  };
}

// Smooth data, flat to rounding at the window edges of the whole-line grids.
FunctionSpec smooth_datum(std::mt19937_64& rng, const Grid& g) {
  corpus::SigmoidOptions opt;
  const double mid = 0.5 * (g.a() + g.b()), half = 0.5 * (g.b() - g.a());
  opt.center_lo = mid - 0.2 * half;
  opt.center_hi = mid + 0.2 * half;
  opt.width_lo = 0.05 * half;
  opt.width_hi = 0.06 * half;
  return corpus::monotone_sigmoids(rng, opt);
}

}  // namespace

TEST_CASE("closed-form examples") {
  SUBCASE("sine is a Dirichlet eigenfunction") {
    const Grid g(0, pi, 513);
    const auto f = sample(FunctionSpec::trig(1, 1), g);
    const auto out = SemigroupEvaluator::dirichlet_heat().apply(1.0, f);
    CHECK(sup_distance(out, scaled(f, std::exp(-1.0))) < 1e-12);
  }
  SUBCASE("zero coefficient leaves f unchanged") {
    const auto f = sample(FunctionSpec::trig(1, 2), kLine);
    const auto ev = SemigroupEvaluator::multiplication(sample(FunctionSpec::constant(0.0), kLine));
    for (double t : {0.1, 1.0, 7.0}) CHECK(sup_distance(ev.apply(t, f), f) == 0.0);
    CHECK(sup_distance(SemigroupEvaluator::identity().apply(3.0, f), f) == 0.0);
  }
  SUBCASE("Feynman-Kac with constant beta") {
    const double c = 0.5, t = 2.0;
    const auto beta = sample(FunctionSpec::constant(c), kLine);
    const auto one = sample(FunctionSpec::constant(1.0), kLine);
    for (double eps : {1.0, 0.1}) {
      // Oracle: midpoint quadrature of the exponent, independent of the library.
      double expo = 0.0;
      const int m = 1000;
      for (int k = 0; k < m; ++k) expo += c * (eps * t / m);
      expo /= eps;
      const auto out = SemigroupEvaluator::feynman_kac(beta, eps).apply(t, one);
      for (double v : out.values()) REQUIRE(v == doctest::Approx(std::exp(expo)).epsilon(1e-12));
      CHECK(out[300] == doctest::Approx(std::numbers::e).epsilon(1e-12));
    }
  }
  SUBCASE("compound Poisson conserves constants") {
    const auto one = sample(FunctionSpec::constant(1.0), kLine);
    for (double rate : {0.5, 2.0, 40.0})
      for (double t : {0.1, 1.0, 5.0}) {
        const auto out = SemigroupEvaluator::compound_poisson({rate, 0.37}).apply(t, one);
        for (double v : out.values()) REQUIRE(v == doctest::Approx(1.0).epsilon(1e-14));
      }
  }
  SUBCASE("stopped half-line keeps constants") {
    const auto c = sample(FunctionSpec::constant(-2.5), kHalf);
    const auto out = SemigroupEvaluator::stopped_bm_half_line().apply(0.7, c);
    for (double v : out.values()) CHECK(v == doctest::Approx(-2.5).epsilon(1e-14));
  }
  SUBCASE("Gaussian data under the heat kernel") {
    const auto f = sample(FunctionSpec::gaussian(1.0, 0.0, 1.0), kLine);
    const double t = 0.5;
    const auto out = SemigroupEvaluator::gauss_whole_line().apply(t, f);
    // Oracle: variances add, N(0,1) * N(0,t) = N(0, 1+t).
    const auto expect = sample(FunctionSpec::gaussian(1.0 / std::sqrt(1 + t), 0.0, std::sqrt(1 + t)), kLine);
    CHECK(sup_distance(out, expect) < 1e-10);
  }
  SUBCASE("stopped half-line equals the whole line on odd data") {
    const auto spec = FunctionSpec::tanh(0, 1, 0.8, 0);
    const auto out = SemigroupEvaluator::stopped_bm_half_line().apply(0.3, sample(spec, kHalf));
    const auto ref = SemigroupEvaluator::gauss_whole_line().apply(0.3, sample(spec, Grid(-30, 30, 1201)));
    for (std::size_t i = 0; i < kHalf.size(); ++i) REQUIRE(out[i] == doctest::Approx(ref[600 + i]).epsilon(1e-12));
  }
  SUBCASE("stopped interval against Eigen's matrix exponential") {
    const Grid g(0, 1, 41);
    const auto f = sample(FunctionSpec::trig(1.0, 3.0, 0.2, 0.5), g);
    const double h2 = g.spacing() * g.spacing();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(41, 41);
    for (int i = 1; i < 40; ++i) {
      A(i, i - 1) = A(i, i + 1) = 1 / h2;
      A(i, i) = -2 / h2;
    }
    for (double t : {0.01, 0.1, 1.0}) {
      const Eigen::MatrixXd E = (t * A).exp();
      Eigen::VectorXd v(41);
      for (int i = 0; i < 41; ++i) v(i) = f[i];
      const Eigen::VectorXd r = E * v;
      const auto out = SemigroupEvaluator::stopped_bm_interval().apply(t, f);
      for (int i = 0; i < 41; ++i) REQUIRE(out[i] == doctest::Approx(r(i)).epsilon(1e-10).scale(1.0));
      CHECK(out[0] == f[0]);
      CHECK(out[40] == f[40]);
    }
  }
}

TEST_CASE("argument checks") {
  const auto f = sample(FunctionSpec::constant(1.0), kLine);
  for (const auto& c : catalogue()) CHECK_THROWS_AS(c.ev.apply(-0.1, sample(FunctionSpec::constant(1.0), c.grid)), DomainError);
  CHECK_THROWS_AS(SemigroupEvaluator::stopped_bm_half_line().apply(0.1, f), DomainError);
  CHECK_THROWS_AS(SemigroupEvaluator::dirichlet_heat().apply(5e-5, sample(FunctionSpec::constant(1.0), kPi)),
                  DomainError);
  CHECK_THROWS_AS(SemigroupEvaluator::compound_poisson({50.0, 0.37, 0, 0, 3}).apply(1.0, f), ConvergenceError);
  CHECK_THROWS_AS(SemigroupEvaluator::feynman_kac(beta_decreasing(kLine), 0.0), DomainError);
  const GridFunction opaque(kLine, std::vector<double>(601, 1.0), Extension::Unspecified);
  CHECK_THROWS_AS(SemigroupEvaluator::gauss_whole_line().apply(0.5, opaque), DomainError);
}

TEST_CASE("apply(0) is the identity") {
  std::mt19937_64 rng(1);
  for (const auto& c : catalogue()) {
    const auto f = sample(smooth_datum(rng, c.grid), c.grid);
    const auto out = c.ev.apply(0.0, f);
    for (std::size_t i = 0; i < f.size(); ++i) REQUIRE(out[i] == f[i]);
  }
}

TEST_CASE("semigroup law within ten times the backend tolerance") {
  std::mt19937_64 rng(2);
  for (const auto& c : catalogue()) {
    INFO(c.ev.name());
    for (int trial = 0; trial < 3; ++trial) {
      const auto f = sample(smooth_datum(rng, c.grid), c.grid);
      for (double t : {0.1, 0.5})
        for (double s : {0.1, 0.5}) {
          const auto once = c.ev.apply(t + s, f);
          const auto twice = c.ev.apply(t, c.ev.apply(s, f));
          REQUIRE(sup_distance(once, twice) <= 10.0 * c.ev.backend_tolerance() * std::max(1.0, f.sup_norm()));
        }
    }
  }
}

TEST_CASE("positivity and growth bounds") {
  std::mt19937_64 rng(3);
  for (const auto& c : catalogue()) {
    INFO(c.ev.name());
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = sample(smooth_datum(rng, c.grid), c.grid);
      for (double t : {0.1, 1.0, 5.0}) {
        const auto out = c.ev.apply(t, f);
        REQUIRE(out.min() >= -1e-12);
        const auto& gr = c.ev.growth();
        REQUIRE(out.sup_norm() <= gr.M * std::exp(gr.omega * t) * f.sup_norm() * (1 + 1e-8));
      }
    }
  }
}

TEST_CASE("declared growth") {
  CHECK(SemigroupEvaluator::gauss_whole_line().growth().omega == 0.0);
  const auto beta = sample(FunctionSpec::polynomial({0.2, 0.1}), Grid(0, 1, 11));
  CHECK(SemigroupEvaluator::multiplication(beta).growth().omega == doctest::Approx(0.3));
  CHECK(SemigroupEvaluator::feynman_kac(beta, 1.0).growth().omega == doctest::Approx(0.3));
}

TEST_CASE("monotone preservation") {
  std::mt19937_64 rng(4);
  const auto mono = ConeSpec::scaled(ConeKind::MonotoneNonIncreasing);
  for (const auto& c : catalogue()) {
    const auto k = c.ev.kind();
    if (k == SemigroupKind::StoppedBMInterval || k == SemigroupKind::DirichletHeat || k == SemigroupKind::NeumannHeat)
      continue;
    INFO(c.ev.name());
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = sample(smooth_datum(rng, c.grid), c.grid);
      for (double t : {0.1, 1.0, 5.0}) REQUIRE(is_member(c.ev.apply(t, f), mono).member);
    }
  }
}

TEST_CASE("convexity preservation and its failures") {
  std::mt19937_64 rng(5);
  const auto convex = ConeSpec::scaled(ConeKind::Convex);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = corpus::convex_slopes(rng, 0.0, 1.0, {});
    const auto f = sample(spec, kUnit);
    for (double t : {0.01, 0.1, 1.0})
      REQUIRE(is_member(SemigroupEvaluator::stopped_bm_interval().apply(t, f), convex).member);
    const auto wide = sample(spec, kLine);
    REQUIRE(is_member(SemigroupEvaluator::left_shift().apply(0.37, wide), convex).member);
  }
  SUBCASE("Dirichlet heat keeps negative convex data") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = sample(corpus::negative_convex(rng, 0.0, pi, {}), kPi);
      for (double t : {0.01, 0.1, 1.0})
        REQUIRE(is_member(SemigroupEvaluator::dirichlet_heat().apply(t, f), ConeSpec::scaled(ConeKind::NegativeConvex))
                    .member);
    }
  }
  SUBCASE("Dirichlet heat of x^2 is not convex") {
    const auto f = sample(FunctionSpec::polynomial({0, 0, 1}), kPi);
    Trajectory traj{{0.0, f}};
    for (double t : {0.01, 0.05, 0.1}) traj.emplace_back(t, SemigroupEvaluator::dirichlet_heat().apply(t, f));
    const auto rep = project_witnesses(traj, convex);
    CHECK(rep.rows[0].second.member);
    for (std::size_t k = 1; k < rep.rows.size(); ++k) CHECK_FALSE(rep.rows[k].second.member);
  }
  SUBCASE("Neumann heat breaks convexity") {
    const auto f = sample(FunctionSpec::polynomial({pi * pi / 4, -pi, 1}), kPi);
    CHECK(is_member(f, convex).member);
    CHECK_FALSE(is_member(SemigroupEvaluator::neumann_heat().apply(0.1, f), convex).member);
  }
}

TEST_CASE("spectral diagnostics") {
  const auto f = sample(FunctionSpec::polynomial({0, 0, 1}), kPi);
  const auto r = SemigroupEvaluator::dirichlet_heat(16).apply_with_diagnostics(0.01, f);
  CHECK(r.tail_bound == doctest::Approx(std::exp(-256 * 0.01) * pi * pi));
  // modes beyond n - 2 are clamped
  const Grid tiny(0, pi, 9);
  const auto s = sample(FunctionSpec::trig(1, 3), tiny);
  CHECK(sup_distance(SemigroupEvaluator::dirichlet_heat(500).apply(0.2, s), scaled(s, std::exp(-9 * 0.2))) < 1e-12);
}

TEST_CASE("general interval spectral scaling") {
  // sin(pi (x - a) / L) decays at rate (pi / L)^2 on [a, a + L]
  const Grid g(1.0, 3.0, 129);
  const auto f = sample(FunctionSpec::trig(1.0, pi / 2, -pi / 2), g);
  const auto out = SemigroupEvaluator::dirichlet_heat().apply(0.3, f);
  CHECK(sup_distance(out, scaled(f, std::exp(-(pi / 2) * (pi / 2) * 0.3))) < 1e-12);
}

TEST_CASE("commutation defect") {
  const auto bump = FunctionSpec::gaussian(1.0, 0.0, 1.0);
  SUBCASE("shift commutes with the stencils") {
    const auto f = sample(FunctionSpec::trig(1.0, 0.7, 0.1), kLine);
    CHECK(commutation_defect(SemigroupEvaluator::left_shift(), 0.37, f, DifferenceOp::First) <= 1e-10);
    CHECK(commutation_defect(SemigroupEvaluator::left_shift(), 1.0, f, DifferenceOp::Second) <= 1e-10);
  }
  SUBCASE("Gaussian convolution: O(h^2) against exact derivatives") {
    const Grid coarse(-12, 12, 241), fine(-12, 12, 481);
    const auto ev = SemigroupEvaluator::gauss_whole_line();
    const double d1 = commutation_defect(ev, 0.5, sample(bump, coarse), DifferenceOp::First, DerivativeSource::Exact);
    const double d2 = commutation_defect(ev, 0.5, sample(bump, fine), DifferenceOp::First, DerivativeSource::Exact);
    CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.05));
  }
  SUBCASE("multiplication does not commute") {
    const auto f = sample(bump, kLine);
    const auto ev = SemigroupEvaluator::multiplication(sample(FunctionSpec::polynomial({0, 0.3}), kLine));
    CHECK(commutation_defect(ev, 1.0, f, DifferenceOp::First) > 0.1);
  }
}

TEST_CASE("concurrent spectral evaluation matches sequential") {
  std::vector<Grid> grids;
  for (std::size_t n : {65, 129, 257, 513}) grids.emplace_back(0, pi, n);
  const auto ev = SemigroupEvaluator::neumann_heat();
  std::vector<GridFunction> seq;
  for (const auto& g : grids) seq.push_back(ev.apply(0.1, sample(FunctionSpec::polynomial({0, 0, 1}), g)));
  std::vector<std::future<GridFunction>> jobs;
  for (int rep = 0; rep < 4; ++rep)
    for (const auto& g : grids)
      jobs.push_back(std::async(std::launch::async, [&ev, g] {
        return ev.apply(0.1, sample(FunctionSpec::polynomial({0, 0, 1}), g));
      }));
  for (std::size_t k = 0; k < jobs.size(); ++k) CHECK(sup_distance(jobs[k].get(), seq[k % grids.size()]) == 0.0);
}
