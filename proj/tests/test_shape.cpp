#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "shapelab/error.hpp"
#include "shapelab/shape.hpp"

using namespace shapelab;
using std::numbers::pi;

namespace {

GridFunction random_monotone(std::mt19937_64& rng, const Grid& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = g.size();
  std::vector<double> v(n);
  v[0] = 2.0 * u(rng) - 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    // flat edges keep the one-sided endpoint stencils non-positive
    const bool edge = i <= 2 || i >= n - 2;
    const double step = edge || u(rng) < 0.3 ? 0.0 : 0.05 * u(rng);
    v[i] = v[i - 1] - step;
  }
  return GridFunction(g, v);
}

}  // namespace

TEST_CASE("membership examples") {
  const auto ex = sample(FunctionSpec::exponential(1.0, -1.0), Grid(0, 5, 101));
  CHECK(is_member(ex, ConeSpec::scaled(ConeKind::MonotoneNonIncreasing)).member);

  const auto sq = sample(FunctionSpec::polynomial({0, 0, 1}), Grid(-1, 1, 51));
  CHECK(is_member(sq, ConeSpec::scaled(ConeKind::Convex)).member);

  const auto s = sample(FunctionSpec::trig(1, 1), Grid(0, pi, 101));
  const auto r = is_member(s, ConeSpec::scaled(ConeKind::Convex));
  CHECK_FALSE(r.member);
  REQUIRE(r.witness);
  CHECK(r.witness->x == doctest::Approx(pi / 2).epsilon(0.02));
  CHECK(r.worst_violation > r.tol_used);

  const Grid g2(0, 1, 21);
  const auto bowl = sample(FunctionSpec2D::polynomial({{-4, 0, 1}, {0}, {1}}), g2, g2);
  const auto hr = is_member(bowl, ConeSpec::scaled(ConeKind::HessianPSD));
  CHECK(hr.member);
  CHECK_FALSE(hr.witness);
  CHECK(is_member(scaled(bowl, -1.0), ConeSpec::scaled(ConeKind::Positive)).member);
}

TEST_CASE("membership rejects dimension mismatch") {
  const Grid g(0, 1, 5);
  const auto f1 = sample(FunctionSpec::constant(1.0), g);
  const auto f2 = sample(FunctionSpec2D::polynomial({{1}}), g, g);
  CHECK_THROWS_AS(is_member(f1, ConeSpec::scaled(ConeKind::HessianPSD)), DomainError);
  CHECK_THROWS_AS(is_member(f2, ConeSpec::scaled(ConeKind::Convex)), DomainError);
  CHECK(is_member(f2, ConeSpec::scaled(ConeKind::Positive)).member);
}

TEST_CASE("tolerance policy") {
  const auto f = sample(FunctionSpec::constant(-3.0), Grid(0, 1, 11));
  CHECK(cone_tolerance(f, ConeSpec::scaled(ConeKind::Convex)) == doctest::Approx(10 * 0.01 * 3.0));
  CHECK(cone_tolerance(f, ConeSpec::scaled(ConeKind::Positive)) == 1e-9);
  CHECK(cone_tolerance(f, ConeSpec::absolute(ConeKind::Convex, 0.0)) == 0.0);
}

TEST_CASE("exact quadratics at tol 0 on every grid") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double a = u(rng);
    const Grid g(a, a + 0.1 + std::abs(u(rng)), 3 + trial % 40);
    const auto p = sample(FunctionSpec::polynomial({0, 0, 1}), g);
    const auto m = sample(FunctionSpec::polynomial({0, 0, -1}), g);
    REQUIRE(is_member(p, ConeSpec::absolute(ConeKind::Convex, 0.0)).member);
    REQUIRE_FALSE(is_member(m, ConeSpec::absolute(ConeKind::Convex, 0.0)).member);
  }
}

TEST_CASE("discrete cones are convex cones") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const Grid g(-1, 1, 81);
  for (int trial = 0; trial < 100; ++trial) {
    const double c1 = u(rng), c2 = u(rng), s1 = u(rng), s2 = u(rng);
    const auto f = sample(FunctionSpec::poly_exp({c1}, {0, s1}), g);            // convex, positive
    const auto h = sample(FunctionSpec::polynomial({-c2, 0.5 * s2, c2}), g);    // convex
    const double al = u(rng), be = u(rng);
    const auto combo = axpy(al, f, scaled(h, be));
    for (auto kind : {ConeKind::Convex}) {
      REQUIRE(is_member(f, ConeSpec::scaled(kind)).member);
      REQUIRE(is_member(h, ConeSpec::scaled(kind)).member);
      REQUIRE(is_member(combo, ConeSpec::scaled(kind)).member);
      REQUIRE(is_member(scaled(f, 1.0 + u(rng)), ConeSpec::scaled(kind)).member);
    }
    const auto d1 = sample(FunctionSpec::tanh(0, -c1, 1 + s1, 0), g);
    const auto d2 = sample(FunctionSpec::exponential(c2, -s2), g);
    const auto mono = ConeSpec::absolute(ConeKind::MonotoneNonIncreasing, 1e-12);
    REQUIRE(is_member(axpy(al, d1, scaled(d2, be)), mono).member);
  }
}

TEST_CASE("negative convex members negate to positive members") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const Grid g(0, pi, 65);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = u(rng);
    // c x (x - pi) is negative convex on [0, pi]
    const auto f = sample(FunctionSpec::polynomial({0, -c * pi, c}), g);
    REQUIRE(is_member(f, ConeSpec::scaled(ConeKind::NegativeConvex)).member);
    REQUIRE(is_member(scaled(f, -1.0), ConeSpec::scaled(ConeKind::Positive)).member);
  }
}

TEST_CASE("project_witnesses") {
  const Grid g(-1, 1, 41);
  const auto sq = sample(FunctionSpec::polynomial({0, 0, 1}), g);
  Trajectory traj;
  for (double t : {0.0, 0.5, 1.0}) traj.emplace_back(t, sq);
  CHECK(project_witnesses(traj, ConeSpec::scaled(ConeKind::Convex)).all_member);

  traj[1].second = scaled(sq, -1.0);
  const auto rep = project_witnesses(traj, ConeSpec::scaled(ConeKind::Convex));
  CHECK_FALSE(rep.all_member);
  CHECK(rep.rows[0].second.member);
  CHECK_FALSE(rep.rows[1].second.member);
  CHECK(rep.rows[2].second.member);

  CHECK_THROWS_AS(project_witnesses({}, ConeSpec::scaled(ConeKind::Convex)), DomainError);
  traj.emplace_back(2.0, sample(FunctionSpec::constant(0.0), Grid(-1, 1, 21)));
  CHECK_THROWS_AS(project_witnesses(traj, ConeSpec::scaled(ConeKind::Convex)), DomainError);

  std::ostringstream os;
  write_csv(os, rep);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,member,worst_violation,witness_x,tol");
  std::getline(is, line);
  CHECK(line.rfind("0,1,0,,", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("0.5,0,", 0) == 0);
}

TEST_CASE("approximate_monotone") {
  SUBCASE("constant is reproduced exactly") {
    const auto f = sample(FunctionSpec::constant(0.7), Grid(0, 1, 33));
    const auto r = approximate_monotone(f, 0.1);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(r.g[i] == 0.7);
    CHECK_FALSE(r.edges_not_flat);
  }
  SUBCASE("f = -x with eps 0.1 against the cosine-arc formula") {
    const Grid g(0, 1, 101);
    const auto f = sample(FunctionSpec::polynomial({0, -1}), g);
    const auto r = approximate_monotone(f, 0.1);
    CHECK(r.nodes.size() >= 11);
    CHECK(r.edges_not_flat);
    for (std::size_t k : r.nodes) CHECK(r.g[k] == f[k]);
    CHECK(sup_distance(f, r.g) < 0.1);
    // Oracle: evaluate the arc directly from the node list on a dense grid.
    double prev = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= 4000; ++m) {
      const double x = m / 4000.0;
      std::size_t k = 0;
      while (k + 2 < r.nodes.size() && g.point(r.nodes[k + 1]) <= x) ++k;
      const double x0 = g.point(r.nodes[k]), x1 = g.point(r.nodes[k + 1]);
      const double y0 = -x0, y1 = -x1;
      const double expect = y1 + (y0 - y1) * 0.5 * (1 + std::cos(pi * (x - x0) / (x1 - x0)));
      const double got = r.g.at(x);
      REQUIRE(got == doctest::Approx(expect).epsilon(1e-14));
      REQUIRE(std::abs(got + x) < 0.1);
      REQUIRE(got <= prev);
      prev = got;
    }
  }
  SUBCASE("steep sigmoid, dense verification") {
    const Grid g(-2, 2, 401);
    const auto spec = FunctionSpec::tanh(0.5, -0.5, 10.0, 0.0);
    const auto f = sample(spec, g);
    const auto r = approximate_monotone(f, 0.05);
    CHECK(sup_distance(f, r.g) < 0.05);
    CHECK_FALSE(r.edges_not_flat);
    double prev = r.g.at(-2.5), worst = 0.0, slope_jump = 0.0;
    const double dx = 1e-4;
    for (int m = 0; m <= 40000; ++m) {
      const double x = -2 + m * dx;
      const double v = r.g.at(x);
      REQUIRE(v <= prev);
      prev = v;
      worst = std::max(worst, std::abs(v - spec(x)));
    }
    CHECK(worst < 0.05);
    // C^1: one-sided slopes agree at every node
    for (std::size_t k : r.nodes) {
      const double x = g.point(k), e = 1e-7;
      const double left = (r.g.at(x) - r.g.at(x - e)) / e, right = (r.g.at(x + e) - r.g.at(x)) / e;
      slope_jump = std::max(slope_jump, std::abs(left - right));
    }
    CHECK(slope_jump < 1e-3);
  }
  SUBCASE("increasing input is rejected with a witness") {
    const auto f = sample(FunctionSpec::polynomial({0, 0, 1}), Grid(0, 1, 11));
    try {
      approximate_monotone(f, 0.1);
      FAIL("expected precondition failure");
    } catch (const PreconditionFailure& e) {
      CHECK(e.witness_x() >= 0.0);
    }
  }
  SUBCASE("seeded corpus: exact non-increase and eps-closeness") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ue(0.02, 0.2);
    const Grid g(0, 1, 201);
    for (int trial = 0; trial < 50; ++trial) {
      const auto f = random_monotone(rng, g);
      const double eps = ue(rng);
      const auto r = approximate_monotone(f, eps);
      const auto d = first_difference(r.g);
      for (double v : d.values()) REQUIRE(v <= 0.0);
      REQUIRE(sup_distance(f, r.g) < eps);
    }
  }
}

TEST_CASE("approximate_convex") {
  SUBCASE("kink at a mesh node is reproduced") {
    const Grid g(0, 1, 11);
    const auto f = sample(FunctionSpec::piecewise_linear({0, 0.5, 1}, {0.5, 0, 0.5}), g);
    const auto r = approximate_convex(f, {0, 5, 10}, 0.0);
    for (std::size_t i = 0; i < 11; ++i) CHECK(r[i] == doctest::Approx(f[i]).epsilon(1e-15));
  }
  SUBCASE("chord error of x^2 is H^2/4") {
    const Grid g(0, 1, 101);
    const auto f = sample(FunctionSpec::polynomial({0, 0, 1}), g);
    std::vector<std::size_t> mesh;
    for (std::size_t i = 0; i <= 100; i += 10) mesh.push_back(i);
    const auto r = approximate_convex(f, mesh, 0.0);
    double worst = 0.0;
    for (int m = 0; m <= 10000; ++m) {
      const double x = m / 10000.0;
      worst = std::max(worst, r.at(x) - x * x);
    }
    // Oracle: a chord over a cell of width H sits H^2/8 * f'' above the
    // midpoint; f'' = 2 here.
    CHECK(worst == doctest::Approx(0.1 * 0.1 / 8 * 2).epsilon(1e-9));
    for (std::size_t k : mesh) CHECK(r[k] == f[k]);
  }
  SUBCASE("constant stays constant") {
    const auto f = sample(FunctionSpec::constant(2.5), Grid(0, 1, 21));
    const auto r = approximate_convex(f, {0, 7, 20}, 0.05);
    for (double v : r.values()) CHECK(v == doctest::Approx(2.5).epsilon(1e-15));
  }
  SUBCASE("corner blend") {
    const Grid g(0, 1, 201);
    const auto f = sample(FunctionSpec::polynomial({0, -1, 1}), g);  // x^2 - x: zero at both ends
    const std::vector<std::size_t> mesh{0, 40, 80, 120, 160, 200};
    const double r = 0.05;
    const auto out = approximate_convex(f, mesh, r);
    CHECK(is_member(out, ConeSpec::scaled(ConeKind::Convex)).member);
    CHECK(out[0] == 0.0);
    CHECK(out[200] == 0.0);
    const auto d2 = second_difference(out);
    CHECK(std::abs(d2.values.front()) < 1e-10);
    CHECK(std::abs(d2.values.back()) < 1e-10);
    // matches f at mesh nodes when sampled outside the blend windows
    const auto plain = approximate_convex(f, mesh, 0.0);
    for (std::size_t i = 0; i < 201; ++i) {
      const double x = g.point(i);
      bool inside = false;
      for (std::size_t k = 1; k + 1 < mesh.size(); ++k) inside = inside || std::abs(x - g.point(mesh[k])) < r;
      if (!inside) CHECK(out[i] == doctest::Approx(plain[i]).epsilon(1e-14));
    }
    // C^1 across the blend edges
    for (std::size_t k = 1; k + 1 < mesh.size(); ++k)
      for (double edge : {g.point(mesh[k]) - r, g.point(mesh[k]) + r}) {
        const double e = 1e-7;
        const double left = (out.at(edge) - out.at(edge - e)) / e;
        const double right = (out.at(edge + e) - out.at(edge)) / e;
        CHECK(std::abs(left - right) < 1e-5);
      }
  }
  SUBCASE("rejections") {
    const Grid g(0, 1, 101);
    const auto f = sample(FunctionSpec::polynomial({0, 0, 1}), g);
    try {
      approximate_convex(f, {0, 30, 40, 100}, 0.06);
      FAIL("expected overlap rejection");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("30 and 40") != std::string::npos);
    }
    CHECK_THROWS_AS(approximate_convex(f, {0, 50}, 0.0), DomainError);
    CHECK_THROWS_AS(approximate_convex(sample(FunctionSpec::trig(1, 3), g), {0, 50, 100}, 0.0),
                    PreconditionFailure);
  }
  SUBCASE("seeded corpus: bit-exact nodes and convex output") {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const Grid g(-1, 1, 201);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> slopes(6);
      for (auto& s : slopes) s = u(rng);
      std::sort(slopes.begin(), slopes.end());
      std::vector<double> xs{-1.0}, ys{u(rng)};
      for (std::size_t k = 0; k < slopes.size(); ++k) {
        xs.push_back(-1.0 + 2.0 * (k + 1) / slopes.size());
        ys.push_back(ys.back() + slopes[k] * (xs.back() - xs[xs.size() - 2]));
      }
      const auto f = sample(FunctionSpec::piecewise_linear(xs, ys), g);
      std::vector<std::size_t> mesh{0};
      std::size_t step = 3 + static_cast<std::size_t>(trial % 17);
      while (mesh.back() + step < 200) mesh.push_back(mesh.back() + step);
      mesh.push_back(200);
      const auto out = approximate_convex(f, mesh, 0.0);
      for (std::size_t k : mesh) REQUIRE(out[k] == f[k]);
      REQUIRE(is_member(out, ConeSpec::scaled(ConeKind::Convex)).member);
      const auto d2 = second_difference(out);
      REQUIRE(std::abs(d2.values.front()) < 1e-10);
      REQUIRE(std::abs(d2.values.back()) < 1e-10);
    }
  }
}

TEST_CASE("approximate_convex_2d") {
  const Grid g(0, 1, 41);
  SUBCASE("linear is unchanged") {
    const auto f = sample(FunctionSpec2D::polynomial({{0.3, -1.2}, {2.0}}), g, g);
    const auto r = approximate_convex_2d(f, 0.1);
    CHECK(sup_distance(f, r) < 1e-12);
    const auto plain = approximate_convex_2d(f.with_extension(Extension::Constant), 0.1);
    CHECK(sup_distance(f, plain) < 1e-12);
  }
  SUBCASE("constant is unchanged") {
    const auto f = sample(FunctionSpec2D::polynomial({{4.0}}), g, g);
    CHECK(sup_distance(f, approximate_convex_2d(f, 0.1)) < 1e-12);
  }
  SUBCASE("x^2 + y^2 shifts by the bump's second moment") {
    const Grid fine(0, 1, 101);
    const double r = 0.1;
    const auto f = sample(FunctionSpec2D::polynomial({{0, 0, 1}, {0}, {1}}), fine, fine);
    const auto out = approximate_convex_2d(f, r);
    // Oracle: polar quadrature of rho(s) = exp(-1/(1 - s^2/r^2)); the
    // convolution of |x|^2 adds int rho |y|^2 / int rho.
    double num = 0.0, den = 0.0;
    const int m = 200000;
    for (int k = 1; k < m; ++k) {
      const double s = r * k / m;
      const double rho = std::exp(-1.0 / (1.0 - (s * s) / (r * r)));
      num += rho * s * s * s;
      den += rho * s;
    }
    const double shift = num / den;
    for (std::size_t j = 0; j < 101; j += 10)
      for (std::size_t i = 0; i < 101; i += 10)
        CHECK(out.value(i, j) - f.value(i, j) == doctest::Approx(shift).epsilon(1e-6));
    CHECK(is_member(out, ConeSpec::scaled(ConeKind::HessianPSD)).member);
  }
  SUBCASE("tangent-plane continuation keeps convexity") {
    const auto f = sample(FunctionSpec2D("softplus", [](double x, double y) {
                            return std::log1p(std::exp(3 * x - 2 * y)) + x * x;
                          }), g, g)
                       .with_extension(Extension::Constant);
    const auto out = approximate_convex_2d(f, 0.1);
    CHECK(is_member(out, ConeSpec::scaled(ConeKind::HessianPSD)).member);
    CHECK(sup_distance(f, out) < 0.05);
  }
  SUBCASE("non-convex input is rejected") {
    const auto f = sample(FunctionSpec2D::polynomial({{0}, {1}, {-1}}), g, g);
    CHECK_THROWS_AS(approximate_convex_2d(f, 0.1), PreconditionFailure);
  }
}

TEST_CASE("lp_limit_convexity_check") {
  const Grid g(-1, 1, 201);
  const auto limit = sample(FunctionSpec::polynomial({0, 0, 1}), g);
  SUBCASE("x^2 + 1/n") {
    std::vector<GridFunction> seq;
    for (int n = 1; n <= 8; ++n) seq.push_back(sample(FunctionSpec::polynomial({1.0 / n, 0, 1}), g));
    const auto r = lp_limit_convexity_check(seq, limit, 2.0);
    CHECK(r.passed);
    CHECK(r.sequence_convex);
    // Oracle: ||1/n||_2 over an interval of length 2 is sqrt(2)/n.
    CHECK(r.norms[3] == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-12));
  }
  SUBCASE("smoothed |x|") {
    const auto absx = sample(FunctionSpec::piecewise_linear({-1, 0, 1}, {1, 0, 1}), g);
    std::vector<GridFunction> seq;
    for (int n = 1; n <= 16; n *= 2)
      seq.push_back(sample(FunctionSpec::custom("smooth abs", [n](double x) {
                             return std::sqrt(x * x + 1.0 / (n * n));
                           }), g));
    const auto r = lp_limit_convexity_check(seq, absx, 3.0);
    CHECK(r.converging);
    CHECK(r.limit_membership.member);
    CHECK(r.passed);
  }
  SUBCASE("constant sequence") {
    const auto r = lp_limit_convexity_check({limit, limit, limit}, limit, 2.0);
    CHECK(r.passed);
  }
  SUBCASE("non-convex limit fails") {
    const auto bad = sample(FunctionSpec::polynomial({0, 0, -1}), g);
    const auto r = lp_limit_convexity_check({bad, bad}, bad, 2.0);
    CHECK(r.converging);
    CHECK_FALSE(r.passed);
    CHECK_FALSE(r.sequence_convex);
  }
  SUBCASE("diverging sequence fails") {
    std::vector<GridFunction> seq;
    for (int n = 1; n <= 6; ++n) seq.push_back(sample(FunctionSpec::polynomial({double(n), 0, 1}), g));
    CHECK_FALSE(lp_limit_convexity_check(seq, limit, 2.0).converging);
  }
}
