#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "rieszlab/grid.hpp"
#include "rieszlab/maximal.hpp"
#include "rieszlab/young.hpp"

using namespace rieszlab;

namespace {

GridFunction random_nonneg(const Grid& g, unsigned seed, double lo = 0.0,
                           double hi = 3.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  GridFunction f(g);
  for (std::size_t i = 0; i < g.num_points(); ++i) f[i] = u(rng);
  return f;
}

// Direct evaluation of the dictionary maximal function: loop every ball in
// the dictionary, average f on the explicit ball, and scatter the (possibly
// damped) value to its members. Power families use the closed-form power
// mean so the oracle is exact; other families go through the same Luxemburg
// bisection as the library and can only be compared to its tolerance.
GridFunction maximal_oracle(const GridFunction& f, const MaximalSpec& spec) {
  const Grid& g = f.grid;
  const BallDictionary& dict = *spec.dict;
  GridFunction out(g, 0.0);
  std::vector<char> touched(g.num_points(), 0);
  for (std::size_t c = 0; c < g.num_points(); ++c) {
    auto ci = g.unpack(c);
    bool on_stride = ci[0] % dict.stride == 0 && ci[1] % dict.stride == 0 &&
                     ci[2] % dict.stride == 0;
    for (std::size_t k = 0; k < dict.radii.size(); ++k) {
      if (k > 0 && !on_stride) continue;  // single-cell balls at every center
      double r = dict.radii[k];
      if (spec.mode == MaximalMode::Local && r > (*spec.rho)[c]) continue;
      double damp = 1.0;
      if (spec.mode == MaximalMode::Theta)
        damp = std::pow(1.0 + r / (*spec.rho)[c], -spec.theta);
      Ball b{g.point(c), r};
      auto members = ball_points(g, b);
      double v;
      if (spec.young.is_power()) {
        double rexp = spec.young.power_exponent();
        double s = 0.0;
        for (auto i : members) s += std::pow(std::abs(f[i]), rexp);
        v = std::pow(s / double(members.size()), 1.0 / rexp);
      } else {
        v = luxemburg_avg(f, b, spec.young);
      }
      v *= damp;
      for (auto i : members) {
        if (!touched[i] || v > out[i]) out[i] = v;
        touched[i] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < g.num_points(); ++i)
    if (!touched[i]) throw std::runtime_error("oracle: uncovered point");
  return out;
}

void check_close(const GridFunction& a, const GridFunction& b, double rel) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-300});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  CHECK(worst <= rel);
}

}  // namespace

TEST_CASE("dictionary construction: ladder endpoints, stencils, validation") {
  Grid g = make_grid(2, 16, 4.0);
  auto dict = build_dictionary(g, 9);
  CHECK(dict.radii.size() == 9);
  CHECK(dict.radii.front() == doctest::Approx(0.51 * g.spacing()).epsilon(1e-12));
  CHECK(dict.radii.back() == doctest::Approx(g.side / 2).epsilon(1e-12));
  CHECK(std::is_sorted(dict.radii.begin(), dict.radii.end()));
  // Geometric ladder: constant ratio between consecutive radii.
  double q0 = dict.radii[1] / dict.radii[0];
  for (std::size_t k = 2; k < dict.radii.size(); ++k)
    CHECK(dict.radii[k] / dict.radii[k - 1] == doctest::Approx(q0).epsilon(1e-10));
  // The smallest stencil is the single cell; sizes grow along the ladder and
  // match ball_points cardinalities at the origin.
  CHECK(dict.stencils.front().size() == 1);
  for (std::size_t k = 0; k < dict.radii.size(); ++k) {
    CHECK(dict.stencils[k].size() ==
          ball_points(g, Ball{g.point(0), dict.radii[k]}).size());
    if (k > 0) CHECK(dict.stencils[k].size() >= dict.stencils[k - 1].size());
  }
  CHECK(dict.ball_count() > 0);

  CHECK_THROWS_AS(build_dictionary(g, 7), std::invalid_argument);
  CHECK_THROWS_AS(build_dictionary(g, 8, 3), std::invalid_argument);  // 3 | 16 fails
  CHECK_NOTHROW(build_dictionary(g, 8, 4));
}

TEST_CASE("full maximal matches the direct oracle") {
  SUBCASE("one dimension, power families (fast path)") {
    Grid g = make_grid(1, 32, 2.0);
    auto dict = std::make_shared<BallDictionary>(build_dictionary(g, 8));
    GridFunction f = random_nonneg(g, 101);
    for (double r : {1.0, 2.0, 3.0}) {
      MaximalSpec spec = maximal_full(young_power(r), dict);
      check_close(maximal_apply(f, spec), maximal_oracle(f, spec), 1e-10);
    }
  }
  SUBCASE("two dimensions, general Young function") {
    Grid g = make_grid(2, 8, 1.0);
    auto dict = std::make_shared<BallDictionary>(build_dictionary(g, 8));
    GridFunction f = random_nonneg(g, 102);
    MaximalSpec spec = maximal_full(young_logpower(1.0), dict);
    check_close(maximal_apply(f, spec), maximal_oracle(f, spec), 1e-7);
    spec = maximal_full(young_power(1.5), dict);
    check_close(maximal_apply(f, spec), maximal_oracle(f, spec), 1e-10);
  }
  SUBCASE("subsampled centers still match") {
    Grid g = make_grid(1, 32, 2.0);
    auto dict = std::make_shared<BallDictionary>(build_dictionary(g, 8, 4));
    GridFunction f = random_nonneg(g, 103);
    MaximalSpec spec = maximal_full(young_power(1.0), dict);
    check_close(maximal_apply(f, spec), maximal_oracle(f, spec), 1e-10);
  }
}

TEST_CASE("maximal function dominates the function and the sign is dropped") {
  Grid g = make_grid(2, 12, 3.0);
  auto dict = std::make_shared<BallDictionary>(build_dictionary(g, 10));
  GridFunction f = random_nonneg(g, 7, -2.0, 2.0);  // signed input
  MaximalSpec spec = maximal_full(young_power(1.0), dict);
  GridFunction m = maximal_apply(f, spec);
  for (std::size_t i = 0; i < g.num_points(); ++i) {
    // Single-cell balls give M f >= |f| pointwise.
    CHECK(m[i] >= std::abs(f[i]) * (1 - 1e-12));
    CHECK(m[i] >= 0.0);
  }
  // Constants are fixed points.
  GridFunction c = constant_function(g, 1.8);
  GridFunction mc = maximal_apply(c, spec);
  for (std::size_t i = 0; i < g.num_points(); ++i)
    CHECK(mc[i] == doctest::Approx(1.8).epsilon(1e-8));
}

TEST_CASE("local mode restricts radii by rho at the center") {
  Grid g = make_grid(1, 16, 2.0);
  auto dict = std::make_shared<BallDictionary>(build_dictionary(g, 8));
  GridFunction f = random_nonneg(g, 55);

  // rho just above the single-cell radius: only single cells are admissible,
  // so the local maximal function is exactly |f|.
  auto rho_small = std::make_shared<GridFunction>(
      constant_function(g, 0.6 * g.spacing()));
  MaximalSpec loc = maximal_local(young_power(1.0), dict, rho_small);
  GridFunction m = maximal_apply(f, loc);
  for (std::size_t i = 0; i < g.num_points(); ++i)
    CHECK(m[i] == doctest::Approx(std::abs(f[i])).epsilon(1e-12));

  // rho below every dictionary radius leaves nothing admissible.
  auto rho_tiny = std::make_shared<GridFunction>(
      constant_function(g, 0.4 * g.spacing()));
  MaximalSpec bad = maximal_local(young_power(1.0), dict, rho_tiny);
  CHECK_THROWS_AS(maximal_apply(f, bad), std::runtime_error);

  // Huge rho makes Local coincide with Full.
  auto rho_big = std::make_shared<GridFunction>(constant_function(g, g.side));
  MaximalSpec full = maximal_full(young_power(1.0), dict);
  MaximalSpec loc_big = maximal_local(young_power(1.0), dict, rho_big);
  check_close(maximal_apply(f, full), maximal_apply(f, loc_big), 1e-12);

  // Mixed rho matches the oracle.
  auto rho_mix = std::make_shared<GridFunction>(g);
  for (std::size_t i = 0; i < g.num_points(); ++i)
    (*rho_mix)[i] = (i % 3 == 0) ? 0.6 * g.spacing() : 0.5;
  MaximalSpec mixed = maximal_local(young_power(2.0), dict, rho_mix);
  check_close(maximal_apply(f, mixed), maximal_oracle(f, mixed), 1e-10);
}

TEST_CASE("theta mode damps by (1 + r/rho)^{-theta}") {
  Grid g = make_grid(2, 8, 2.0);
  auto dict = std::make_shared<BallDictionary>(build_dictionary(g, 8));
  auto rho = std::make_shared<GridFunction>(constant_function(g, 0.5));
  GridFunction f = random_nonneg(g, 77);

  MaximalSpec full = maximal_full(young_power(1.0), dict);
  MaximalSpec t0 = maximal_theta(young_power(1.0), dict, rho, 0.0);
  check_close(maximal_apply(f, full), maximal_apply(f, t0), 1e-12);

  MaximalSpec t1 = maximal_theta(young_power(1.0), dict, rho, 1.0);
  MaximalSpec t2 = maximal_theta(young_power(1.0), dict, rho, 2.0);
  GridFunction m0 = maximal_apply(f, full), m1 = maximal_apply(f, t1),
               m2 = maximal_apply(f, t2);
  for (std::size_t i = 0; i < g.num_points(); ++i) {
    CHECK(m1[i] <= m0[i] * (1 + 1e-12));
    CHECK(m2[i] <= m1[i] * (1 + 1e-12));
  }
  check_close(m1, maximal_oracle(f, t1), 1e-10);

  // Constant input: every ball average is 1, so the damped max is attained
  // by the smallest ball through x. Interior points of larger balls can only
  // see more damping.
  GridFunction one = constant_function(g, 1.0);
  GridFunction mt = maximal_apply(one, t1);
  double best = std::pow(1.0 + dict->radii.front() / 0.5, -1.0);
  for (std::size_t i = 0; i < g.num_points(); ++i)
    CHECK(mt[i] == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("composition with extra Hardy-Littlewood passes") {
  Grid g = make_grid(1, 24, 2.0);
  auto dict = std::make_shared<BallDictionary>(build_dictionary(g, 8));
  GridFunction f = random_nonneg(g, 13);

  MaximalSpec once = maximal_full(young_power(1.5), dict);
  MaximalSpec twice = maximal_full(young_power(1.5), dict, 1);
  GridFunction m1 = maximal_apply(f, once);
  GridFunction m2 = maximal_apply(f, twice);
  // The composed pass is a plain (power:1) maximal applied to M f.
  MaximalSpec hl = maximal_full(young_power(1.0), dict);
  check_close(m2, maximal_apply(m1, hl), 1e-10);
  for (std::size_t i = 0; i < g.num_points(); ++i)
    CHECK(m2[i] >= m1[i] * (1 - 1e-12));
}

TEST_CASE("maximal specs validate their inputs and name themselves") {
  Grid g = make_grid(1, 16, 1.0);
  auto dict = std::make_shared<BallDictionary>(build_dictionary(g, 8));
  GridFunction f = random_nonneg(g, 1);

  MaximalSpec no_dict = maximal_full(young_power(1.0), nullptr);
  CHECK_THROWS_AS(maximal_apply(f, no_dict), std::invalid_argument);

  MaximalSpec no_rho = maximal_local(young_power(1.0), dict, nullptr);
  CHECK_THROWS_AS(maximal_apply(f, no_rho), std::invalid_argument);

  Grid other = make_grid(1, 8, 1.0);
  GridFunction wrong(other, 1.0);
  MaximalSpec full = maximal_full(young_power(1.0), dict);
  CHECK_THROWS_AS(maximal_apply(wrong, full), std::invalid_argument);

  CHECK(maximal_name(maximal_full(young_power(1.0), dict)) == "M[power:1]");
  CHECK(maximal_name(maximal_full(young_power(1.0), dict, 1)) == "M[power:1]oM");
  auto rho = std::make_shared<GridFunction>(constant_function(g, 0.3));
  CHECK(maximal_name(maximal_theta(young_power(4.0), dict, rho, 1.0)) ==
        "M^theta=1[power:4]");
  CHECK(maximal_name(maximal_local(young_logpower(2.0), dict, rho)) ==
        "Mloc[logpower:2]");
}
