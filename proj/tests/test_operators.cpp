#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>

#include "rieszlab/grid.hpp"
#include "rieszlab/operators.hpp"

using namespace rieszlab;

namespace {

constexpr double kPi = std::numbers::pi;

GridFunction random_field(const Grid& g, unsigned seed, bool mean_zero = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  GridFunction f(g);
  for (std::size_t i = 0; i < g.num_points(); ++i) f[i] = n01(rng);
  if (mean_zero) {
    double m = 0.0;
    for (double v : f.values) m += v;
    m /= double(g.num_points());
    for (double& v : f.values) v -= m;
  }
  return f;
}

GridFunction cosine_mode(const Grid& g, int k0, int k1 = 0, int k2 = 0) {
  GridFunction f(g);
  for (std::size_t i = 0; i < g.num_points(); ++i) {
    Point x = g.point(i);
    f[i] = std::cos(2 * kPi * (k0 * x[0] + k1 * x[1] + k2 * x[2]) / g.side);
  }
  return f;
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("derivative multipliers differentiate pure modes exactly") {
  Grid g = make_grid(2, 16, 2.0);
  for (int k : {1, 3, 5}) {
    GridFunction f = cosine_mode(g, k, 2);
    LinearOperator d0 = assemble_classical(g, "grad:0");
    GridFunction df = apply(d0, f);
    double xi = 2 * kPi * k / g.side;
    double worst = 0.0;
    for (std::size_t i = 0; i < g.num_points(); ++i) {
      Point x = g.point(i);
      double want =
          -xi * std::sin(2 * kPi * (k * x[0] + 2 * x[1]) / g.side);
      worst = std::max(worst, std::abs(df[i] - want));
    }
    CHECK(worst < 1e-10);
  }
  CHECK_THROWS_AS(assemble_classical(g, "grad:2"), std::invalid_argument);
}

TEST_CASE("energy identity: sum of squared gradients equals <f, -Lap f>") {
  for (int d : {1, 2, 3}) {
    Grid g = make_grid(d, d == 3 ? 8 : 16, 1.5);
    GridFunction f = random_field(g, 31 + d);
    double grads = 0.0;
    for (int j = 0; j < d; ++j) {
      GridFunction dj = apply(assemble_classical(g, "grad:" + std::to_string(j)), f);
      grads += inner(dj, dj);
    }
    LinearOperator lap{g, "lap", MultiplierRep{{}, false}};
    auto sym = laplacian_symbol(g);
    auto& rep = std::get<MultiplierRep>(lap.rep);
    rep.symbol.assign(sym.begin(), sym.end());
    for (auto& s : rep.symbol) s = -s;
    double quad = -inner(f, apply(lap, f));
    CHECK(grads == doctest::Approx(quad).epsilon(1e-12));
  }
}

TEST_CASE("classical riesz transforms: symbols, annihilated modes, identities") {
  Grid g = make_grid(2, 12, 2.0);
  GridFunction f = random_field(g, 7);

  SUBCASE("R1 kills constants and is skew") {
    LinearOperator R = assemble_classical(g, "classical:R1:0");
    GridFunction c = constant_function(g, 3.0);
    CHECK(max_abs_diff(apply(R, c), GridFunction(g, 0.0)) < 1e-12);
    // symbol i*xi/|xi| is odd: <Rf, f> = 0.
    CHECK(std::abs(inner(apply(R, f), f)) < 1e-10);
  }

  SUBCASE("sum of R2 diagonal components is -(Id - mean)") {
    GridFunction acc(g, 0.0);
    for (int j = 0; j < g.d; ++j) {
      auto R2 = assemble_classical(
          g, "classical:R2:" + std::to_string(j) + "," + std::to_string(j));
      GridFunction t = apply(R2, f);
      for (std::size_t i = 0; i < g.num_points(); ++i) acc[i] += t[i];
    }
    double mean = 0.0;
    for (double v : f.values) mean += v;
    mean /= double(g.num_points());
    double worst = 0.0;
    for (std::size_t i = 0; i < g.num_points(); ++i)
      worst = std::max(worst, std::abs(acc[i] + (f[i] - mean)));
    CHECK(worst < 1e-10);
  }

  SUBCASE("R1grad equals grad of the half-order integral") {
    GridFunction fz = random_field(g, 8, true);
    auto R1g = assemble_classical(g, "classical:R1grad:1");
    auto gr = assemble_classical(g, "grad:1");
    auto hi = assemble_classical(g, "classical:fracint");
    CHECK(max_abs_diff(apply(R1g, fz), apply(gr, apply(hi, fz))) < 1e-11);
  }

  SUBCASE("fractional operators demand mean-zero input") {
    auto fl = assemble_classical(g, "classical:fraclap:0.5");
    CHECK_THROWS_WITH_AS(apply(fl, constant_function(g, 1.0)),
                         doctest::Contains("zero"), std::invalid_argument);
    GridFunction fz = random_field(g, 9, true);
    CHECK_NOTHROW(apply(fl, fz));
    // fraclap:0.5 equals fracint on mean-zero input: both are |xi|^{-1}.
    auto hi = assemble_classical(g, "classical:fracint");
    CHECK(max_abs_diff(apply(fl, fz), apply(hi, fz)) < 1e-12);
  }

  SUBCASE("unknown names are rejected with the offending tag") {
    CHECK_THROWS_WITH_AS(assemble_classical(g, "classical:R7:0"),
                         doctest::Contains("R7"), std::invalid_argument);
    CHECK_THROWS_AS(assemble_classical(g, "classical:R2:0,2"),
                    std::invalid_argument);
  }
}

TEST_CASE("adjoints pair correctly for every representation") {
  Grid g = make_grid(2, 8, 1.0);
  GridFunction f = random_field(g, 11), h = random_field(g, 12);

  auto check_pairing = [&](const LinearOperator& T) {
    LinearOperator Tt = adjoint(T);
    CHECK(inner(apply(T, f), h) ==
          doctest::Approx(inner(f, apply(Tt, h))).epsilon(1e-11));
  };

  check_pairing(assemble_classical(g, "classical:R1:0"));  // multiplier
  check_pairing(assemble_classical(g, "grad:1"));

  GridFunction V = constant_function(g, 1.0);
  SchrodingerOperator L = assemble_schrodinger(g, V);
  check_pairing(build_operator(L, "Linv"));      // dense
  check_pairing(build_operator(L, "R1:0"));      // composition
  check_pairing(build_operator(L, "R2:0,1"));    // composition
  check_pairing(build_operator(L, "VgL:0.5"));   // diagonal * dense

  // Adjoint naming toggles a trailing star, twice restores.
  LinearOperator R = build_operator(L, "R1:0");
  CHECK(adjoint(R).name == R.name + "*");
  CHECK(adjoint(adjoint(R)).name == R.name);
  CHECK(build_operator(L, "R1*:0").name == adjoint(R).name);
  CHECK(max_abs_diff(apply(build_operator(L, "R1*:0"), f),
                     apply(adjoint(R), f)) == 0.0);
}

TEST_CASE("schrodinger assembly: spectrum, budget, input validation") {
  Grid g = make_grid(1, 16, 2.0);
  GridFunction V = constant_function(g, 1.0);
  SchrodingerOperator L = assemble_schrodinger(g, V);

  // Constant potential: eigenvalues are |xi|^2 + 1, each nonzero xi twice.
  std::vector<double> want;
  for (double s : laplacian_symbol(g)) want.push_back(s + 1.0);
  std::sort(want.begin(), want.end());
  REQUIRE(L.evals.size() == long(want.size()));
  for (long i = 0; i < L.evals.size(); ++i)
    CHECK(L.evals(i) == doctest::Approx(want[i]).epsilon(1e-9));

  // Orthonormal eigenvectors: U^T U = I.
  Eigen::MatrixXd gram = L.evecs.transpose() * L.evecs;
  CHECK((gram - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);

  // g(lambda) = lambda reconstructs the matrix; g = 1/lambda inverts it.
  std::vector<double> id(L.evals.size()), invg(L.evals.size());
  for (long i = 0; i < L.evals.size(); ++i) {
    id[i] = L.evals(i);
    invg[i] = 1.0 / L.evals(i);
  }
  Eigen::MatrixXd A = spectral_function(L, id);
  Eigen::MatrixXd Ainv = spectral_function(L, invg);
  CHECK((A * Ainv - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() <
        1e-10);
  // The assembled matrix acts like -Delta + V on a probe.
  GridFunction p = random_field(g, 21);
  Eigen::Map<const Eigen::VectorXd> pv(p.values.data(), 16);
  Eigen::VectorXd Ap = A * pv;
  auto sym = laplacian_symbol(g);
  LinearOperator lap{g, "lap", MultiplierRep{{sym.begin(), sym.end()}, false}};
  GridFunction want_f = apply(lap, p);
  for (int i = 0; i < 16; ++i) want_f[i] += p[i];
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) worst = std::max(worst, std::abs(Ap(i) - want_f[i]));
  CHECK(worst < 1e-9);

  CHECK_THROWS_WITH_AS(assemble_schrodinger(make_grid(3, 30, 1.0),
                                            constant_function(make_grid(3, 30, 1.0), 1.0)),
                       doctest::Contains("20000"), std::invalid_argument);
  GridFunction neg = constant_function(g, 1.0);
  neg[0] = -0.5;
  CHECK_THROWS_AS(assemble_schrodinger(g, neg), std::invalid_argument);
  CHECK_THROWS_AS(assemble_schrodinger(g, constant_function(g, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("operator zoo: gamma ranges and composition structure") {
  Grid g = make_grid(2, 8, 1.0);
  GridFunction V = constant_function(g, 2.0);
  SchrodingerOperator L = assemble_schrodinger(g, V);

  CHECK_THROWS_WITH_AS(build_operator(L, "VgL:1"),
                       doctest::Contains("0 < gamma < d/2"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_operator(L, "mixed:2"),
                       doctest::Contains("1/2 < gamma <= 1"),
                       std::invalid_argument);
  CHECK_THROWS_AS(build_operator(L, "mixed:0.5"), std::invalid_argument);
  CHECK_NOTHROW(build_operator(L, "VgL:0.99"));
  CHECK_NOTHROW(build_operator(L, "mixed:1"));
  CHECK_THROWS_WITH_AS(build_operator(L, "R9"), doctest::Contains("R9"),
                       std::invalid_argument);

  // R1 = grad L^{-1/2} factor by factor on a probe.
  GridFunction f = random_field(g, 41);
  GridFunction via_zoo = apply(build_operator(L, "R1:1"), f);
  GridFunction via_parts =
      apply(assemble_classical(g, "grad:1"),
            apply(build_operator(L, "Lhalf_inv"), f));
  CHECK(max_abs_diff(via_zoo, via_parts) < 1e-11);

  // With V == c, L^{-1} is the multiplier (|xi|^2 + c)^{-1}.
  GridFunction u = apply(build_operator(L, "Linv"), f);
  auto sym = laplacian_symbol(g);
  std::vector<std::complex<double>> inv_sym(sym.size());
  for (std::size_t i = 0; i < sym.size(); ++i) inv_sym[i] = 1.0 / (sym[i] + 2.0);
  LinearOperator M{g, "m", MultiplierRep{inv_sym, false}};
  CHECK(max_abs_diff(u, apply(M, f)) < 1e-10);
}

TEST_CASE("kernels reproduce their operators through quadrature") {
  Grid g = make_grid(2, 8, 2.0);
  GridFunction f = random_field(g, 51);

  SUBCASE("multiplier kernel") {
    LinearOperator R = assemble_classical(g, "classical:R1:0");
    OperatorKernel K = kernel_of(R);
    CHECK(K.name == R.name);
    CHECK(max_abs_diff(kernel_apply(K, f), apply(R, f)) < 1e-10);
    // Translation invariance: K(x,y) depends on x-y only.
    auto k00 = K.K(0, 0);
    for (std::size_t t : {std::size_t(5), std::size_t(17)})
      CHECK(K.K(t, t) == doctest::Approx(k00).epsilon(1e-10));
  }

  SUBCASE("mean-zero-restricted multiplier kernels are still materializable") {
    LinearOperator Hi = assemble_classical(g, "classical:fracint");
    OperatorKernel K = kernel_of(Hi);
    GridFunction fz = random_field(g, 52, true);
    CHECK(max_abs_diff(kernel_apply(K, fz), apply(Hi, fz)) < 1e-10);
  }

  SUBCASE("composition and dense kernels, and adjoint transposes") {
    GridFunction V = constant_function(g, 1.0);
    SchrodingerOperator L = assemble_schrodinger(g, V);
    LinearOperator R2 = build_operator(L, "R2:0,1");
    OperatorKernel K = kernel_of(R2);
    CHECK(max_abs_diff(kernel_apply(K, f), apply(R2, f)) < 1e-9);
    OperatorKernel Kt = kernel_of(adjoint(R2));
    CHECK((Kt.K - K.K.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("inverse kernel via the eigendecomposition matches the multiplier") {
    GridFunction V = constant_function(g, 2.5);
    SchrodingerOperator L = assemble_schrodinger(g, V);
    OperatorKernel Ke = kernel_of(build_operator(L, "Linv"));
    auto sym = laplacian_symbol(g);
    std::vector<std::complex<double>> inv(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) inv[i] = 1.0 / (sym[i] + 2.5);
    OperatorKernel Km = kernel_of(LinearOperator{g, "m", MultiplierRep{inv, false}});
    CHECK((Ke.K - Km.K).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("pde solves hit manufactured solutions and expose derived fields") {
  Grid g = make_grid(2, 12, 2.0);
  GridFunction V = constant_function(g, 3.0);
  SchrodingerOperator L = assemble_schrodinger(g, V);

  SUBCASE("source form: f = (|xi_k|^2 + c) u recovers the cosine u") {
    GridFunction u_want = cosine_mode(g, 2, 1);
    double xi2 = std::pow(2 * kPi * 2 / g.side, 2) + std::pow(2 * kPi / g.side, 2);
    PdeRhs rhs;
    rhs.f = u_want;
    for (auto& v : rhs.f.values) v *= xi2 + 3.0;
    PdeSolution sol = solve_pde(L, rhs);
    CHECK(max_abs_diff(sol.u, u_want) < 1e-9);
    CHECK(sol.residual_rel < 1e-8);

    // Derived fields are consistent with the classical multipliers.
    for (int j = 0; j < g.d; ++j) {
      GridFunction dj =
          apply(assemble_classical(g, "grad:" + std::to_string(j)), sol.u);
      CHECK(max_abs_diff(sol.grad[j], dj) < 1e-10);
      for (std::size_t i = 0; i < g.num_points(); ++i) {
        CHECK(sol.sqrtV_grad[j][i] ==
              doctest::Approx(std::sqrt(3.0) * dj[i]).epsilon(1e-9));
      }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < g.num_points(); ++i) {
      worst = std::max(worst, std::abs(sol.Vu[i] - 3.0 * sol.u[i]));
      worst = std::max(worst,
                       std::abs(sol.sqrtV_u[i] - std::sqrt(3.0) * sol.u[i]));
    }
    CHECK(worst < 1e-10);
    REQUIRE(sol.hess.size() == std::size_t(g.d * g.d));
    GridFunction d01 = apply(assemble_classical(g, "grad:0"),
                             apply(assemble_classical(g, "grad:1"), sol.u));
    CHECK(max_abs_diff(sol.hess[0 * g.d + 1], d01) < 1e-9);
  }

  SUBCASE("divergence form matches the expanded source") {
    std::vector<GridFunction> F;
    for (int j = 0; j < g.d; ++j) F.push_back(random_field(g, 60 + j));
    PdeRhs rhs;
    rhs.kind = PdeRhs::Kind::Divergence;
    rhs.F = F;
    PdeSolution sol = solve_pde(L, rhs);

    GridFunction div(g, 0.0);
    for (int j = 0; j < g.d; ++j) {
      GridFunction dj =
          apply(assemble_classical(g, "grad:" + std::to_string(j)), F[j]);
      for (std::size_t i = 0; i < g.num_points(); ++i) div[i] += dj[i];
    }
    CHECK(max_abs_diff(sol.rhs_field, div) < 1e-10);
    PdeRhs as_source;
    as_source.f = div;
    CHECK(max_abs_diff(sol.u, solve_pde(L, as_source).u) < 1e-11);
  }
}
