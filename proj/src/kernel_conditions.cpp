#include "rieszlab/kernel_conditions.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "rieszlab/rng.hpp"

namespace rieszlab {

namespace {

// Column accessor form so the B_s difference never materializes a matrix.
double slice_norm(const Grid& g, const std::function<double(std::size_t)>& col,
                  std::size_t y_idx, const Point& x0, double R, double s,
                  SliceMode mode, std::size_t* excluded) {
  if (!(s > 1.0))
    throw std::invalid_argument("annulus_slice_norm: s must exceed 1");
  if (!(R > 0.0 && R < g.side / 4.0))
    throw std::invalid_argument(
        "annulus_slice_norm: R must lie in (0, side/4)");
  std::vector<std::size_t> pts;
  if (mode == SliceMode::Ring) {
    pts = ball_points(g, Ball{x0, 2.0 * R});
    std::erase_if(pts, [&](std::size_t i) {
      return !(g.dist(g.point(i), x0) > R);
    });
  } else {
    pts = ball_points(g, Ball{x0, R / 2.0});
  }
  if (pts.empty())
    throw std::runtime_error(
        "annulus_slice_norm: region holds no grid points at R = " +
        std::to_string(R));
  const double hd = std::pow(g.spacing(), g.d);
  double acc = 0.0;
  for (std::size_t i : pts) {
    if (i == y_idx) {
      if (excluded) ++*excluded;
      continue;
    }
    acc += std::pow(std::fabs(col(i)), s) * hd;
  }
  return std::pow(acc, 1.0 / s);
}

double sprime_exponent(const Grid& g, double s) {
  return static_cast<double>(g.d) * (s - 1.0) / s;  // d/s'
}

}  // namespace

KernelCondition kernel_condition_from_name(const std::string& name) {
  if (name == "a_s") return KernelCondition::A_s;
  if (name == "a_s_prime") return KernelCondition::A_s_prime;
  if (name == "b_s") return KernelCondition::B_s;
  if (name == "c_s") return KernelCondition::C_s;
  if (name == "a_inf") return KernelCondition::A_inf;
  if (name == "b_inf") return KernelCondition::B_inf;
  throw std::invalid_argument(
      "unknown kernel condition '" + name +
      "' (a_s | a_s_prime | b_s | c_s | a_inf | b_inf)");
}

double annulus_slice_norm(const OperatorKernel& K, const Point& x0,
                          const Point& y, double R, double s, SliceMode mode,
                          std::size_t* excluded) {
  const Grid& g = K.grid;
  std::size_t y_idx = g.nearest_index(y);
  return slice_norm(
      g, [&](std::size_t i) { return K.K(i, y_idx); }, y_idx, x0, R, s, mode,
      excluded);
}

ConditionReport check_condition(const OperatorKernel& K,
                                const OperatorKernel* K0,
                                const CriticalRadiusField& rho,
                                KernelCondition condition,
                                const KernelCheckParams& params) {
  const Grid& g = K.grid;
  if (!(rho.grid == g))
    throw std::invalid_argument("check_condition: rho grid mismatch");
  const bool needs_k0 =
      condition == KernelCondition::B_s || condition == KernelCondition::B_inf;
  if (needs_k0 && K0 == nullptr)
    throw std::invalid_argument(
        "check_condition: this condition compares against K0, which is "
        "missing");
  if (K0 && !(K0->grid == g))
    throw std::invalid_argument("check_condition: K0 grid mismatch");
  const bool pointwise = condition == KernelCondition::A_inf ||
                         condition == KernelCondition::B_inf;

  const std::size_t N = g.num_points();
  const double h = g.spacing();
  const double Rlo = 2.0 * h;
  const double Rhi_box = 0.2499 * g.side;

  ConditionReport rep;
  switch (condition) {
    case KernelCondition::A_s: rep.condition = "A_s"; break;
    case KernelCondition::A_s_prime: rep.condition = "A_s_prime"; break;
    case KernelCondition::B_s: rep.condition = "B_s"; break;
    case KernelCondition::C_s: rep.condition = "C_s"; break;
    case KernelCondition::A_inf: rep.condition = "A_inf"; break;
    case KernelCondition::B_inf: rep.condition = "B_inf"; break;
  }
  rep.params["s"] = params.s;
  rep.params["N"] = params.N;
  rep.params["delta"] = params.delta;
  rep.params["samples"] = params.samples;

  std::size_t excluded_cells = 0;
  double sup = -1.0, sup2 = -1.0;

  for (int t = 0; t < params.samples; ++t) {
    Rng rng(derive_seed({params.seed, static_cast<std::uint64_t>(t)}));
    std::size_t x0_idx = rng.uniform_int(0, N - 1);
    Point x0 = g.point(x0_idx);
    double rho0 = rho.rho[x0_idx];

    if (pointwise) {
      std::size_t y_idx = rng.uniform_int(0, N - 1);
      int guard = 0;
      while (y_idx == x0_idx && ++guard < 64)
        y_idx = rng.uniform_int(0, N - 1);
      if (y_idx == x0_idx) {
        ++rep.skipped;
        continue;
      }
      // Here x0 plays the role of the evaluation point x.
      double r = g.dist(x0_idx, y_idx);
      double lhs, rhs, rhs_swap = 0.0;
      if (condition == KernelCondition::A_inf) {
        lhs = std::fabs(K.K(x0_idx, y_idx));
        rhs = std::pow(r, -g.d) * std::pow(1.0 + r / rho0, -params.N);
      } else {
        lhs = std::fabs(K.K(x0_idx, y_idx) - K0->K(x0_idx, y_idx));
        double rho_y = rho.rho[y_idx];
        rhs = std::pow(r, -g.d) * std::pow(r / rho_y, params.delta);
        rhs_swap = std::pow(r, -g.d) * std::pow(r / rho0, params.delta);
      }
      double ratio = lhs / rhs;
      if (ratio > sup) {
        sup = ratio;
        rep.worst = WorstSample{x0_idx, y_idx, r};
      }
      if (rhs_swap > 0.0) sup2 = std::max(sup2, lhs / rhs_swap);
      ++rep.sample_count;
      continue;
    }

    double Rhi = Rhi_box;
    if (condition == KernelCondition::B_s) Rhi = std::min(Rhi, rho0);
    if (!(Rhi > Rlo)) {
      ++rep.skipped;
      continue;
    }
    double R = Rlo * std::pow(Rhi / Rlo, rng.uniform());

    // Admissible base points for y under the condition's constraint.
    std::vector<std::size_t> ys;
    if (condition == KernelCondition::A_s_prime) {
      ys = ball_points(g, Ball{x0, 2.0 * R});
      std::erase_if(ys, [&](std::size_t i) {
        return !(g.dist(g.point(i), x0) > R);
      });
    } else {
      ys = ball_points(g, Ball{x0, R / 2.0});
    }
    if (ys.empty()) {
      ++rep.skipped;
      continue;
    }
    std::size_t y_idx = ys[rng.uniform_int(0, ys.size() - 1)];
    SliceMode mode = condition == KernelCondition::A_s_prime ? SliceMode::Ball
                                                             : SliceMode::Ring;

    double lhs;
    if (condition == KernelCondition::B_s) {
      lhs = slice_norm(
          g,
          [&](std::size_t i) { return K.K(i, y_idx) - K0->K(i, y_idx); },
          y_idx, x0, R, params.s, mode, &excluded_cells);
    } else {
      lhs = slice_norm(
          g, [&](std::size_t i) { return K.K(i, y_idx); }, y_idx, x0, R,
          params.s, mode, &excluded_cells);
    }

    double base = std::pow(R, -sprime_exponent(g, params.s));
    double rhs, rhs_swap = 0.0;
    switch (condition) {
      case KernelCondition::A_s:
      case KernelCondition::A_s_prime:
        rhs = base * std::pow(1.0 + R / rho0, -params.N);
        break;
      case KernelCondition::B_s:
        rhs = base * std::pow(R / rho0, params.delta);
        rhs_swap = base * std::pow(R / rho.rho[y_idx], params.delta);
        break;
      default:  // C_s
        rhs = base * std::pow(1.0 + rho0 / R, -params.delta) *
              std::pow(1.0 + R / rho0, -params.N);
        break;
    }
    double ratio = lhs / rhs;
    if (ratio > sup) {
      sup = ratio;
      rep.worst = WorstSample{x0_idx, y_idx, R};
    }
    if (rhs_swap > 0.0) sup2 = std::max(sup2, lhs / rhs_swap);
    ++rep.sample_count;
  }

  if (rep.sample_count == 0)
    throw std::runtime_error(
        "check_condition: no sample satisfied the constraints (grid too "
        "coarse for " +
        rep.condition + ")");
  rep.empirical_constant = sup;
  rep.secondary_constant = sup2 > 0.0 ? sup2 : 0.0;
  rep.extras["excluded_cells"] = static_cast<double>(excluded_cells);
  return rep;
}

double g_function(const GridFunction& V, const Point& x, const Point& y,
                  std::size_t* excluded) {
  const Grid& g = V.grid;
  const double h = g.spacing();
  double r = g.dist(x, y);
  if (!(r >= 4.0 * h))
    throw std::invalid_argument(
        "g_function: points closer than four spacings");
  const double hd = std::pow(h, g.d);
  std::size_t x_idx = g.nearest_index(x);
  double acc = 0.0;
  for (std::size_t u : ball_points(g, Ball{x, r / 4.0})) {
    if (u == x_idx) {
      if (excluded) ++*excluded;
      continue;
    }
    acc += V[u] / std::pow(g.dist(g.point(u), x), g.d - 1) * hd;
  }
  return acc;
}

ConditionReport comparison_check(ComparisonLemma lemma,
                                 const ComparisonSetup& in) {
  if (!in.K || !in.K0 || !in.V || !in.rho)
    throw std::invalid_argument("comparison_check: missing inputs");
  const Grid& g = in.K->grid;
  if (!(in.K0->grid == g) || !(in.V->grid == g) || !(in.rho->grid == g))
    throw std::invalid_argument("comparison_check: grid mismatch");
  const std::size_t N = g.num_points();
  const double h = g.spacing();

  ConditionReport rep;
  rep.params["q"] = in.q;
  rep.params["samples"] = in.samples;
  double sup = -1.0;

  if (lemma == ComparisonLemma::CompR1) {
    rep.condition = "CompR1";
    if (!(in.q > 0.5 * g.d && in.q < g.d))
      throw std::invalid_argument(
          "comparison_check: CompR1 requires d/2 < q < d");
    const double expo = 2.0 - g.d / in.q;
    std::size_t excluded = 0;
    for (int t = 0; t < in.samples; ++t) {
      Rng rng(derive_seed({in.seed, static_cast<std::uint64_t>(t)}));
      std::size_t xi = rng.uniform_int(0, N - 1);
      std::size_t yi = rng.uniform_int(0, N - 1);
      int guard = 0;
      while (g.dist(xi, yi) < 4.0 * h && ++guard < 128)
        yi = rng.uniform_int(0, N - 1);
      if (g.dist(xi, yi) < 4.0 * h) {
        ++rep.skipped;
        continue;
      }
      double r = g.dist(xi, yi);
      Point x = g.point(xi), y = g.point(yi);
      double G = g_function(*in.V, x, y, &excluded);
      double rhs = std::pow(r, -(g.d - 1)) *
                   (G + std::pow(r / in.rho->rho[xi], expo) / r);
      double lhs = std::fabs(in.K->K(xi, yi) - in.K0->K(xi, yi));
      double ratio = lhs / rhs;
      if (ratio > sup) {
        sup = ratio;
        rep.worst = WorstSample{xi, yi, r};
      }
      ++rep.sample_count;
    }
    rep.extras["excluded_cells"] = static_cast<double>(excluded);
  } else {
    rep.condition = "CompR2";
    if (!in.green)
      throw std::invalid_argument(
          "comparison_check: CompR2 needs the inverse kernel (green)");
    if (!(in.green->grid == g))
      throw std::invalid_argument("comparison_check: grid mismatch");
    if (!(in.q > 0.5 * g.d))
      throw std::invalid_argument("comparison_check: CompR2 requires q > d/2");
    const double delta = std::min(1.0, 2.0 - g.d / in.q);
    rep.params["delta"] = delta;
    rep.extras["component_j"] = in.j;
    rep.extras["component_k"] = in.k;
    LinearOperator T0 = assemble_classical(
        g, "classical:R2:" + std::to_string(in.j) + "," +
               std::to_string(in.k));

    for (int t = 0; t < in.samples; ++t) {
      Rng rng(derive_seed({in.seed, static_cast<std::uint64_t>(t)}));
      std::size_t x0_idx = rng.uniform_int(0, N - 1);
      Point x0 = g.point(x0_idx);
      double rho0 = in.rho->rho[x0_idx];
      double Rhi = std::min(rho0, 0.2499 * g.side);
      double Rlo = 2.0 * h;
      if (!(Rhi > Rlo)) {
        ++rep.skipped;
        continue;
      }
      double R = Rlo * std::pow(Rhi / Rlo, rng.uniform());

      // y with R <= dist(y,x0) <= rho(x0).
      std::vector<std::size_t> ys =
          ball_points(g, Ball{x0, std::nextafter(rho0, 2.0 * g.side)});
      std::erase_if(ys, [&](std::size_t i) {
        double d = g.dist(g.point(i), x0);
        return d < R || d > rho0;
      });
      if (ys.empty()) {
        ++rep.skipped;
        continue;
      }
      std::size_t y_idx = ys[rng.uniform_int(0, ys.size() - 1)];
      Point y = g.point(y_idx);

      // x in B(x0, R/8); the center itself always qualifies.
      std::vector<std::size_t> xs = ball_points(g, Ball{x0, R / 8.0});
      std::size_t x_idx = xs[rng.uniform_int(0, xs.size() - 1)];

      GridFunction field(g);
      for (std::size_t u : ball_points(g, Ball{x0, R / 4.0}))
        field[u] = (*in.V)[u] * in.green->K(y_idx, u);
      GridFunction transformed = apply(T0, field);

      double rhs = std::fabs(transformed[x_idx]) +
                   std::pow(R, -g.d) * std::pow(R / rho0, delta);
      double lhs = std::fabs(in.K->K(x_idx, y_idx) - in.K0->K(x_idx, y_idx));
      double ratio = lhs / rhs;
      if (ratio > sup) {
        sup = ratio;
        rep.worst = WorstSample{x0_idx, y_idx, R};
      }
      ++rep.sample_count;
    }
  }

  if (rep.sample_count == 0)
    throw std::runtime_error(
        "comparison_check: grid too coarse for the sample constraints");
  rep.empirical_constant = sup;
  return rep;
}

}  // namespace rieszlab
