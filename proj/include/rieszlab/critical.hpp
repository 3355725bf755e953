#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rieszlab/grid.hpp"
#include "rieszlab/maximal.hpp"

namespace rieszlab {

// rho sampled on the grid plus the fitted regularity constants: the smallest
// integer N0 in 1..12 (up to a 2% slack on the minimal C0) and the minimal
// C0 >= 1 with
//   C0^{-1} rho(x) (1+|x-y|/rho(x))^{-N0} <= rho(y)
//                                         <= C0 rho(x) (1+|x-y|/rho(x))^{N0/(N0+1)}
// over 10^4 deterministically sampled ordered pairs.
struct CriticalRadiusField {
  Grid grid;
  GridFunction rho;
  double q = 0.0;  // reverse Holder order the field was derived under (0 if synthetic)
  double fitted_C0 = 1.0;
  int fitted_N0 = 1;
  double capped_fraction = 0.0;   // radius search hit the torus cap side/2
  double floored_fraction = 0.0;  // sub-level condition failed even at spacing/2
};

struct WorstSample {
  std::size_t x0 = 0;
  std::size_t y = 0;
  double R = 0.0;
};

// Outcome of a sampled inequality verification: the empirical constant is the
// sup over samples of LHS/RHS; extras carry check-specific diagnostics.
struct ConditionReport {
  std::string condition;
  std::map<std::string, double> params;
  double empirical_constant = 0.0;
  double secondary_constant = 0.0;
  WorstSample worst;
  std::size_t sample_count = 0;
  std::size_t skipped = 0;
  std::map<std::string, double> extras;
};

// Critical balls Q_j = B(x_j, shrink*rho(x_j)) from the greedy covering, the
// max overlap counts of the dilates sigma*Q_j, and the fitted growth law
// overlap(sigma) ~ C sigma^{N1}.
struct CoveringReport {
  std::vector<Ball> balls;
  std::map<int, int> overlap_max;  // sigma in {1,2,4,8}
  double fitted_N1 = 0.0;
  double fitted_C = 0.0;
  double fit_r2 = 0.0;
};

// Max over dictionary balls of ((avg_B V^q)^{1/q}) / (avg_B V); balls with
// zero mass are skipped (their count lands in *skipped).
double rh_constant(const GridFunction& V, double q, const BallDictionary& dict,
                   std::size_t* skipped = nullptr);

// rho(x) = sup{r > 0 : r^{2-d} * integral over B(x,r) of V <= 1}, located as
// the last sub-level crossing on a 64-step geometric radius mesh from
// spacing/2 to side/2 and refined by bisection to spacing/10. Requires d >= 3
// and V >= 0 not identically zero.
CriticalRadiusField rho_field(const GridFunction& V, double q);

// Wraps an externally supplied radius field (must be positive, <= side/2)
// and fits the same regularity constants.
CriticalRadiusField synthetic_rho(const GridFunction& rho_values);

// Empirical constant for
//   R^{2-d} * integral over B(x0,R) of V
//     <= C (1+R/rho(x0))^{N0} (1+rho(x0)/R)^{d/q-2}
// with the fitted N0; secondary_constant is the doubling constant
// C1 = sup integral(2B)/integral(B). extras: N1_from_doubling = log2(C1)+2-d,
// rho_crossing_max_err = worst |LHS - 1| at R = rho(x0).
ConditionReport potential_growth_check(const GridFunction& V, double q,
                                       const CriticalRadiusField& field,
                                       int samples, std::uint64_t seed);

// Greedy covering: repeatedly take the first uncovered grid point (linear
// index order) and add its critical ball, shrunk by the given factor.
// Throws if shrink*rho drops below the spacing anywhere.
CoveringReport critical_covering(const CriticalRadiusField& field,
                                 double shrink);

// Largest gamma in (0,1] with 3*gamma*C0*(1+2*gamma)^{N0} <= 1 (bisection;
// the returned value satisfies the inequality, 1.01x it does not).
double gamma0(double C0, double N0);

// min(gamma0, 1/(2 C0 (5 sqrt(d))^{N0+1})): the shrink the covering-based
// arguments are entitled to. Often below the grid spacing at desk scale.
double default_shrink(const CriticalRadiusField& field);

// For x, y in B(x0, R0) and r > R0, the two controlled ratios
//   (i)  (1 + R0/rho(y)) / (1 + R0/rho(x0))^{N0}
//   (ii) (1 + r/rho(y)) / [ (1+R0/rho(x0))^{gamma} (1 + r/rho(x)) ],
// gamma = N0 (1 + N0/(N0+1)) with the fitted N0. samples == 0 enumerates the
// full deterministic (x0, R0, x, y, r) mesh; samples > 0 draws from the same
// mesh with per-sample seeds. empirical_constant is the part-(ii) sup,
// secondary_constant the part-(i) sup.
ConditionReport trucho_check(const CriticalRadiusField& field, int samples,
                             std::uint64_t seed);

}  // namespace rieszlab
