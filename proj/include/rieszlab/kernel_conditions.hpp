#pragma once

#include <cstdint>
#include <optional>

#include "rieszlab/critical.hpp"
#include "rieszlab/grid.hpp"
#include "rieszlab/operators.hpp"

namespace rieszlab {

enum class SliceMode { Ring, Ball };

// Quadrature s-norm of the kernel column K(., y) over the ring
// {R < dist(x0,x) < 2R} (Ring) or the ball B(x0, R/2) (Ball). The singular
// cell x == y is excluded; if a counter is supplied the number of excluded
// cells is added to it. Requires s > 1 and R < side/4 so the ring keeps its
// shape under periodic wrap; throws if the region contains no grid points.
double annulus_slice_norm(const OperatorKernel& K, const Point& x0,
                          const Point& y, double R, double s, SliceMode mode,
                          std::size_t* excluded = nullptr);

enum class KernelCondition { A_s, A_s_prime, B_s, C_s, A_inf, B_inf };

// Config-facing names: a_s, a_s_prime, b_s, c_s, a_inf, b_inf.
KernelCondition kernel_condition_from_name(const std::string& name);

struct KernelCheckParams {
  double s = 2.0;      // slice-norm index (ignored by the pointwise conditions)
  double N = 1.0;      // decay exponent
  double delta = 1.0;  // singularity-matching exponent (B_s, C_s, B_inf)
  int samples = 400;
  std::uint64_t seed = 0;
};

// Samples (x0, y, R) under the chosen condition's constraints and measures
// the sup of LHS/RHS, where LHS is the slice norm (or |K(x,y)| pointwise)
// and RHS is the condition's displayed bound:
//   A_s, A_s_prime:  R^{-d/s'} (1 + R/rho(x0))^{-N}
//   B_s (needs K0):  R^{-d/s'} (R/rho(x0))^{delta},   sampled with R <= rho(x0)
//   C_s:             R^{-d/s'} (1+rho(x0)/R)^{-delta} (1+R/rho(x0))^{-N}
//   A_inf:           |x-y|^{-d} (1 + |x-y|/rho(x))^{-N}        (pointwise)
//   B_inf (needs K0):|x-y|^{-d} (|x-y|/rho(y))^{delta}         (pointwise)
// secondary_constant re-measures B_s / B_inf with the rho argument moved to
// the other base point. Throws if no sample satisfies the constraints.
ConditionReport check_condition(const OperatorKernel& K,
                                const OperatorKernel* K0,
                                const CriticalRadiusField& rho,
                                KernelCondition condition,
                                const KernelCheckParams& params);

// Quadrature of V(u)/dist(u,x)^{d-1} over the ball B(x, dist(x,y)/4), the
// singular cell u == x excluded (and counted if a counter is supplied).
// Requires dist(x,y) >= 4*spacing.
double g_function(const GridFunction& V, const Point& x, const Point& y,
                  std::size_t* excluded = nullptr);

enum class ComparisonLemma { CompR1, CompR2 };

struct ComparisonSetup {
  const OperatorKernel* K = nullptr;      // Schrodinger-side kernel
  const OperatorKernel* K0 = nullptr;     // classical counterpart
  const OperatorKernel* green = nullptr;  // kernel of Linv (CompR2 only)
  const GridFunction* V = nullptr;
  const CriticalRadiusField* rho = nullptr;
  double q = 2.0;  // reverse Holder order; CompR1 needs d/2 < q < d
  int j = 0, k = 0;  // Hessian component for CompR2
  int samples = 400;
  std::uint64_t seed = 0;
};

// Empirical sup of |K - K0| against the comparison bound:
//   CompR1: dist^{-(d-1)} (G(x,y) + dist^{-1} (dist/rho(x))^{2-d/q}),
//           sampled over pairs with dist >= 4*spacing;
//   CompR2: |T0(V Gamma(y,.) chi_{B(x0,R/4)})(x)| + R^{-d} (R/rho(x0))^{delta},
//           delta = min{1, 2-d/q}, sampled with R <= dist(y,x0) <= rho(x0)
//           and x in B(x0, R/8); T0 is the classical second-order transform
//           for component (j,k) and Gamma the column of the supplied inverse.
ConditionReport comparison_check(ComparisonLemma lemma,
                                 const ComparisonSetup& setup);

}  // namespace rieszlab
