#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "rieszlab/grid.hpp"
#include "rieszlab/young.hpp"

namespace rieszlab {

// Finite family of balls approximating "sup over all balls containing x":
// every grid point as center (or every stride-th point per axis), radii on a
// geometric ladder from the single-cell radius 0.51*spacing up to side/2.
// Single-cell balls are present at every center regardless of the stride.
struct BallDictionary {
  Grid grid;
  int k_radii = 0;
  int stride = 1;
  std::vector<double> radii;
  // Lattice offsets of the members of a ball of radius radii[i] centered on a
  // grid point; shared by all centers by translation invariance.
  std::vector<std::vector<std::array<int, 3>>> stencils;

  std::size_t ball_count() const;
};

// stride == 1 is the all-centers policy. Throws unless k_radii >= 8 and
// stride >= 1 divides n.
BallDictionary build_dictionary(const Grid& g, int k_radii, int stride = 1);

enum class MaximalMode { Full, Local, Theta };

// A maximal operator: at x, the max over dictionary balls B containing x of
// the Luxemburg A-average of f on B, where
//   Full:  all balls;
//   Local: only balls with radius <= rho(center);
//   Theta: all balls, damped by (1 + radius/rho(center))^{-theta}.
// compose_with_hl extra plain Hardy-Littlewood passes run afterwards.
struct MaximalSpec {
  YoungFunction young = young_power(1.0);
  MaximalMode mode = MaximalMode::Full;
  std::shared_ptr<const BallDictionary> dict;
  std::shared_ptr<const GridFunction> rho;  // required for Local/Theta
  double theta = 0.0;
  int compose_with_hl = 0;
};

MaximalSpec maximal_full(const YoungFunction& A,
                         std::shared_ptr<const BallDictionary> dict,
                         int compose_with_hl = 0);
MaximalSpec maximal_local(const YoungFunction& A,
                          std::shared_ptr<const BallDictionary> dict,
                          std::shared_ptr<const GridFunction> rho);
MaximalSpec maximal_theta(const YoungFunction& A,
                          std::shared_ptr<const BallDictionary> dict,
                          std::shared_ptr<const GridFunction> rho, double theta);

GridFunction maximal_apply(const GridFunction& f, const MaximalSpec& spec);

// Report tag, e.g. "M[power:1]", "M[power:1]oM", "M^theta=1[power:4]".
std::string maximal_name(const MaximalSpec& spec);

}  // namespace rieszlab
