#pragma once

#include <Eigen/Core>
#include <complex>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rieszlab/grid.hpp"

namespace rieszlab {

// L2 pairing with the quadrature weight: spacing^d * sum f*g.
double inner(const GridFunction& f, const GridFunction& g);

struct LinearOperator;
using OpPtr = std::shared_ptr<const LinearOperator>;

// Fourier multiplier, stored per linear frequency index (same row-major
// packing as GridFunction; frequency k = i for i <= n/2, i-n above).
struct MultiplierRep {
  std::vector<std::complex<double>> symbol;
  bool require_mean_zero = false;
};
struct DenseRep {
  Eigen::MatrixXd mat;  // acts on value vectors
};
struct DiagonalRep {
  std::vector<double> diag;
};
struct CompositionRep {
  std::vector<OpPtr> factors;  // mathematical order: factors.back() acts first
};

struct LinearOperator {
  Grid grid;
  std::string name;
  std::variant<MultiplierRep, DenseRep, DiagonalRep, CompositionRep> rep;
};

GridFunction apply(const LinearOperator& T, const GridFunction& f);
LinearOperator adjoint(const LinearOperator& T);

// Frequencies xi = 2*pi*k/side per index along one axis, full spectrum
// (the Nyquist index carries +pi*n/side).
std::vector<double> axis_xi(const Grid& g);
// |xi|^2 per linear index, full spectrum: the spectral Laplacian symbol.
std::vector<double> laplacian_symbol(const Grid& g);
// First-derivative symbol along the axis: i*xi off-Nyquist and the real
// value -xi at the Nyquist index, so |symbol| = |xi| at every frequency and
// the energy identity grad*grad = -Laplacian holds exactly.
std::vector<std::complex<double>> derivative_symbol(const Grid& g, int axis);

// Translation-invariant operators on the torus. Tags:
//   "identity"
//   "classical:R1:j"       i xi_j/|xi| (Nyquist-j and zero mode -> 0)
//   "classical:R2:j,k"     -xi_j xi_k/|xi|^2 (zero mode -> 0)
//   "classical:R1grad:j"   derivative_symbol_j/|xi| (zero mode -> 0)
//   "classical:fraclap:g"  |xi|^{-2g}, mean-zero inputs only
//   "classical:fracint"    |xi|^{-1},  mean-zero inputs only
//   "grad:j"               derivative_symbol_j
LinearOperator assemble_classical(const Grid& g, const std::string& name);

// L = -Delta + V as a dense symmetric matrix (spectral Laplacian plus the
// diagonal potential) with its full eigendecomposition. Budget n^d <= 20000.
struct SchrodingerOperator {
  Grid grid;
  GridFunction V;
  Eigen::VectorXd evals;
  Eigen::MatrixXd evecs;  // orthonormal columns
};
SchrodingerOperator assemble_schrodinger(const Grid& g, const GridFunction& V);

// Dense matrix of U g(Lambda) U^T for a spectral function g.
Eigen::MatrixXd spectral_function(const SchrodingerOperator& L,
                                  const std::vector<double>& g_of_lambda);

// The operator zoo. Tags (append * to the head for the adjoint):
//   "R1" / "R1:j"        grad_j L^{-1/2}
//   "R2" / "R2:j,k"      hess_jk L^{-1}
//   "VgL:g"              V^g L^{-g},            0 < g < d/2
//   "mixed:g" / ":g:j"   V^{g-1/2} grad_j L^{-g}, 1/2 < g <= 1
//   "Linv", "Lhalf_inv"
LinearOperator build_operator(const SchrodingerOperator& L,
                              const std::string& name);

// K(x,y): column y is T applied to the y-th cell indicator divided by
// spacing^d, so quadrature application reproduces T. Budget n^d <= 20000.
struct OperatorKernel {
  Grid grid;
  std::string name;
  Eigen::MatrixXd K;
};
OperatorKernel kernel_of(const LinearOperator& T);
Eigen::MatrixXd materialize(const LinearOperator& T);
GridFunction kernel_apply(const OperatorKernel& K, const GridFunction& f);

struct PdeRhs {
  enum class Kind { Source, Divergence } kind = Kind::Source;
  GridFunction f;                // Source
  std::vector<GridFunction> F;   // Divergence: d components
};

struct PdeSolution {
  GridFunction u;
  std::vector<GridFunction> grad;       // d components
  std::vector<GridFunction> hess;       // d*d, index j*d+k
  GridFunction Vu;
  std::vector<GridFunction> sqrtV_grad; // d components
  GridFunction sqrtV_u;
  GridFunction rhs_field;               // the effective right-hand side
  double residual_rel = 0.0;
};

// u = L^{-1} f or L^{-1}(div F) with the derived fields of the PDE
// corollaries; verifies the residual to 1e-8 relative.
PdeSolution solve_pde(const SchrodingerOperator& L, const PdeRhs& rhs);

}  // namespace rieszlab
