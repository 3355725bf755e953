#include "rieszlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef RIESZLAB_HAVE_LAPACKE
#include <lapacke.h>
#endif
#include <Eigen/Eigenvalues>

#include "fft.hpp"

namespace rieszlab {

double inner(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid == g.grid))
    throw std::invalid_argument("inner: operands live on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * std::pow(f.grid.spacing(), f.grid.d);
}

std::vector<double> axis_xi(const Grid& g) {
  std::vector<double> xi(g.n);
  const double base = 2.0 * M_PI / g.side;
  for (int i = 0; i < g.n; ++i) {
    int k = i <= g.n / 2 ? i : i - g.n;
    xi[i] = base * k;
  }
  return xi;
}

std::vector<double> laplacian_symbol(const Grid& g) {
  auto xi = axis_xi(g);
  const std::size_t N = g.num_points();
  std::vector<double> sym(N);
  for (std::size_t idx = 0; idx < N; ++idx) {
    auto c = g.unpack(idx);
    double s = 0.0;
    for (int a = 0; a < g.d; ++a) s += xi[c[a]] * xi[c[a]];
    sym[idx] = s;
  }
  return sym;
}

std::vector<std::complex<double>> derivative_symbol(const Grid& g, int axis) {
  if (axis < 0 || axis >= g.d)
    throw std::invalid_argument("derivative_symbol: axis out of range");
  auto xi = axis_xi(g);
  const std::size_t N = g.num_points();
  std::vector<std::complex<double>> sym(N);
  for (std::size_t idx = 0; idx < N; ++idx) {
    int i = g.unpack(idx)[axis];
    if (i == g.n / 2)
      sym[idx] = {-xi[i], 0.0};
    else
      sym[idx] = {0.0, xi[i]};
  }
  return sym;
}

namespace {

std::vector<std::string> split_tag(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(':', start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad_tag(const std::string& name, const std::string& hint) {
  throw std::invalid_argument("unknown operator tag '" + name + "'" +
                              (hint.empty() ? "" : " (" + hint + ")"));
}

LinearOperator make_multiplier(const Grid& g, const std::string& name,
                               std::vector<std::complex<double>> sym,
                               bool mean_zero = false) {
  LinearOperator T;
  T.grid = g;
  T.name = name;
  T.rep = MultiplierRep{std::move(sym), mean_zero};
  return T;
}

void check_mean_zero(const GridFunction& f, const std::string& name) {
  double sum = 0.0, sumsq = 0.0;
  for (double v : f.values) {
    sum += v;
    sumsq += v * v;
  }
  const double N = static_cast<double>(f.size());
  double mean = std::fabs(sum / N);
  double rms = std::sqrt(sumsq / N);
  if (mean > 1e-10 * std::max(rms, 1e-300))
    throw std::invalid_argument(
        name + " acts on mean-zero inputs only: the zero frequency mode "
               "carries mean " +
        std::to_string(sum / N));
}

}  // namespace

GridFunction apply(const LinearOperator& T, const GridFunction& f) {
  if (!(T.grid == f.grid))
    throw std::invalid_argument("apply: operator and input grids differ");
  const std::size_t N = f.size();

  if (const auto* m = std::get_if<MultiplierRep>(&T.rep)) {
    if (m->require_mean_zero) check_mean_zero(f, T.name);
    auto fhat = fft_forward(T.grid, f.values);
    for (std::size_t i = 0; i < N; ++i) fhat[i] *= m->symbol[i];
    GridFunction out(T.grid);
    out.values = fft_inverse(T.grid, fhat);
    return out;
  }
  if (const auto* d = std::get_if<DenseRep>(&T.rep)) {
    Eigen::Map<const Eigen::VectorXd> x(f.values.data(), N);
    Eigen::VectorXd y = d->mat * x;
    GridFunction out(T.grid);
    Eigen::VectorXd::Map(out.values.data(), N) = y;
    return out;
  }
  if (const auto* d = std::get_if<DiagonalRep>(&T.rep)) {
    GridFunction out(T.grid);
    for (std::size_t i = 0; i < N; ++i) out[i] = d->diag[i] * f[i];
    return out;
  }
  const auto& comp = std::get<CompositionRep>(T.rep);
  GridFunction cur = f;
  for (auto it = comp.factors.rbegin(); it != comp.factors.rend(); ++it)
    cur = apply(**it, cur);
  return cur;
}

LinearOperator adjoint(const LinearOperator& T) {
  LinearOperator A;
  A.grid = T.grid;
  A.name = T.name.ends_with("*") ? T.name.substr(0, T.name.size() - 1)
                                 : T.name + "*";
  if (const auto* m = std::get_if<MultiplierRep>(&T.rep)) {
    auto sym = m->symbol;
    for (auto& s : sym) s = std::conj(s);
    A.rep = MultiplierRep{std::move(sym), m->require_mean_zero};
  } else if (const auto* d = std::get_if<DenseRep>(&T.rep)) {
    A.rep = DenseRep{d->mat.transpose()};
  } else if (const auto* d = std::get_if<DiagonalRep>(&T.rep)) {
    A.rep = DiagonalRep{d->diag};
  } else {
    const auto& comp = std::get<CompositionRep>(T.rep);
    CompositionRep rev;
    for (auto it = comp.factors.rbegin(); it != comp.factors.rend(); ++it)
      rev.factors.push_back(
          std::make_shared<LinearOperator>(adjoint(**it)));
    A.rep = std::move(rev);
  }
  return A;
}

LinearOperator assemble_classical(const Grid& g, const std::string& name) {
  auto parts = split_tag(name);
  const std::size_t N = g.num_points();

  if (parts[0] == "identity") {
    std::vector<std::complex<double>> sym(N, 1.0);
    return make_multiplier(g, name, std::move(sym));
  }
  if (parts[0] == "grad") {
    if (parts.size() != 2) bad_tag(name, "expected grad:j");
    return make_multiplier(g, name, derivative_symbol(g, std::stoi(parts[1])));
  }
  if (parts[0] != "classical") bad_tag(name, "");

  auto lap = laplacian_symbol(g);
  auto norm = [&](std::size_t i) { return std::sqrt(lap[i]); };

  // Accept both "classical:R1:j" and the compact "classical:R1j".
  std::string kind = parts.size() > 1 ? parts[1] : "";
  std::string arg = parts.size() > 2 ? parts[2] : "";
  if (arg.empty() && kind.size() > 2 && (kind.rfind("R1", 0) == 0 ||
                                         kind.rfind("R2", 0) == 0)) {
    arg = kind.substr(2);
    kind = kind.substr(0, 2);
    if (kind == "R2" && arg.size() == 2) arg = arg.substr(0, 1) + "," + arg.substr(1);
  }

  if (kind == "R1") {
    int j = std::stoi(arg);
    if (j < 0 || j >= g.d) bad_tag(name, "component out of range");
    auto xi = axis_xi(g);
    std::vector<std::complex<double>> sym(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      auto c = g.unpack(i);
      if (lap[i] == 0.0 || c[j] == g.n / 2) continue;
      sym[i] = {0.0, xi[c[j]] / norm(i)};
    }
    return make_multiplier(g, name, std::move(sym));
  }
  if (kind == "R2") {
    auto comma = arg.find(',');
    if (comma == std::string::npos) bad_tag(name, "expected classical:R2:j,k");
    int j = std::stoi(arg.substr(0, comma));
    int k = std::stoi(arg.substr(comma + 1));
    if (j < 0 || j >= g.d || k < 0 || k >= g.d)
      bad_tag(name, "component out of range");
    auto xi = axis_xi(g);
    std::vector<std::complex<double>> sym(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      auto c = g.unpack(i);
      if (lap[i] == 0.0) continue;
      sym[i] = {-xi[c[j]] * xi[c[k]] / lap[i], 0.0};
    }
    return make_multiplier(g, name, std::move(sym));
  }
  if (kind == "R1grad") {
    int j = std::stoi(arg);
    if (j < 0 || j >= g.d) bad_tag(name, "component out of range");
    auto dsym = derivative_symbol(g, j);
    std::vector<std::complex<double>> sym(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      if (lap[i] != 0.0) sym[i] = dsym[i] / norm(i);
    return make_multiplier(g, name, std::move(sym));
  }
  if (kind == "fraclap") {
    double ga = std::stod(arg);
    if (!(ga > 0.0)) bad_tag(name, "need gamma > 0");
    std::vector<std::complex<double>> sym(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      if (lap[i] != 0.0) sym[i] = std::pow(lap[i], -ga);
    return make_multiplier(g, name, std::move(sym), true);
  }
  if (kind == "fracint") {
    std::vector<std::complex<double>> sym(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      if (lap[i] != 0.0) sym[i] = 1.0 / norm(i);
    return make_multiplier(g, name, std::move(sym), true);
  }
  bad_tag(name, "");
}

SchrodingerOperator assemble_schrodinger(const Grid& g,
                                         const GridFunction& V) {
  const std::size_t N = g.num_points();
  if (N > 20000)
    throw std::invalid_argument(
        "assemble_schrodinger: n^d exceeds the dense budget of 20000");
  if (!(V.grid == g))
    throw std::invalid_argument("assemble_schrodinger: potential grid mismatch");
  bool nonzero = false;
  for (double v : V.values) {
    if (v < 0.0)
      throw std::invalid_argument("assemble_schrodinger: V has negative entries");
    if (v > 0.0) nonzero = true;
  }
  if (!nonzero)
    throw std::invalid_argument("assemble_schrodinger: V is identically zero");

  // The Laplacian is a circulant: its first column is the inverse transform
  // of the symbol.
  auto lap = laplacian_symbol(g);
  std::vector<std::complex<double>> symc(lap.begin(), lap.end());
  std::vector<double> col = fft_inverse(g, symc);

  Eigen::MatrixXd M(N, N);
  std::vector<int> wrap(2 * g.n);
  for (int j = 0; j < 2 * g.n; ++j) wrap[j] = j % g.n;
  for (std::size_t j = 0; j < N; ++j) {
    auto cj = g.unpack(j);
    for (std::size_t i = 0; i < N; ++i) {
      auto ci = g.unpack(i);
      std::size_t diff = wrap[ci[0] - cj[0] + g.n];
      for (int a = 1; a < g.d; ++a)
        diff = diff * g.n + wrap[ci[a] - cj[a] + g.n];
      M(i, j) = col[diff];
    }
  }
  // Wipe the tiny asymmetry the transform round-trip leaves behind.
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = j + 1; i < N; ++i) {
      double v = 0.5 * (M(i, j) + M(j, i));
      M(i, j) = v;
      M(j, i) = v;
    }
  for (std::size_t i = 0; i < N; ++i) M(i, i) += V[i];

  SchrodingerOperator L;
  L.grid = g;
  L.V = V;
#ifdef RIESZLAB_HAVE_LAPACKE
  L.evecs = M;
  L.evals.resize(N);
  lapack_int info = LAPACKE_dsyevd(
      LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(N),
      L.evecs.data(), static_cast<lapack_int>(N), L.evals.data());
  if (info != 0)
    throw std::runtime_error("assemble_schrodinger: dsyevd failed");
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("assemble_schrodinger: eigendecomposition failed");
  L.evals = es.eigenvalues();
  L.evecs = es.eigenvectors();
#endif
  if (!(L.evals(0) > 0.0))
    throw std::runtime_error(
        "assemble_schrodinger: operator is not positive definite");
  return L;
}

Eigen::MatrixXd spectral_function(const SchrodingerOperator& L,
                                  const std::vector<double>& g_of_lambda) {
  Eigen::Map<const Eigen::VectorXd> gl(g_of_lambda.data(),
                                       g_of_lambda.size());
  return (L.evecs * gl.asDiagonal()) * L.evecs.transpose();
}

namespace {

OpPtr own(LinearOperator op) {
  return std::make_shared<LinearOperator>(std::move(op));
}

LinearOperator spectral_dense(const SchrodingerOperator& L, double expo,
                              const std::string& name) {
  std::vector<double> gl(L.evals.size());
  for (Eigen::Index i = 0; i < L.evals.size(); ++i)
    gl[i] = std::pow(L.evals(i), expo);
  LinearOperator T;
  T.grid = L.grid;
  T.name = name;
  T.rep = DenseRep{spectral_function(L, gl)};
  return T;
}

LinearOperator diagonal_power(const SchrodingerOperator& L, double expo,
                              const std::string& name) {
  DiagonalRep d;
  d.diag.resize(L.grid.num_points());
  for (std::size_t i = 0; i < d.diag.size(); ++i)
    d.diag[i] = std::pow(L.V[i], expo);
  LinearOperator T;
  T.grid = L.grid;
  T.name = name;
  T.rep = std::move(d);
  return T;
}

LinearOperator hessian_multiplier(const Grid& g, int j, int k) {
  auto xi = axis_xi(g);
  const std::size_t N = g.num_points();
  std::vector<std::complex<double>> sym(N);
  for (std::size_t i = 0; i < N; ++i) {
    auto c = g.unpack(i);
    sym[i] = {-xi[c[j]] * xi[c[k]], 0.0};
  }
  return make_multiplier(g, "hess:" + std::to_string(j) + "," +
                                std::to_string(k), std::move(sym));
}

}  // namespace

LinearOperator build_operator(const SchrodingerOperator& L,
                              const std::string& name) {
  auto parts = split_tag(name);
  std::string head = parts[0];
  bool adj = false;
  if (head.ends_with("*")) {
    adj = true;
    head.pop_back();
  }
  const Grid& g = L.grid;

  LinearOperator T;
  T.grid = g;
  if (head == "Linv") {
    T = spectral_dense(L, -1.0, name);
  } else if (head == "Lhalf_inv") {
    T = spectral_dense(L, -0.5, name);
  } else if (head == "R1") {
    int j = parts.size() > 1 ? std::stoi(parts[1]) : 0;
    if (j < 0 || j >= g.d)
      throw std::invalid_argument("build_operator: R1 component out of range");
    CompositionRep comp;
    comp.factors.push_back(own(assemble_classical(g, "grad:" + std::to_string(j))));
    comp.factors.push_back(own(spectral_dense(L, -0.5, "Lhalf_inv")));
    T.rep = std::move(comp);
  } else if (head == "R2") {
    int j = 0, k = 0;
    if (parts.size() > 1) {
      auto comma = parts[1].find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("build_operator: expected R2:j,k");
      j = std::stoi(parts[1].substr(0, comma));
      k = std::stoi(parts[1].substr(comma + 1));
    }
    if (j < 0 || j >= g.d || k < 0 || k >= g.d)
      throw std::invalid_argument("build_operator: R2 component out of range");
    CompositionRep comp;
    comp.factors.push_back(own(hessian_multiplier(g, j, k)));
    comp.factors.push_back(own(spectral_dense(L, -1.0, "Linv")));
    T.rep = std::move(comp);
  } else if (head == "VgL") {
    if (parts.size() < 2)
      throw std::invalid_argument("build_operator: expected VgL:gamma");
    double ga = std::stod(parts[1]);
    if (!(ga > 0.0 && ga < 0.5 * g.d))
      throw std::invalid_argument(
          "build_operator: VgL gamma must satisfy 0 < gamma < d/2");
    CompositionRep comp;
    comp.factors.push_back(own(diagonal_power(L, ga, "V^gamma")));
    comp.factors.push_back(own(spectral_dense(L, -ga, "L^-gamma")));
    T.rep = std::move(comp);
  } else if (head == "mixed") {
    if (parts.size() < 2)
      throw std::invalid_argument("build_operator: expected mixed:gamma[:j]");
    double ga = std::stod(parts[1]);
    int j = parts.size() > 2 ? std::stoi(parts[2]) : 0;
    if (!(ga > 0.5 && ga <= 1.0))
      throw std::invalid_argument(
          "build_operator: mixed gamma must satisfy 1/2 < gamma <= 1");
    if (j < 0 || j >= g.d)
      throw std::invalid_argument("build_operator: mixed component out of range");
    CompositionRep comp;
    comp.factors.push_back(own(diagonal_power(L, ga - 0.5, "V^(gamma-1/2)")));
    comp.factors.push_back(own(assemble_classical(g, "grad:" + std::to_string(j))));
    comp.factors.push_back(own(spectral_dense(L, -ga, "L^-gamma")));
    T.rep = std::move(comp);
  } else {
    bad_tag(name, "zoo tags: R1[:j], R2[:j,k], VgL:g, mixed:g[:j], Linv, "
                  "Lhalf_inv, with optional * for the adjoint");
  }
  // Starred tags are named through adjoint() so that "R1*:0" and
  // adjoint of "R1:0" print identically.
  if (adj) {
    T.name = head + name.substr(head.size() + 1);
    return adjoint(T);
  }
  T.name = name;
  return T;
}

Eigen::MatrixXd materialize(const LinearOperator& T) {
  const Grid& g = T.grid;
  const std::size_t N = g.num_points();
  if (N > 20000)
    throw std::invalid_argument("materialize: n^d exceeds the dense budget");

  if (const auto* m = std::get_if<MultiplierRep>(&T.rep)) {
    // Column at frequency origin: inverse transform of the symbol; the rest
    // by translation invariance.
    std::vector<double> col = fft_inverse(g, m->symbol);
    Eigen::MatrixXd M(N, N);
    std::vector<int> wrap(2 * g.n);
    for (int j = 0; j < 2 * g.n; ++j) wrap[j] = j % g.n;
    for (std::size_t j = 0; j < N; ++j) {
      auto cj = g.unpack(j);
      for (std::size_t i = 0; i < N; ++i) {
        auto ci = g.unpack(i);
        std::size_t diff = wrap[ci[0] - cj[0] + g.n];
        for (int a = 1; a < g.d; ++a)
          diff = diff * g.n + wrap[ci[a] - cj[a] + g.n];
        M(i, j) = col[diff];
      }
    }
    return M;
  }
  if (const auto* d = std::get_if<DenseRep>(&T.rep)) return d->mat;
  if (const auto* d = std::get_if<DiagonalRep>(&T.rep)) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 0; i < N; ++i) M(i, i) = d->diag[i];
    return M;
  }
  const auto& comp = std::get<CompositionRep>(T.rep);
  Eigen::MatrixXd M = materialize(*comp.factors.back());
  for (auto it = std::next(comp.factors.rbegin()); it != comp.factors.rend();
       ++it)
    M = materialize(**it) * M;
  return M;
}

OperatorKernel kernel_of(const LinearOperator& T) {
  OperatorKernel K;
  K.grid = T.grid;
  K.name = T.name;
  const double hd = std::pow(T.grid.spacing(), T.grid.d);
  K.K = materialize(T) / hd;
  return K;
}

GridFunction kernel_apply(const OperatorKernel& K, const GridFunction& f) {
  if (!(K.grid == f.grid))
    throw std::invalid_argument("kernel_apply: grid mismatch");
  const std::size_t N = f.size();
  const double hd = std::pow(K.grid.spacing(), K.grid.d);
  Eigen::Map<const Eigen::VectorXd> x(f.values.data(), N);
  Eigen::VectorXd y = K.K * x * hd;
  GridFunction out(K.grid);
  Eigen::VectorXd::Map(out.values.data(), N) = y;
  return out;
}

PdeSolution solve_pde(const SchrodingerOperator& L, const PdeRhs& rhs) {
  const Grid& g = L.grid;
  PdeSolution sol;

  if (rhs.kind == PdeRhs::Kind::Source) {
    if (!(rhs.f.grid == g)) throw std::invalid_argument("solve_pde: grid mismatch");
    sol.rhs_field = rhs.f;
  } else {
    if (rhs.F.size() != static_cast<std::size_t>(g.d))
      throw std::invalid_argument("solve_pde: divergence needs d components");
    sol.rhs_field = GridFunction(g);
    for (int j = 0; j < g.d; ++j) {
      if (!(rhs.F[j].grid == g))
        throw std::invalid_argument("solve_pde: grid mismatch");
      GridFunction dj = apply(
          assemble_classical(g, "grad:" + std::to_string(j)), rhs.F[j]);
      for (std::size_t i = 0; i < dj.size(); ++i)
        sol.rhs_field[i] += dj[i];
    }
  }

  LinearOperator Linv = build_operator(L, "Linv");
  sol.u = apply(Linv, sol.rhs_field);

  for (int j = 0; j < g.d; ++j)
    sol.grad.push_back(apply(
        assemble_classical(g, "grad:" + std::to_string(j)), sol.u));
  for (int j = 0; j < g.d; ++j)
    for (int k = 0; k < g.d; ++k) {
      auto hess = hessian_multiplier(g, j, k);
      sol.hess.push_back(apply(hess, sol.u));
    }
  sol.Vu = GridFunction(g);
  sol.sqrtV_u = GridFunction(g);
  for (std::size_t i = 0; i < sol.u.size(); ++i) {
    sol.Vu[i] = L.V[i] * sol.u[i];
    sol.sqrtV_u[i] = std::sqrt(L.V[i]) * sol.u[i];
  }
  for (int j = 0; j < g.d; ++j) {
    GridFunction sg(g);
    for (std::size_t i = 0; i < sg.size(); ++i)
      sg[i] = std::sqrt(L.V[i]) * sol.grad[j][i];
    sol.sqrtV_grad.push_back(std::move(sg));
  }

  // Residual through the exact spectral form of L.
  auto lap = laplacian_symbol(g);
  auto uhat = fft_forward(g, sol.u.values);
  for (std::size_t i = 0; i < uhat.size(); ++i) uhat[i] *= lap[i];
  auto lap_u = fft_inverse(g, uhat);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sol.u.size(); ++i) {
    double Lu = lap_u[i] + L.V[i] * sol.u[i];
    double r = Lu - sol.rhs_field[i];
    num += r * r;
    den += sol.rhs_field[i] * sol.rhs_field[i];
  }
  sol.residual_rel = den == 0.0 ? 0.0 : std::sqrt(num / den);
  if (sol.residual_rel > 1e-8)
    throw std::runtime_error("solve_pde: residual exceeds 1e-8 relative");
  return sol;
}

}  // namespace rieszlab
