#include "rieszlab/inequality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rieszlab/rng.hpp"

namespace rieszlab {

namespace {

double max_abs(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::fabs(v));
  return m;
}

double strong_num(const GridFunction& Tf, const GridFunction& w, double p,
                  double hd) {
  double s = 0.0;
  for (std::size_t i = 0; i < Tf.size(); ++i)
    s += std::pow(std::fabs(Tf[i]), p) * w[i];
  return s * hd;
}

double strong_den(const GridFunction& f, const GridFunction& Mw, double p,
                  double hd) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    s += std::pow(std::fabs(f[i]), p) * Mw[i];
  return s * hd;
}

double weak_num(const GridFunction& Tf, const GridFunction& w,
                const std::vector<double>& lambdas, double hd) {
  double best = 0.0;
  for (double lam : lambdas) {
    double mass = 0.0;
    for (std::size_t i = 0; i < Tf.size(); ++i)
      if (std::fabs(Tf[i]) > lam) mass += w[i];
    best = std::max(best, lam * mass * hd);
  }
  return best;
}

}  // namespace

std::vector<double> default_lambda_grid(const GridFunction& Tf) {
  double m = max_abs(Tf);
  if (!(m > 0.0)) return {};
  std::vector<double> grid(40);
  for (int k = 0; k < 40; ++k)
    grid[k] = m * std::pow(10.0, -3.0 * (1.0 - k / 39.0));
  return grid;
}

double strong_ratio(const LinearOperator& T, const MaximalSpec& m, double p,
                    const GridFunction& f, const GridFunction& w) {
  if (!(p >= 1.0)) throw std::invalid_argument("strong_ratio: p must be >= 1");
  const double hd = std::pow(f.grid.spacing(), f.grid.d);
  GridFunction Mw = maximal_apply(w, m);
  double den = strong_den(f, Mw, p, hd);
  if (!(den > 0.0))
    throw std::runtime_error(
        "strong_ratio: denominator vanishes (f is zero, or the weight is "
        "degenerate where f lives)");
  GridFunction Tf = apply(T, f);
  return strong_num(Tf, w, p, hd) / den;
}

double weak_ratio(const LinearOperator& T, const MaximalSpec& m,
                  const GridFunction& f, const GridFunction& w,
                  const std::vector<double>& lambda_grid) {
  for (double lam : lambda_grid)
    if (!(lam > 0.0))
      throw std::invalid_argument("weak_ratio: lambda grid must be positive");
  const double hd = std::pow(f.grid.spacing(), f.grid.d);
  GridFunction Mw = maximal_apply(w, m);
  double den = strong_den(f, Mw, 1.0, hd);
  if (!(den > 0.0))
    throw std::runtime_error(
        "weak_ratio: denominator vanishes (f is zero, or the weight is "
        "degenerate where f lives)");
  GridFunction Tf = apply(T, f);
  return weak_num(Tf, w, lambda_grid, hd) / den;
}

namespace {

// ---- trial families ------------------------------------------------------

GridFunction fourier_band(const Grid& g, Rng& rng) {
  GridFunction f(g);
  const int kmax = std::max(1, g.n / 8);
  for (int m = 0; m < 8; ++m) {
    std::array<int, 3> k{0, 0, 0};
    bool zero = true;
    for (int a = 0; a < g.d; ++a) {
      k[a] = static_cast<int>(rng.uniform_int(0, 2 * kmax)) - kmax;
      if (k[a] != 0) zero = false;
    }
    if (zero) k[0] = 1;
    double knorm = 0.0;
    for (int a = 0; a < g.d; ++a) knorm += double(k[a]) * k[a];
    double amp = rng.normal() / (1.0 + std::sqrt(knorm));
    double phase = rng.uniform(0.0, 2.0 * M_PI);
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto c = g.unpack(i);
      double arg = phase;
      for (int a = 0; a < g.d; ++a) arg += 2.0 * M_PI * k[a] * c[a] / g.n;
      f[i] += amp * std::cos(arg);
    }
  }
  return f;
}

GridFunction gaussian_spike(const Grid& g, Rng& rng) {
  GridFunction f(g);
  Point c = g.point(rng.uniform_int(0, g.num_points() - 1));
  // Width drawn from a fixed physical range (again resolution independent).
  double s = (g.side / 32.0) * std::pow(4.0, rng.uniform());
  double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double r = g.dist(g.point(i), c);
    f[i] = sign * std::exp(-r * r / (2.0 * s * s));
  }
  return f;
}

GridFunction dipole(const Grid& g, Rng& rng) {
  GridFunction f(g);
  std::size_t a = rng.uniform_int(0, g.num_points() - 1);
  std::size_t b = rng.uniform_int(0, g.num_points() - 1);
  if (b == a) b = (a + 1) % g.num_points();
  f[a] = 1.0;
  f[b] = -1.0;
  return f;
}

GridFunction ball_indicator(const Grid& g, Rng& rng) {
  GridFunction w(g);
  Point c = g.point(rng.uniform_int(0, g.num_points() - 1));
  double r = (g.side / 16.0) * std::pow(4.0, rng.uniform());
  for (std::size_t i : ball_points(g, Ball{c, r})) w[i] = 1.0;
  return w;
}

// Fixed unit scale, independent of the grid resolution: two grids over the
// same box then draw the same continuum envelopes, so constants estimated at
// different n stay comparable instead of tracking the finest expressible
// singularity.
GridFunction power_envelope(const Grid& g, Rng& rng) {
  GridFunction w(g);
  Point c = g.point(rng.uniform_int(0, g.num_points() - 1));
  double alpha = rng.uniform(-(g.d + 2.0), 2.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::pow(1.0 + g.dist(g.point(i), c), alpha);
  return w;
}

GridFunction point_mass(const Grid& g, Rng& rng) {
  GridFunction w(g);
  w[rng.uniform_int(0, g.num_points() - 1)] = 1.0;
  return w;
}

// ---- cached ratio evaluation ----------------------------------------------

struct Evaluator {
  const InequalityTask& task;
  double hd;
  GridFunction f, w, Tf, Mw;
  double ratio = -1.0;

  explicit Evaluator(const InequalityTask& t)
      : task(t), hd(std::pow(t.op.grid.spacing(), t.op.grid.d)) {}

  double score(const GridFunction& f_, const GridFunction& Tf_,
               const GridFunction& w_, const GridFunction& Mw_) const {
    double den = strong_den(f_, Mw_, task.type == TaskType::Weak ? 1.0 : task.p,
                            hd);
    if (!(den > 0.0)) return std::nan("");
    double num = task.type == TaskType::Weak
                     ? weak_num(Tf_, w_, default_lambda_grid(Tf_), hd)
                     : strong_num(Tf_, w_, task.p, hd);
    double r = num / den;
    return std::isfinite(r) ? r : std::nan("");
  }

  // Full (re)initialization; returns the ratio or NaN for degenerate pairs.
  double set(GridFunction f_, GridFunction w_) {
    GridFunction Tf_, Mw_;
    try {
      Tf_ = apply(task.op, f_);
      Mw_ = maximal_apply(w_, task.maximal);
    } catch (const std::invalid_argument&) {
      return std::nan("");
    }
    double r = score(f_, Tf_, w_, Mw_);
    if (std::isnan(r)) return r;
    f = std::move(f_);
    w = std::move(w_);
    Tf = std::move(Tf_);
    Mw = std::move(Mw_);
    ratio = r;
    return r;
  }

  // Probe one coordinate of f (the maximal side is untouched).
  bool probe_f(std::size_t i, double value) {
    double saved = f[i];
    f[i] = value;
    GridFunction Tf_;
    try {
      Tf_ = apply(task.op, f);
    } catch (const std::invalid_argument&) {
      f[i] = saved;
      return false;
    }
    double r = score(f, Tf_, w, Mw);
    if (std::isfinite(r) && r > ratio) {
      Tf = std::move(Tf_);
      ratio = r;
      return true;
    }
    f[i] = saved;
    return false;
  }

  // Probe one coordinate of w (the operator side is untouched).
  bool probe_w(std::size_t i, double value) {
    double saved = w[i];
    w[i] = value;
    GridFunction Mw_;
    try {
      Mw_ = maximal_apply(w, task.maximal);
    } catch (const std::invalid_argument&) {
      w[i] = saved;
      return false;
    }
    double r = score(f, Tf, w, Mw_);
    if (std::isfinite(r) && r > ratio) {
      Mw = std::move(Mw_);
      ratio = r;
      return true;
    }
    w[i] = saved;
    return false;
  }
};

}  // namespace

ConstantReport estimate_constant(const InequalityTask& task) {
  const Grid& g = task.op.grid;
  const std::size_t N = g.num_points();
  if (task.type == TaskType::Strong && !(task.p >= 1.0))
    throw std::invalid_argument("estimate_constant: p must be >= 1");

  ConstantReport rep;
  rep.task_id = task.id;
  Evaluator best_eval(task);

  struct Start {
    double ratio;
    GridFunction f, w;
    int trial;
  };
  std::vector<Start> top;  // kept sorted, best first, capped at restarts

  double running = 0.0;
  Evaluator trial_eval(task);
  for (int t = 0; t < task.trials; ++t) {
    Rng rng(derive_seed({task.seed, static_cast<std::uint64_t>(t)}));
    int kind = t % 5;
    GridFunction f, w;
    switch (kind) {
      case 0:
        f = fourier_band(g, rng);
        w = ball_indicator(g, rng);
        break;
      case 1:
        f = gaussian_spike(g, rng);
        w = power_envelope(g, rng);
        break;
      case 2:
        f = dipole(g, rng);
        w = point_mass(g, rng);
        break;
      case 3: {
        // Dual certificate: a kernel row against the sampled weight.
        w = point_mass(g, rng);
        GridFunction Mw, K;
        try {
          Mw = maximal_apply(w, task.maximal);
          K = apply(adjoint(task.op), w);
        } catch (const std::invalid_argument&) {
          ++rep.degenerate_skipped;
          rep.trace.push_back(running);
          continue;
        }
        f = GridFunction(g);
        double pp = task.type == TaskType::Weak ? 1.0 : task.p;
        for (std::size_t i = 0; i < N; ++i) {
          if (!(Mw[i] > 0.0) || K[i] == 0.0) continue;
          double mag = pp > 1.0
                           ? std::pow(std::fabs(K[i]) / Mw[i], 1.0 / (pp - 1.0))
                           : 1.0;
          f[i] = K[i] > 0.0 ? mag : -mag;
        }
        double fm = max_abs(f);
        if (fm > 0.0)
          for (auto& v : f.values) v /= fm;
        break;
      }
      default:
        f = fourier_band(g, rng);
        w = power_envelope(g, rng);
        break;
    }

    double r = trial_eval.set(std::move(f), std::move(w));
    if (std::isnan(r)) {
      ++rep.degenerate_skipped;
      rep.trace.push_back(running);
      continue;
    }
    ++rep.trial_count;
    if (r > running) {
      running = r;
      rep.argmax_id = "trial:" + std::to_string(t);
    }
    rep.trace.push_back(running);

    auto pos = std::find_if(top.begin(), top.end(),
                            [&](const Start& s) { return r > s.ratio; });
    if (pos != top.end() ||
        top.size() < static_cast<std::size_t>(std::max(1, task.search.restarts))) {
      top.insert(pos, Start{r, trial_eval.f, trial_eval.w, t});
      if (top.size() > static_cast<std::size_t>(std::max(1, task.search.restarts)))
        top.pop_back();
    }
  }

  if (rep.trial_count == 0) {
    rep.best_ratio = 0.0;
    rep.stability = 0.0;
    return rep;
  }

  // Stability over the random-trial portion: last value against the value
  // when half as many trials had run.
  std::size_t T = rep.trace.size();
  double half = rep.trace[T / 2 > 0 ? T / 2 - 1 : 0];
  rep.stability = half > 0.0 ? std::fabs(rep.trace[T - 1] / half - 1.0) : 0.0;

  // Coordinate ascent from the best starts.
  for (std::size_t s = 0; s < top.size(); ++s) {
    Evaluator ev(task);
    if (std::isnan(ev.set(top[s].f, top[s].w))) continue;
    for (int pass = 0; pass < task.search.passes; ++pass) {
      Rng prng(derive_seed({task.seed, 0xA5C3ull, static_cast<std::uint64_t>(s),
                            static_cast<std::uint64_t>(pass)}));
      std::vector<std::size_t> perm(2 * N);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[prng.uniform_int(0, i - 1)]);
      std::size_t limit = task.search.coord_cap > 0
                              ? std::min<std::size_t>(task.search.coord_cap,
                                                      perm.size())
                              : perm.size();
      for (std::size_t ci = 0; ci < limit; ++ci) {
        std::size_t c = perm[ci];
        bool accepted = false;
        std::string move;
        if (c < N) {
          double cur = ev.f[c];
          std::vector<double> cands;
          if (cur == 0.0) {
            double fm = max_abs(ev.f);
            if (fm == 0.0) continue;
            cands = {fm, -fm};
          } else {
            cands = {2.0 * cur, 0.5 * cur, -cur, 4.0 * cur, 0.25 * cur};
          }
          for (double v : cands)
            if (ev.probe_f(c, v)) {
              accepted = true;
              move = "f" + std::to_string(c);
            }
        } else {
          std::size_t j = c - N;
          double cur = ev.w[j];
          std::vector<double> cands;
          if (cur == 0.0) {
            double wm = max_abs(ev.w);
            if (wm == 0.0) continue;
            cands = {wm};
          } else {
            cands = {2.0 * cur, 0.5 * cur, 4.0 * cur, 0.25 * cur, 0.0};
          }
          for (double v : cands)
            if (ev.probe_w(j, v)) {
              accepted = true;
              move = "w" + std::to_string(j);
            }
        }
        if (accepted && ev.ratio > running) {
          running = ev.ratio;
          rep.argmax_id = "ascent:" + std::to_string(s) + ":" + move;
          rep.trace.push_back(running);
        }
      }
    }
  }

  rep.best_ratio = running;
  return rep;
}

namespace {

// Count of grid points within (strict) radius r of any fixed point, via the
// sorted distances of all lattice offsets from the origin.
struct BallCounter {
  std::vector<double> sorted;
  explicit BallCounter(const Grid& g) {
    sorted.resize(g.num_points());
    for (std::size_t i = 0; i < sorted.size(); ++i) sorted[i] = g.dist(0, i);
    std::sort(sorted.begin(), sorted.end());
  }
  std::size_t count(double r) const {
    return std::lower_bound(sorted.begin(), sorted.end(), r) - sorted.begin();
  }
};

// Maximal function of chi_Q over the spec's dictionary plus, at each point x,
// the witness ball B(x, dist(x,x0) + Q.radius).
GridFunction chi_field(const MaximalSpec& m, const Ball& Q) {
  if (m.mode == MaximalMode::Local)
    throw std::invalid_argument(
        "chi_envelope: Local mode has no damping exponent; use Full or Theta");
  if (!m.dict) throw std::invalid_argument("chi_envelope: missing dictionary");
  const Grid& g = m.dict->grid;
  if (m.mode == MaximalMode::Theta && !m.rho)
    throw std::invalid_argument("chi_envelope: Theta mode needs rho");

  GridFunction chi(g);
  auto members = ball_points(g, Q);
  for (std::size_t i : members) chi[i] = 1.0;
  GridFunction out = maximal_apply(chi, m);

  BallCounter counter(g);
  const double theta = m.mode == MaximalMode::Theta ? m.theta : 0.0;
  for (std::size_t x = 0; x < g.num_points(); ++x) {
    Point px = g.point(x);
    double rw = g.dist(px, Q.center) + Q.radius;
    std::size_t total = counter.count(rw);
    std::size_t inter = 0;
    for (std::size_t qi : members)
      if (g.dist(g.point(qi), px) < rw) ++inter;
    if (inter == 0) continue;
    // Indicator gauge in closed form: 1 / phi^{-1}(|B| / |B and Q|).
    double norm =
        1.0 / young_eval(m.young, double(total) / double(inter), true);
    double damp =
        theta > 0.0 ? std::pow(1.0 + rw / (*m.rho)[x], -theta) : 1.0;
    out[x] = std::max(out[x], damp * norm);
  }
  return out;
}

}  // namespace

EnvelopeReport chi_envelope(const MaximalSpec& m, const Ball& Q) {
  const Grid& g = m.dict->grid;
  EnvelopeReport rep;
  rep.values = chi_field(m, Q);

  const std::size_t N = g.num_points();
  std::vector<double> logu(N), logv(N);
  double umax = 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    double u = 1.0 + g.dist(g.point(i), Q.center) / Q.radius;
    umax = std::max(umax, u);
    logu[i] = std::log(u);
    logv[i] = std::log(rep.values[i]);
  }
  if (umax < 1.2)
    throw std::runtime_error(
        "chi_envelope: distance range too narrow to fit envelopes (grid too "
        "coarse or critical radius too large)");

  const double sigma_max = 3.0 * g.d;
  auto fit = [&](bool upper) {
    double best_sigma = 0.0, best_logc = 0.0,
           best_res = std::numeric_limits<double>::infinity();
    for (double sigma = 0.0; sigma <= sigma_max + 1e-12; sigma += 0.01) {
      double logc = upper ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < N; ++i) {
        double cand = logv[i] + sigma * logu[i];
        logc = upper ? std::max(logc, cand) : std::min(logc, cand);
      }
      double res = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double e = logc - sigma * logu[i] - logv[i];
        res += e * e;
      }
      if (res < best_res) {
        best_res = res;
        best_sigma = sigma;
        best_logc = logc;
      }
    }
    return std::array<double, 3>{best_sigma, best_logc, best_res};
  };

  auto up = fit(true);
  rep.sigma2 = up[0];
  rep.c2 = std::exp(up[1]);

  // Lower exponent constrained to sigma1 >= sigma2.
  {
    double best_sigma = rep.sigma2, best_logc = 0.0,
           best_res = std::numeric_limits<double>::infinity();
    for (double sigma = rep.sigma2; sigma <= sigma_max + 1e-12; sigma += 0.01) {
      double logc = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < N; ++i)
        logc = std::min(logc, logv[i] + sigma * logu[i]);
      double res = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double e = logc - sigma * logu[i] - logv[i];
        res += e * e;
      }
      if (res < best_res) {
        best_res = res;
        best_sigma = sigma;
        best_logc = logc;
      }
    }
    rep.sigma1 = best_sigma;
    rep.c1 = std::exp(best_logc);
    rep.fit_residual = std::sqrt((up[2] + best_res) / (2.0 * N));
  }
  return rep;
}

IntegrabilityReport integrability_verdict(double beta, double p, double sigma,
                                          int d, const YoungFunction& phi,
                                          double theta) {
  if (!(p >= 1.0))
    throw std::invalid_argument("integrability_verdict: p must be >= 1");
  if (!(sigma > 0.0))
    throw std::invalid_argument("integrability_verdict: sigma must be > 0");
  IntegrabilityReport rep;
  rep.theta = theta < 0.0 ? std::max(0.0, sigma - d) : theta;
  rep.sides = {8, 16, 32};

  for (int side : rep.sides) {
    Grid g = make_grid(d, side, double(side));  // unit spacing
    auto rho = std::make_shared<GridFunction>(constant_function(g, 1.0));
    // Grow the radius count with the box so the ladder pitch stays fixed;
    // otherwise the sup over a coarser ladder shifts the integrand between
    // box sizes by more than the trend threshold resolves.
    int k_radii = static_cast<int>(std::lround(1.0 + 3.0 * std::log2(side)));
    auto dict = std::make_shared<BallDictionary>(build_dictionary(g, k_radii));
    MaximalSpec m = maximal_theta(phi, dict, rho, rep.theta);

    std::size_t center = g.pack(g.n / 2, g.n / 2, g.n / 2);
    Ball Q{g.point(center), 1.0};
    GridFunction weight = chi_field(m, Q);

    double hd = 1.0;
    double iw = 0.0, is = 0.0;
    for (std::size_t i = 0; i < g.num_points(); ++i) {
      double u = 1.0 + g.dist(g.point(i), Q.center);
      double fp = std::pow(u, beta * p);
      iw += fp * weight[i] * hd;
      is += fp * std::pow(u, -sigma) * hd;
    }
    rep.weighted_integrals.push_back(iw);
    rep.sigma_integrals.push_back(is);
  }

  for (std::size_t k = 1; k < rep.sides.size(); ++k) {
    rep.weighted_growth.push_back(
        std::log2(rep.weighted_integrals[k] / rep.weighted_integrals[k - 1]));
    rep.sigma_growth.push_back(
        std::log2(rep.sigma_integrals[k] / rep.sigma_integrals[k - 1]));
  }

  auto last = rep.weighted_integrals.size() - 1;
  rep.weighted_cauchy = std::fabs(rep.weighted_integrals[last] /
                                      rep.weighted_integrals[last - 1] -
                                  1.0) < 0.05;
  rep.sigma_cauchy =
      std::fabs(rep.sigma_integrals[last] / rep.sigma_integrals[last - 1] -
                1.0) < 0.05;
  rep.trends_agree = rep.weighted_cauchy == rep.sigma_cauchy;
  return rep;
}

}  // namespace rieszlab
