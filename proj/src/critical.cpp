#include "rieszlab/critical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rieszlab/rng.hpp"

namespace rieszlab {

static void require_potential(const GridFunction& V, const char* who) {
  bool nonzero = false;
  for (double v : V.values) {
    if (v < 0.0)
      throw std::invalid_argument(std::string(who) + ": potential has negative entries");
    if (v > 0.0) nonzero = true;
  }
  if (!nonzero)
    throw std::invalid_argument(std::string(who) + ": potential is identically zero");
}

double rh_constant(const GridFunction& V, double q, const BallDictionary& dict,
                   std::size_t* skipped) {
  if (!(q > 1.0)) throw std::invalid_argument("rh_constant: need q > 1");
  if (!(dict.grid == V.grid))
    throw std::invalid_argument("rh_constant: dictionary grid mismatch");
  require_potential(V, "rh_constant");

  const Grid& g = V.grid;
  const std::size_t N = g.num_points();
  std::vector<double> vq(N);
  for (std::size_t i = 0; i < N; ++i) vq[i] = std::pow(V[i], q);

  std::vector<int> wrap(3 * g.n);
  for (int j = -g.n; j < 2 * g.n; ++j) wrap[j + g.n] = (j % g.n + g.n) % g.n;

  double best = 0.0;
  std::size_t skip = 0;
  for (std::size_t ri = 0; ri < dict.radii.size(); ++ri) {
    const auto& stencil = dict.stencils[ri];
    const std::size_t m = stencil.size();
    const int step = (dict.stride > 1 && ri > 0) ? dict.stride : 1;
    int c0 = 0, c1 = 0, c2 = 0;
    for (std::size_t c = 0; c < N; ++c) {
      if (c0 % step == 0 && c1 % step == 0 && c2 % step == 0) {
        double s1 = 0.0, sq = 0.0;
        for (const auto& o : stencil) {
          std::size_t idx = wrap[c0 + o[0] + g.n];
          if (g.d > 1) idx = idx * g.n + wrap[c1 + o[1] + g.n];
          if (g.d > 2) idx = idx * g.n + wrap[c2 + o[2] + g.n];
          s1 += V[idx];
          sq += vq[idx];
        }
        if (s1 <= 0.0) {
          ++skip;
        } else {
          double ratio = std::pow(sq / m, 1.0 / q) / (s1 / m);
          best = std::max(best, ratio);
        }
      }
      if (g.d == 1) {
        ++c0;
      } else if (g.d == 2) {
        if (++c1 == g.n) { c1 = 0; ++c0; }
      } else {
        if (++c2 == g.n) { c2 = 0; if (++c1 == g.n) { c1 = 0; ++c0; } }
      }
    }
  }
  if (skipped) *skipped = skip;
  return best;
}

namespace {

// Distance-sorted mass profile around one point: supports integral over
// B(x, r) for any r below side/2 by prefix lookup.
struct MassProfile {
  std::vector<double> dist;    // sorted
  std::vector<double> prefix;  // prefix[k] = mass of the k nearest points

  double mass_below(double r) const {
    auto it = std::lower_bound(dist.begin(), dist.end(), r);
    return prefix[static_cast<std::size_t>(it - dist.begin())];
  }
};

MassProfile mass_profile(const GridFunction& V, std::size_t x) {
  const Grid& g = V.grid;
  const std::size_t N = g.num_points();
  const double hd = std::pow(g.spacing(), g.d);
  Point px = g.point(x);
  std::vector<std::pair<double, double>> entries;
  entries.reserve(N);
  for (std::size_t i = 0; i < N; ++i)
    entries.emplace_back(g.dist(px, g.point(i)), V[i] * hd);
  std::sort(entries.begin(), entries.end());
  MassProfile mp;
  mp.dist.resize(N);
  mp.prefix.assign(N + 1, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    mp.dist[i] = entries[i].first;
    mp.prefix[i + 1] = mp.prefix[i] + entries[i].second;
  }
  return mp;
}

// (C0, N0) fit over 10^4 deterministic ordered pairs.
void fit_rho_constants(CriticalRadiusField& field) {
  const Grid& g = field.grid;
  const std::size_t N = g.num_points();
  const int pairs = 10000;
  Rng rng(derive_seed({0x9b5ad1ULL, static_cast<std::uint64_t>(N), 7ULL}));

  std::vector<double> u(pairs), rx(pairs), ry(pairs);
  for (int t = 0; t < pairs; ++t) {
    std::size_t i = static_cast<std::size_t>(rng.next_u64() % N);
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % N);
    rx[t] = field.rho[i];
    ry[t] = field.rho[j];
    u[t] = g.dist(g.point(i), g.point(j)) / rx[t];
  }

  double bestC[13];
  for (int N0 = 1; N0 <= 12; ++N0) {
    double C = 1.0;
    const double up = static_cast<double>(N0) / (N0 + 1);
    for (int t = 0; t < pairs; ++t) {
      double lower = rx[t] * std::pow(1.0 + u[t], -static_cast<double>(N0));
      double upper = rx[t] * std::pow(1.0 + u[t], up);
      C = std::max(C, lower / ry[t]);
      C = std::max(C, ry[t] / upper);
    }
    bestC[N0] = C;
  }
  double cmin = *std::min_element(bestC + 1, bestC + 13);
  for (int N0 = 1; N0 <= 12; ++N0) {
    if (bestC[N0] <= 1.02 * cmin) {
      field.fitted_N0 = N0;
      field.fitted_C0 = bestC[N0];
      return;
    }
  }
}

}  // namespace

CriticalRadiusField rho_field(const GridFunction& V, double q) {
  const Grid& g = V.grid;
  if (g.d < 3) throw std::invalid_argument("rho_field: requires d >= 3");
  require_potential(V, "rho_field");

  CriticalRadiusField field;
  field.grid = g;
  field.q = q;
  field.rho = GridFunction(g);

  const double h = g.spacing();
  const double rmin = 0.5 * h, rmax = 0.5 * g.side;
  const int steps = 64;
  std::vector<double> mesh(steps);
  for (int j = 0; j < steps; ++j)
    mesh[j] = rmin * std::pow(rmax / rmin, static_cast<double>(j) / (steps - 1));

  std::size_t capped = 0, floored = 0;
  const std::size_t N = g.num_points();
  for (std::size_t x = 0; x < N; ++x) {
    MassProfile mp = mass_profile(V, x);
    auto F = [&](double r) {
      return std::pow(r, 2.0 - g.d) * mp.mass_below(r);
    };
    int last = -1;
    for (int j = 0; j < steps; ++j)
      if (F(mesh[j]) <= 1.0) last = j;

    double rho;
    if (last < 0) {
      rho = rmin;
      ++floored;
    } else if (last == steps - 1) {
      rho = rmax;
      ++capped;
    } else {
      // F can dip back under 1 between mesh points; refine around the last
      // sub-level mesh radius.
      double lo = mesh[last], hi = mesh[last + 1];
      while (hi - lo > h / 10.0) {
        double mid = 0.5 * (lo + hi);
        (F(mid) <= 1.0 ? lo : hi) = mid;
      }
      rho = lo;
    }
    field.rho[x] = rho;
  }
  field.capped_fraction = static_cast<double>(capped) / N;
  field.floored_fraction = static_cast<double>(floored) / N;
  fit_rho_constants(field);
  return field;
}

CriticalRadiusField synthetic_rho(const GridFunction& rho_values) {
  const Grid& g = rho_values.grid;
  std::size_t capped = 0;
  for (double r : rho_values.values) {
    if (!(r > 0.0))
      throw std::invalid_argument("synthetic_rho: field must be positive");
    if (r > 0.5 * g.side)
      throw std::invalid_argument("synthetic_rho: field exceeds side/2");
    if (r == 0.5 * g.side) ++capped;
  }
  CriticalRadiusField field;
  field.grid = g;
  field.rho = rho_values;
  field.capped_fraction = static_cast<double>(capped) / g.num_points();
  fit_rho_constants(field);
  return field;
}

ConditionReport potential_growth_check(const GridFunction& V, double q,
                                       const CriticalRadiusField& field,
                                       int samples, std::uint64_t seed) {
  const Grid& g = V.grid;
  if (!(g == field.grid))
    throw std::invalid_argument("potential_growth_check: grid mismatch");
  require_potential(V, "potential_growth_check");

  ConditionReport rep;
  rep.condition = "potential_growth";
  rep.params = {{"q", q}, {"N0", static_cast<double>(field.fitted_N0)}};
  const double h = g.spacing();
  const std::size_t N = g.num_points();
  const double dq2 = g.d / q - 2.0;

  double crossing_err = 0.0;
  for (int i = 0; i < samples; ++i) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(i)}));
    std::size_t x0 = static_cast<std::size_t>(rng.next_u64() % N);
    // Balls below two spacings are pure lattice artifacts (a single-cell
    // ball doubles into dozens of cells); start the radius scan resolved.
    double R = 2.0 * h * std::pow(g.side / (4.0 * h), rng.uniform());
    MassProfile mp = mass_profile(V, x0);
    double mass = mp.mass_below(R);
    ++rep.sample_count;
    if (mass <= 0.0) {
      ++rep.skipped;
      continue;
    }
    double rho = field.rho[x0];
    double lhs = std::pow(R, 2.0 - g.d) * mass;
    double rhs = std::pow(1.0 + R / rho, field.fitted_N0) *
                 std::pow(1.0 + rho / R, dq2);
    double ratio = lhs / rhs;
    if (ratio > rep.empirical_constant) {
      rep.empirical_constant = ratio;
      rep.worst = {x0, x0, R};
    }
    if (2.0 * R <= 0.5 * g.side) {
      double m2 = mp.mass_below(2.0 * R);
      rep.secondary_constant = std::max(rep.secondary_constant, m2 / mass);
    }
    if (rho < 0.5 * g.side) {
      double at_rho = std::pow(rho, 2.0 - g.d) * mp.mass_below(rho);
      crossing_err = std::max(crossing_err, std::fabs(at_rho - 1.0));
    }
  }
  rep.extras["doubling_C1"] = rep.secondary_constant;
  if (rep.secondary_constant > 0.0)
    rep.extras["N1_from_doubling"] =
        std::log2(rep.secondary_constant) + 2.0 - g.d;
  rep.extras["rho_crossing_max_err"] = crossing_err;
  return rep;
}

CoveringReport critical_covering(const CriticalRadiusField& field,
                                 double shrink) {
  if (!(shrink > 0.0) || shrink > 1.0)
    throw std::invalid_argument("critical_covering: shrink must be in (0,1]");
  const Grid& g = field.grid;
  const std::size_t N = g.num_points();
  const double h = g.spacing();
  for (std::size_t i = 0; i < N; ++i)
    if (shrink * field.rho[i] < h)
      throw std::invalid_argument(
          "critical_covering: shrink*rho falls below the grid spacing; "
          "the covering cannot resolve single cells");

  CoveringReport rep;
  std::vector<char> covered(N, 0);
  std::size_t ncov = 0, cursor = 0;
  while (ncov < N) {
    while (covered[cursor]) ++cursor;
    Ball Q{g.point(cursor), shrink * field.rho[cursor]};
    rep.balls.push_back(Q);
    for (std::size_t m : ball_points(g, Q)) {
      if (!covered[m]) {
        covered[m] = 1;
        ++ncov;
      }
    }
  }

  std::vector<int> sigmas = {1, 2, 4, 8};
  std::vector<double> lo(sigmas.size()), lc(sigmas.size());
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    std::vector<int> count(N, 0);
    for (const Ball& Q : rep.balls) {
      double r = std::min(sigmas[si] * Q.radius, 2.0 * g.side);
      for (std::size_t m : ball_points(g, {Q.center, r})) ++count[m];
    }
    int mx = 0;
    for (int c : count) mx = std::max(mx, c);
    rep.overlap_max[sigmas[si]] = mx;
    lo[si] = std::log(static_cast<double>(sigmas[si]));
    lc[si] = std::log(static_cast<double>(mx));
  }

  // Least squares log overlap ~ N1 * log sigma + const.
  double mx = std::accumulate(lo.begin(), lo.end(), 0.0) / lo.size();
  double my = std::accumulate(lc.begin(), lc.end(), 0.0) / lc.size();
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    sxx += (lo[i] - mx) * (lo[i] - mx);
    sxy += (lo[i] - mx) * (lc[i] - my);
    syy += (lc[i] - my) * (lc[i] - my);
  }
  rep.fitted_N1 = sxy / sxx;
  rep.fit_r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  rep.fitted_C = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i)
    rep.fitted_C = std::max(
        rep.fitted_C, std::exp(lc[i] - rep.fitted_N1 * lo[i]));
  return rep;
}

double gamma0(double C0, double N0) {
  if (C0 < 1.0 || N0 < 1.0)
    throw std::invalid_argument("gamma0: need C0 >= 1 and N0 >= 1");
  auto lhs = [&](double ga) {
    return 3.0 * ga * C0 * std::pow(1.0 + 2.0 * ga, N0);
  };
  double lo = 0.0, hi = 1.0;
  if (lhs(hi) <= 1.0) return hi;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (lhs(mid) <= 1.0 ? lo : hi) = mid;
  }
  return lo;
}

double default_shrink(const CriticalRadiusField& field) {
  double ga = gamma0(field.fitted_C0, field.fitted_N0);
  double foot = 1.0 / (2.0 * field.fitted_C0 *
                       std::pow(5.0 * std::sqrt(field.grid.d),
                                field.fitted_N0 + 1));
  return std::min(ga, foot);
}

namespace {

struct TruchoMesh {
  std::vector<double> R0;  // 16 geometric values in [spacing, side/4]
  // r values depend on R0: 16 geometric values in (R0, side/2]
  std::vector<double> r_for(double R0v, double side) const {
    std::vector<double> out(16);
    for (int j = 0; j < 16; ++j)
      out[j] = R0v * std::pow(0.5 * side / R0v, (j + 1) / 16.0);
    return out;
  }
};

TruchoMesh trucho_mesh(const Grid& g) {
  TruchoMesh m;
  double lo = g.spacing(), hi = 0.25 * g.side;
  for (int j = 0; j < 16; ++j)
    m.R0.push_back(lo * std::pow(hi / lo, j / 15.0));
  return m;
}

}  // namespace

ConditionReport trucho_check(const CriticalRadiusField& field, int samples,
                             std::uint64_t seed) {
  const Grid& g = field.grid;
  const std::size_t N = g.num_points();
  const double gamma =
      field.fitted_N0 *
      (1.0 + static_cast<double>(field.fitted_N0) / (field.fitted_N0 + 1));

  ConditionReport rep;
  rep.condition = "trucho";
  rep.params = {{"N0", static_cast<double>(field.fitted_N0)},
                {"gamma", gamma}};
  TruchoMesh mesh = trucho_mesh(g);

  auto eval = [&](std::size_t x0, double R0, std::size_t x, std::size_t y,
                  double r) {
    double rho0 = field.rho[x0], rhox = field.rho[x], rhoy = field.rho[y];
    double part1 = (1.0 + R0 / rhoy) / std::pow(1.0 + R0 / rho0,
                                                field.fitted_N0);
    double part2 = (1.0 + r / rhoy) /
                   (std::pow(1.0 + R0 / rho0, gamma) * (1.0 + r / rhox));
    rep.secondary_constant = std::max(rep.secondary_constant, part1);
    if (part2 > rep.empirical_constant) {
      rep.empirical_constant = part2;
      rep.worst = {x0, y, R0};
    }
    ++rep.sample_count;
  };

  if (samples == 0) {
    for (std::size_t x0 = 0; x0 < N; ++x0) {
      Point p0 = g.point(x0);
      for (double R0 : mesh.R0) {
        auto members = ball_points(g, {p0, R0});
        auto rs = mesh.r_for(R0, g.side);
        for (std::size_t x : members)
          for (std::size_t y : members)
            for (double r : rs) eval(x0, R0, x, y, r);
      }
    }
  } else {
    for (int i = 0; i < samples; ++i) {
      Rng rng(derive_seed({seed, static_cast<std::uint64_t>(i)}));
      std::size_t x0 = static_cast<std::size_t>(rng.next_u64() % N);
      double R0 = mesh.R0[rng.uniform_int(0, 15)];
      auto members = ball_points(g, {g.point(x0), R0});
      std::size_t x = members[rng.next_u64() % members.size()];
      std::size_t y = members[rng.next_u64() % members.size()];
      double r = mesh.r_for(R0, g.side)[rng.uniform_int(0, 15)];
      eval(x0, R0, x, y, r);
    }
  }
  return rep;
}

}  // namespace rieszlab
