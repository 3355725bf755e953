#include "rieszlab/maximal.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace rieszlab {

std::size_t BallDictionary::ball_count() const {
  std::size_t centers = 1, all = 1;
  for (int a = 0; a < grid.d; ++a) {
    centers *= static_cast<std::size_t>(grid.n / stride);
    all *= static_cast<std::size_t>(grid.n);
  }
  std::size_t count = centers * radii.size();
  if (stride > 1) count += all - centers;  // single-cell balls everywhere
  return count;
}

static std::vector<std::array<int, 3>> make_stencil(const Grid& g, double r) {
  const double h = g.spacing();
  const double r2 = r * r;
  int lo = -(g.n / 2) + 1, hi = g.n / 2;
  std::vector<std::array<int, 3>> out;
  auto axis_d2 = [&](int o) {
    double t = std::fabs(o) * h;
    return t * t;
  };
  for (int o0 = lo; o0 <= hi; ++o0) {
    double d0 = axis_d2(o0);
    if (d0 >= r2) continue;
    if (g.d == 1) {
      out.push_back({o0, 0, 0});
      continue;
    }
    for (int o1 = lo; o1 <= hi; ++o1) {
      double d1 = d0 + axis_d2(o1);
      if (d1 >= r2) continue;
      if (g.d == 2) {
        out.push_back({o0, o1, 0});
        continue;
      }
      for (int o2 = lo; o2 <= hi; ++o2)
        if (d1 + axis_d2(o2) < r2) out.push_back({o0, o1, o2});
    }
  }
  return out;
}

BallDictionary build_dictionary(const Grid& g, int k_radii, int stride) {
  if (k_radii < 8)
    throw std::invalid_argument("build_dictionary: need k_radii >= 8");
  if (stride < 1 || g.n % stride != 0)
    throw std::invalid_argument("build_dictionary: stride must divide n");
  BallDictionary dict;
  dict.grid = g;
  dict.k_radii = k_radii;
  dict.stride = stride;
  const double r0 = 0.51 * g.spacing();
  const double r1 = 0.5 * g.side;
  for (int i = 0; i < k_radii; ++i) {
    double t = k_radii == 1 ? 0.0 : static_cast<double>(i) / (k_radii - 1);
    dict.radii.push_back(r0 * std::pow(r1 / r0, t));
  }
  for (double r : dict.radii) dict.stencils.push_back(make_stencil(g, r));
  return dict;
}

MaximalSpec maximal_full(const YoungFunction& A,
                         std::shared_ptr<const BallDictionary> dict,
                         int compose_with_hl) {
  MaximalSpec s;
  s.young = A;
  s.mode = MaximalMode::Full;
  s.dict = std::move(dict);
  s.compose_with_hl = compose_with_hl;
  return s;
}

MaximalSpec maximal_local(const YoungFunction& A,
                          std::shared_ptr<const BallDictionary> dict,
                          std::shared_ptr<const GridFunction> rho) {
  MaximalSpec s;
  s.young = A;
  s.mode = MaximalMode::Local;
  s.dict = std::move(dict);
  s.rho = std::move(rho);
  return s;
}

MaximalSpec maximal_theta(const YoungFunction& A,
                          std::shared_ptr<const BallDictionary> dict,
                          std::shared_ptr<const GridFunction> rho,
                          double theta) {
  if (theta < 0.0) throw std::invalid_argument("maximal_theta: need theta >= 0");
  MaximalSpec s;
  s.young = A;
  s.mode = MaximalMode::Theta;
  s.dict = std::move(dict);
  s.rho = std::move(rho);
  s.theta = theta;
  return s;
}

namespace {

// One maximal pass (no composition), d = 1, power-family Young function:
// balls are contiguous periodic windows, so window sums come from a prefix
// array and the scatter-max is a sliding-window maximum.
GridFunction apply_power_1d(const GridFunction& f, const MaximalSpec& spec) {
  const Grid& g = f.grid;
  const int n = g.n;
  const double r_exp = spec.young.power_exponent();
  const auto& dict = *spec.dict;

  std::vector<double> pw(n);
  for (int i = 0; i < n; ++i) {
    double v = std::fabs(f[i]);
    pw[i] = r_exp == 1.0 ? v : std::pow(v, r_exp);
  }
  std::vector<double> prefix(3 * n + 1, 0.0);
  for (int j = 0; j < 3 * n; ++j) prefix[j + 1] = prefix[j] + pw[j % n];

  const double neg = -1.0;
  GridFunction out(g, neg);
  std::vector<double> val(n);
  for (std::size_t ri = 0; ri < dict.radii.size(); ++ri) {
    const double r = dict.radii[ri];
    const int a = dict.stencils[ri].empty()
                      ? -1
                      : (static_cast<int>(dict.stencils[ri].size()) - 1) / 2;
    if (a < 0) continue;
    const int m = 2 * a + 1;
    const bool subsampled = dict.stride > 1 && ri > 0;
    for (int c = 0; c < n; ++c) {
      val[c] = neg;
      if (subsampled && c % dict.stride != 0) continue;
      if (spec.mode == MaximalMode::Local && r > (*spec.rho)[c]) continue;
      double s = prefix[c + a + 1 + n] - prefix[c - a + n];
      double v = s / m;
      if (r_exp != 1.0) v = std::pow(v, 1.0 / r_exp);
      if (spec.mode == MaximalMode::Theta)
        v *= std::pow(1.0 + r / (*spec.rho)[c], -spec.theta);
      val[c] = v;
    }
    // out[x] = max over centers c in [x-a, x+a] of val[c].
    std::deque<int> dq;
    for (int t = -a; t < n + a; ++t) {
      double v = val[(t % n + n) % n];
      while (!dq.empty() && val[(dq.back() % n + n) % n] <= v) dq.pop_back();
      dq.push_back(t);
      while (dq.front() < t - 2 * a) dq.pop_front();
      int x = t - a;
      if (x >= 0 && x < n) {
        double best = val[(dq.front() % n + n) % n];
        if (best > out[x]) out.values[x] = best;
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (out[i] < 0.0)
      throw std::runtime_error(
          "maximal_apply: empty admissible ball set at a grid point");
  return out;
}

GridFunction apply_general(const GridFunction& f, const MaximalSpec& spec) {
  const Grid& g = f.grid;
  const std::size_t N = g.num_points();
  const auto& dict = *spec.dict;
  const bool power = spec.young.is_power();
  const double r_exp = power ? spec.young.power_exponent() : 0.0;

  std::vector<double> va(N), pw;
  for (std::size_t i = 0; i < N; ++i) va[i] = std::fabs(f[i]);
  if (power) {
    pw.resize(N);
    for (std::size_t i = 0; i < N; ++i)
      pw[i] = r_exp == 1.0 ? va[i] : std::pow(va[i], r_exp);
  }

  // Wrapped index lookup: wrap[j + n] == j mod n for j in [-n, 2n).
  std::vector<int> wrap(3 * g.n);
  for (int j = -g.n; j < 2 * g.n; ++j) wrap[j + g.n] = (j % g.n + g.n) % g.n;

  GridFunction out(g, -1.0);
  std::vector<double> scratch;
  std::vector<std::size_t> members;

  for (std::size_t ri = 0; ri < dict.radii.size(); ++ri) {
    const double r = dict.radii[ri];
    const auto& stencil = dict.stencils[ri];
    if (stencil.empty()) continue;
    const std::size_t m = stencil.size();
    const int step = (dict.stride > 1 && ri > 0) ? dict.stride : 1;
    members.resize(m);
    if (!power) scratch.resize(m);

    int c0 = 0, c1 = 0, c2 = 0;
    for (std::size_t c = 0; c < N; ++c) {
      bool admissible = (c0 % step == 0) && (c1 % step == 0) && (c2 % step == 0);
      if (admissible && spec.mode == MaximalMode::Local &&
          r > (*spec.rho)[c])
        admissible = false;
      if (admissible) {
        for (std::size_t k = 0; k < m; ++k) {
          const auto& o = stencil[k];
          std::size_t idx = wrap[c0 + o[0] + g.n];
          if (g.d > 1) idx = idx * g.n + wrap[c1 + o[1] + g.n];
          if (g.d > 2) idx = idx * g.n + wrap[c2 + o[2] + g.n];
          members[k] = idx;
        }
        double v;
        if (power) {
          double s = 0.0;
          for (std::size_t k = 0; k < m; ++k) s += pw[members[k]];
          v = s / static_cast<double>(m);
          if (r_exp != 1.0) v = std::pow(v, 1.0 / r_exp);
        } else {
          for (std::size_t k = 0; k < m; ++k) scratch[k] = va[members[k]];
          v = luxemburg_values(scratch.data(), m, spec.young);
        }
        if (spec.mode == MaximalMode::Theta)
          v *= std::pow(1.0 + r / (*spec.rho)[c], -spec.theta);
        for (std::size_t k = 0; k < m; ++k)
          if (v > out[members[k]]) out.values[members[k]] = v;
      }
      // advance the multi-index (axis 0 slowest)
      if (g.d == 1) {
        ++c0;
      } else if (g.d == 2) {
        if (++c1 == g.n) {
          c1 = 0;
          ++c0;
        }
      } else {
        if (++c2 == g.n) {
          c2 = 0;
          if (++c1 == g.n) {
            c1 = 0;
            ++c0;
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < N; ++i)
    if (out[i] < 0.0)
      throw std::runtime_error(
          "maximal_apply: empty admissible ball set at a grid point");
  return out;
}

GridFunction apply_once(const GridFunction& f, const MaximalSpec& spec) {
  if (!spec.dict) throw std::invalid_argument("maximal_apply: no dictionary");
  if (!(spec.dict->grid == f.grid))
    throw std::invalid_argument("maximal_apply: dictionary grid mismatch");
  if (spec.mode != MaximalMode::Full) {
    if (!spec.rho || !(spec.rho->grid == f.grid))
      throw std::invalid_argument(
          "maximal_apply: Local/Theta need a critical radius field on the "
          "same grid");
  }
  if (f.grid.d == 1 && spec.young.is_power()) return apply_power_1d(f, spec);
  return apply_general(f, spec);
}

}  // namespace

GridFunction maximal_apply(const GridFunction& f, const MaximalSpec& spec) {
  GridFunction out = apply_once(f, spec);
  if (spec.compose_with_hl > 0) {
    MaximalSpec hl = maximal_full(young_power(1.0), spec.dict);
    for (int k = 0; k < spec.compose_with_hl; ++k) out = apply_once(out, hl);
  }
  return out;
}

std::string maximal_name(const MaximalSpec& spec) {
  std::string s = "M";
  if (spec.mode == MaximalMode::Local) s += "loc";
  if (spec.mode == MaximalMode::Theta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "^theta=%g", spec.theta);
    s += buf;
  }
  s += "[" + young_name(spec.young) + "]";
  for (int k = 0; k < spec.compose_with_hl; ++k) s += "oM";
  return s;
}

}  // namespace rieszlab
