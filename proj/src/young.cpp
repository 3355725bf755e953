#include "rieszlab/young.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rieszlab {

static double base_eval(const YoungFunction& A, double t) {
  switch (A.family) {
    case YoungFamily::Power:
      return std::pow(t, A.a);
    case YoungFamily::LogPower:
      return t * std::pow(std::log1p(t), A.a);
    case YoungFamily::LogLog:
      return t * std::pow(std::log1p(t), A.a) *
             std::pow(std::log(std::exp(1.0) + std::log1p(t)), A.b);
  }
  return 0.0;
}

double YoungFunction::operator()(double t) const {
  if (t < 0.0) throw std::invalid_argument("YoungFunction: negative argument");
  if (t == 0.0) return 0.0;
  return base_eval(*this, scale * t);
}

// Solves base(s) = 1 for the normalizing argument scale.
static double solve_scale(const YoungFunction& proto) {
  double lo = 1e-12, hi = 1.0;
  while (base_eval(proto, hi) < 1.0) hi *= 2.0;
  while (base_eval(proto, lo) > 1.0) lo *= 0.5;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (base_eval(proto, mid) < 1.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

YoungFunction young_power(double r) {
  if (r < 1.0) throw std::invalid_argument("young_power: need r >= 1");
  return YoungFunction{YoungFamily::Power, r, 0.0, 1.0};
}

YoungFunction young_logpower(double a) {
  if (a < 0.0) throw std::invalid_argument("young_logpower: need a >= 0");
  YoungFunction A{YoungFamily::LogPower, a, 0.0, 1.0};
  if (a > 0.0) A.scale = solve_scale(A);
  return A;
}

YoungFunction young_loglog(double a, double b) {
  if (a < 0.0 || b < 0.0)
    throw std::invalid_argument("young_loglog: need a, b >= 0");
  YoungFunction A{YoungFamily::LogLog, a, b, 1.0};
  A.scale = solve_scale(A);
  return A;
}

YoungFunction parse_young(const std::string& tag) {
  auto colon = tag.find(':');
  std::string head = tag.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : tag.substr(colon + 1);
  try {
    if (head == "power") return young_power(std::stod(args));
    if (head == "logpower") return young_logpower(std::stod(args));
    if (head == "loglog") {
      auto comma = args.find(',');
      if (comma == std::string::npos) throw std::invalid_argument(tag);
      return young_loglog(std::stod(args.substr(0, comma)),
                          std::stod(args.substr(comma + 1)));
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("parse_young: bad parameters in '" + tag + "'");
  }
  throw std::invalid_argument("parse_young: unknown family in '" + tag +
                              "' (expected power:r, logpower:a, loglog:a,b)");
}

std::string young_name(const YoungFunction& A) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
  };
  switch (A.family) {
    case YoungFamily::Power:
      return "power:" + num(A.a);
    case YoungFamily::LogPower:
      return "logpower:" + num(A.a);
    case YoungFamily::LogLog:
      return "loglog:" + num(A.a) + "," + num(A.b);
  }
  return "?";
}

double young_eval(const YoungFunction& A, double t, bool inverse) {
  if (t < 0.0) throw std::invalid_argument("young_eval: negative argument");
  if (!inverse) return A(t);
  if (t == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (A(hi) < t) hi *= 2.0;
  if (A(hi) == t) return hi;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (A(mid) < t ? lo : hi) = mid;
    if (hi - lo <= 1e-12 * hi) break;
  }
  return 0.5 * (lo + hi);
}

double luxemburg_values(const double* vals, std::size_t count,
                        const YoungFunction& A) {
  if (count == 0)
    throw std::invalid_argument("luxemburg_values: empty sample set");
  double vmax = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    vmax = std::max(vmax, std::fabs(vals[i]));
  if (vmax == 0.0) return 0.0;

  // Mean of A(|f|/lambda); the spacing^d weights cancel against |B|.
  auto phi = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i)
      s += A(std::fabs(vals[i]) / lambda);
    return s / static_cast<double>(count);
  };

  // A(1) = 1 makes lambda = vmax always admissible.
  double hi = vmax, lo = vmax;
  for (int it = 0; it < 1100; ++it) {
    lo *= 0.5;
    if (phi(lo) > 1.0) break;
    hi = lo;
  }
  if (phi(lo) <= 1.0) return lo;  // numerically zero function
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (phi(mid) <= 1.0 ? hi : lo) = mid;
    if (hi - lo <= 1e-8 * hi) break;
  }
  return hi;
}

double luxemburg_avg(const GridFunction& f, const Ball& ball,
                     const YoungFunction& A) {
  auto members = ball_points(f.grid, ball);
  if (members.empty())
    throw std::invalid_argument("luxemburg_avg: ball contains no grid point");
  std::vector<double> vals(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) vals[i] = f[members[i]];
  return luxemburg_values(vals.data(), vals.size(), A);
}

DpReport dp_membership(const YoungFunction& A, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("dp_membership: need p > 1");
  const double pprime = p / (p - 1.0);
  const int blocks = 40;      // covers [1, 2^40) ~ 1.1e12
  const int samples = 64;     // log-midpoint rule per block
  const double ln2 = std::log(2.0);

  // S_k = integral over [2^k, 2^{k+1}) of (t/A(t))^{p'-1} dt/t.
  std::vector<double> S(blocks, 0.0);
  for (int k = 0; k < blocks; ++k) {
    double acc = 0.0;
    for (int j = 0; j < samples; ++j) {
      double u = (k + (j + 0.5) / samples) * ln2;  // u = log t
      double t = std::exp(u);
      acc += std::pow(t / A(t), pprime - 1.0);
    }
    S[k] = acc * ln2 / samples;
  }

  DpReport rep;
  for (double s : S) rep.tail_estimate += s;

  // Stage 1: median ratio of consecutive block sums over the last 8 blocks.
  std::vector<double> ratios;
  for (int k = blocks - 9; k < blocks - 1; ++k) ratios.push_back(S[k + 1] / S[k]);
  std::sort(ratios.begin(), ratios.end());
  rep.block_ratio = 0.5 * (ratios[3] + ratios[4]);

  if (rep.block_ratio >= 1.0 - 1e-3) {
    rep.verdict = DpVerdict::Out;  // blocks stabilize or grow
    rep.tail_rate = 0.0;
    return rep;
  }
  if (rep.block_ratio <= 0.9) {
    rep.verdict = DpVerdict::In;  // geometric decay
    rep.tail_rate = -std::log2(rep.block_ratio);
    return rep;
  }

  // Stage 2: blocks decay polynomially, S_k ~ k^{-beta}; Richardson-style
  // extrapolation of the local rate alpha(k) = log(S_k/S_{k+1})/log((k+2)/(k+1))
  // removes the leading 1/k correction. Convergence means beta > 1.
  auto alpha = [&](int k) {
    return std::log(S[k] / S[k + 1]) /
           std::log(static_cast<double>(k + 2) / (k + 1));
  };
  auto beta_pair = [&](int k2) {
    int k1 = k2 / 2;
    return ((k2 + 1) * alpha(k2) - (k1 + 1) * alpha(k1)) /
           static_cast<double>(k2 - k1);
  };
  double b1 = beta_pair(blocks - 2);
  double b2 = beta_pair(blocks - 3);
  rep.spread = std::fabs(b1 - b2);
  rep.tail_rate = 0.5 * (b1 + b2);
  if (rep.spread > 0.1) {
    rep.verdict = DpVerdict::Inconclusive;
  } else if (rep.tail_rate > 1.028) {
    rep.verdict = DpVerdict::In;
  } else if (rep.tail_rate < 1.012) {
    rep.verdict = DpVerdict::Out;
  } else {
    rep.verdict = DpVerdict::Inconclusive;
  }
  return rep;
}

}  // namespace rieszlab
