#include "rieszlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rieszlab {

std::size_t Grid::num_points() const {
  std::size_t t = 1;
  for (int a = 0; a < d; ++a) t *= static_cast<std::size_t>(n);
  return t;
}

std::array<int, 3> Grid::unpack(std::size_t idx) const {
  std::array<int, 3> c{0, 0, 0};
  for (int a = d - 1; a >= 0; --a) {
    c[a] = static_cast<int>(idx % n);
    idx /= n;
  }
  return c;
}

std::size_t Grid::pack(int i0, int i1, int i2) const {
  auto wrap = [this](int i) {
    int r = i % n;
    return r < 0 ? r + n : r;
  };
  std::size_t idx = wrap(i0);
  if (d > 1) idx = idx * n + wrap(i1);
  if (d > 2) idx = idx * n + wrap(i2);
  return idx;
}

Point Grid::point(std::size_t idx) const {
  auto c = unpack(idx);
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) x[a] = c[a] * spacing();
  return x;
}

std::size_t Grid::nearest_index(const Point& x) const {
  int c[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    double t = x[a] / spacing();
    c[a] = static_cast<int>(std::lround(t));
  }
  return pack(c[0], c[1], c[2]);
}

double Grid::dist(const Point& x, const Point& y) const {
  double s2 = 0.0;
  for (int a = 0; a < d; ++a) {
    double delta = std::fabs(x[a] - y[a]);
    delta = std::fmod(delta, side);
    delta = std::min(delta, side - delta);
    s2 += delta * delta;
  }
  return std::sqrt(s2);
}

double Grid::dist(std::size_t i, std::size_t j) const {
  return dist(point(i), point(j));
}

Grid make_grid(int d, int n, double side) {
  if (d < 1 || d > 3)
    throw std::invalid_argument("make_grid: d must be 1, 2, or 3 (got " +
                                std::to_string(d) + ")");
  if (n < 4) throw std::invalid_argument("make_grid: n must be >= 4");
  if (n % 2 != 0)
    throw std::invalid_argument(
        "make_grid: n must be even (spectral symmetry), got " +
        std::to_string(n));
  if (!(side > 0.0)) throw std::invalid_argument("make_grid: side must be > 0");
  return Grid{d, n, side};
}

GridFunction::GridFunction(const Grid& g, double fill)
    : grid(g), values(g.num_points(), fill) {}

GridFunction constant_function(const Grid& g, double c) {
  return GridFunction(g, c);
}

std::vector<std::size_t> ball_points(const Grid& g, const Ball& b) {
  if (!(b.radius > 0.0) || b.radius > 2.0 * g.side)
    throw std::invalid_argument("ball_points: radius must lie in (0, 2*side]");
  const double h = g.spacing();
  const double r = b.radius;

  // Candidate index window per axis around the center, then the exact
  // periodic-distance test. The window covers every lattice coordinate whose
  // periodic offset can be below r.
  std::array<std::vector<int>, 3> axis_idx;
  std::array<std::vector<double>, 3> axis_d2;
  for (int a = 0; a < g.d; ++a) {
    int lo = static_cast<int>(std::floor((b.center[a] - r) / h)) - 1;
    int hi = static_cast<int>(std::ceil((b.center[a] + r) / h)) + 1;
    if (hi - lo + 1 >= g.n) {
      lo = 0;
      hi = g.n - 1;
    }
    std::vector<char> seen(g.n, 0);
    for (int i = lo; i <= hi; ++i) {
      int iw = i % g.n;
      if (iw < 0) iw += g.n;
      if (seen[iw]) continue;
      seen[iw] = 1;
      double delta = std::fabs(iw * h - b.center[a]);
      delta = std::fmod(delta, g.side);
      delta = std::min(delta, g.side - delta);
      axis_idx[a].push_back(iw);
      axis_d2[a].push_back(delta * delta);
    }
  }
  for (int a = g.d; a < 3; ++a) {
    axis_idx[a].push_back(0);
    axis_d2[a].push_back(0.0);
  }

  const double r2 = r * r;
  std::vector<std::size_t> out;
  for (std::size_t i0 = 0; i0 < axis_idx[0].size(); ++i0)
    for (std::size_t i1 = 0; i1 < axis_idx[1].size(); ++i1)
      for (std::size_t i2 = 0; i2 < axis_idx[2].size(); ++i2) {
        double d2 = axis_d2[0][i0] + axis_d2[1][i1] + axis_d2[2][i2];
        if (d2 < r2)
          out.push_back(
              g.pack(axis_idx[0][i0], axis_idx[1][i1], axis_idx[2][i2]));
      }
  std::sort(out.begin(), out.end());
  return out;
}

double ball_measure(const Grid& g, const Ball& b) {
  double hd = std::pow(g.spacing(), g.d);
  return hd * static_cast<double>(ball_points(g, b).size());
}

static void check_same_grid(const Grid& a, const Grid& b, const char* who) {
  if (!(a == b))
    throw std::invalid_argument(std::string(who) +
                                ": operands live on different grids");
}

double integrate(const GridFunction& f, const GridFunction* w,
                 const Ball* region) {
  if (w) check_same_grid(f.grid, w->grid, "integrate");
  const double hd = std::pow(f.grid.spacing(), f.grid.d);
  double s = 0.0;
  if (!region) {
    if (w) {
      for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * (*w)[i];
    } else {
      for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
    }
  } else {
    for (std::size_t i : ball_points(f.grid, *region))
      s += f[i] * (w ? (*w)[i] : 1.0);
  }
  return s * hd;
}

double lp_norm(const GridFunction& f, double p, const GridFunction* w) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (w) check_same_grid(f.grid, w->grid, "lp_norm");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::fabs(v));
    return m;
  }
  const double hd = std::pow(f.grid.spacing(), f.grid.d);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    s += std::pow(std::fabs(f[i]), p) * (w ? (*w)[i] : 1.0);
  return std::pow(s * hd, 1.0 / p);
}

double level_measure(const GridFunction& f, const GridFunction& w,
                     double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("level_measure: lambda must be > 0");
  check_same_grid(f.grid, w.grid, "level_measure");
  const double hd = std::pow(f.grid.spacing(), f.grid.d);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::fabs(f[i]) > lambda) s += w[i];
  return s * hd;
}

}  // namespace rieszlab
