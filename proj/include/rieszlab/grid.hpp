#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace rieszlab {

// Coordinates of a point in the periodic box [0, side)^d. Axes beyond d are 0.
using Point = std::array<double, 3>;

// Flat periodic box: n points per axis at coordinates i*spacing, d in {1,2,3}.
// Linear indices are row-major with axis 0 slowest.
struct Grid {
  int d = 0;
  int n = 0;
  double side = 0.0;

  double spacing() const { return side / n; }
  std::size_t num_points() const;

  std::array<int, 3> unpack(std::size_t idx) const;
  std::size_t pack(int i0, int i1 = 0, int i2 = 0) const;  // indices taken mod n
  Point point(std::size_t idx) const;
  std::size_t nearest_index(const Point& x) const;

  // Euclidean length of the coordinate-wise minimal periodic difference.
  double dist(const Point& x, const Point& y) const;
  double dist(std::size_t i, std::size_t j) const;

  bool operator==(const Grid&) const = default;
};

// Throws std::invalid_argument unless d in {1,2,3}, n >= 4 even, side > 0.
Grid make_grid(int d, int n, double side);

struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const Grid& g, double fill = 0.0);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

GridFunction constant_function(const Grid& g, double c);

// Open periodic ball. Membership is dist(center, x) < radius (strict, so
// lattice-distance ties resolve deterministically). Radii up to 2*side are
// accepted: beyond the torus diameter the ball saturates to the whole grid.
// Ball dictionaries and critical radii stay within side/2 themselves.
struct Ball {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.0;
};

// Grid indices at periodic distance < radius from the center, in increasing
// linear-index order. Throws if radius is outside (0, 2*side].
std::vector<std::size_t> ball_points(const Grid& g, const Ball& b);

// Quadrature measure of the ball: spacing^d * (number of member points).
double ball_measure(const Grid& g, const Ball& b);

// Cell-sum quadrature: sum over points (in region) of f*w*spacing^d.
// w == nullptr means weight 1; region == nullptr means the whole torus.
double integrate(const GridFunction& f, const GridFunction* w = nullptr,
                 const Ball* region = nullptr);

// (integrate(|f|^p, w))^{1/p}; p = infinity gives max|f| (unweighted).
double lp_norm(const GridFunction& f, double p, const GridFunction* w = nullptr);

// w-measure of the superlevel set {x : |f(x)| > lambda}.
double level_measure(const GridFunction& f, const GridFunction& w, double lambda);

}  // namespace rieszlab
