#pragma once

#include <string>

#include "rieszlab/grid.hpp"

namespace rieszlab {

enum class YoungFamily { Power, LogPower, LogLog };

// Parametric Young function, rescaled in the argument so that A(1) = 1:
//   Power(r):      base(t) = t^r
//   LogPower(a):   base(t) = t * log^a(1+t)
//   LogLog(a, b):  base(t) = t * log^a(1+t) * log^b(e + log(1+t))
// A(t) = base(scale * t) with base(scale) = 1.
struct YoungFunction {
  YoungFamily family = YoungFamily::Power;
  double a = 1.0;  // exponent r for Power, log exponent otherwise
  double b = 0.0;  // second exponent for LogLog
  double scale = 1.0;

  double operator()(double t) const;

  bool is_power() const { return family == YoungFamily::Power; }
  double power_exponent() const { return a; }
};

YoungFunction young_power(double r);
YoungFunction young_logpower(double a);
YoungFunction young_loglog(double a, double b);

// Config-facing names: "power:r", "logpower:a", "loglog:a,b".
YoungFunction parse_young(const std::string& tag);
std::string young_name(const YoungFunction& A);

// Forward evaluation or monotone-bracketed inverse (relative tol 1e-12).
double young_eval(const YoungFunction& A, double t, bool inverse = false);

// Luxemburg gauge of f over the ball:
//   inf{ lambda > 0 : (1/|B|) sum_{x in B} A(|f(x)|/lambda) spacing^d <= 1 },
// by bracket doubling plus bisection to relative tol 1e-8. 0 for f == 0 on B.
double luxemburg_avg(const GridFunction& f, const Ball& ball,
                     const YoungFunction& A);

// Same gauge over an explicit list of sample values (all equal quadrature
// weight); used by the maximal operators.
double luxemburg_values(const double* vals, std::size_t count,
                        const YoungFunction& A);

enum class DpVerdict { In, Out, Inconclusive };

struct DpReport {
  DpVerdict verdict = DpVerdict::Inconclusive;
  double tail_estimate = 0.0;  // partial integral of (t/A(t))^{p'-1} dt/t from 1
  double tail_rate = 0.0;      // fitted polynomial decay rate of the block sums
  double block_ratio = 0.0;    // median ratio of consecutive dyadic block sums
  double spread = 0.0;         // disagreement of the two tail-rate estimates
};

// Tail-convergence test for the integral defining the D_p class, on dyadic
// blocks [2^k, 2^{k+1}) up to ~1e12. Geometric decay of the block sums means
// convergent; stabilized or growing blocks mean divergent; in between, the
// polynomial rate of the blocks is extrapolated and compared against 1, with
// an explicit inconclusive band around the boundary.
DpReport dp_membership(const YoungFunction& A, double p);

}  // namespace rieszlab
