#pragma once

// Reference values computed independently of the library.

#include <cmath>

namespace oracle {

// One-dimensional hitting probability from e_1: the root in [0, 1] of
// h = p/2 + (p/2) h^2 (first step to O, or to 2 e_1 which must hit e_1 first).
inline double r1(double p) { return p == 0.0 ? 0.0 : (1.0 - std::sqrt(1.0 - p * p)) / p; }

// Threshold-model K on d = 1 with the closed-form R.
inline double k1(double lambda, double p) {
  const double r = r1(p);
  return (4.0 * lambda / p) * (1.0 - r) - 1.0 - 2.0 * lambda * r;
}

// Plain bisection for a decreasing function with a sign change on (lo, hi).
template <class F>
double bisect(F f, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double m = 0.5 * (lo + hi);
    (f(m) > 0.0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

// e^{-x} I_0(x) from the standard library.
inline double scaled_i0(double x) { return std::exp(-x) * std::cyl_bessel_i(0.0, x); }

// Frozen values from 30-digit quadrature of the lattice Green function
// G(d, p) = int_0^inf e^{-t} I_0(p t / d)^d dt, with R(e1) = (G - 1) / (p G).
struct GreenValue {
  int d;
  double p;
  double r_e1;
};
inline constexpr GreenValue kGreen[] = {
    {2, 0.3, 0.07722049502297995}, {2, 0.6, 0.17131427980826494}, {2, 0.9, 0.3458001504354728},
    {3, 0.3, 0.051180036945454976}, {3, 0.6, 0.1111718576982092}, {3, 0.9, 0.21003507511946168},
};

// Fixed points (threshold model) at lambda = 0.2 / d from the same quadrature.
struct FixedPointValue {
  int d;
  double p_star;
  double mu;
};
inline constexpr FixedPointValue kFixedPoint[] = {
    {1, 0.518459097, 0.743033971},
    {2, 0.532871751, 0.701299324},
    {3, 0.542639349, 0.674275690},
};

// Scaled fixed points p(0.25 / d, d); r_e1 only for the threshold model.
struct LimitValue {
  int d;
  double p_threshold;
  double p_classic;
};
inline constexpr LimitValue kLimit[] = {
    {1, 0.583773, 0.554700}, {2, 0.603059, 0.598529}, {3, 0.618072, 0.618954},
    {5, 0.634794, 0.637345}, {10, 0.649944, 0.651884}, {20, 0.658153, 0.659263},
};

// 2 d R(e1, d, c) for c = 0.3 and c = 2/3.
struct ScaledHit {
  int d;
  double c03;
  double c23;
};
inline constexpr ScaledHit kScaledHit[] = {
    {1, 0.30707199055369566, 0.7639320225002103}, {2, 0.3088819800919198, 0.7919836189381194},
    {3, 0.30708022167272986, 0.7646286207531139}, {5, 0.30475562585537114, 0.7282742233044434},
    {10, 0.3025484460460452, 0.6972066886331147}, {20, 0.30131333415818784, 0.6817331191858788},
};

}  // namespace oracle
