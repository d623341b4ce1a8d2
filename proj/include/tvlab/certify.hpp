#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvlab/grid.hpp"

namespace tvlab {

// Non-decreasing temporal profile: 0 before ramp_begin, 1 after ramp_end,
// linear between. ramp_end <= ramp_begin means constant one.
struct TimeCutoff {
  double ramp_begin = 0.0;
  double ramp_end = 0.0;
  double rate_bound = 0.0;  // recorded sup of the a.e. derivative

  static TimeCutoff one() { return TimeCutoff{0.0, 0.0, 0.0}; }
  static TimeCutoff ramp(double begin, double end);

  bool constant() const { return !(ramp_end > ramp_begin); }
  double value(double t) const;
};

// Spatial profile on the field's grid, vanishing outside its support ball,
// with a verified Lipschitz bound.
struct SpatialCutoff {
  std::vector<double> values;  // one per cell
  Ball support;
  double lipschitz = 0.0;
};

// Product cutoff zeta(x,t) = zeta1(x) zeta2(t).
struct Cutoff {
  SpatialCutoff space;
  TimeCutoff time;
};

// Radial trapezoid: 1 inside inner_radius, 0 outside the support ball, linear
// between. The recorded bound 1/(outer-inner) is checked against forward
// differences at construction.
Cutoff make_radial_cutoff(const SpaceTimeField& field, const Ball& support,
                          double inner_radius, const TimeCutoff& time);

enum class TruncationSign { Plus, Minus };

struct TruncationSpec {
  double level = 0.0;
  TruncationSign sign = TruncationSign::Plus;
  double offset = 0.0;  // ell
};

// (u-k)+ or (u-k)- pointwise.
double truncate_value(double u, const TruncationSpec& trunc);

// Term-by-term evaluation of the truncation energy inequality over an
// intrinsic cylinder. slack = RHS - LHS is the certified quantity.
struct EnergyBudget {
  double lhs_sup_term = 0.0;
  double lhs_tv_term = 0.0;
  double rhs_gradient_term = 0.0;
  double rhs_time_term = 0.0;
  double rhs_initial_term = 0.0;
  double slack = 0.0;

  double lhs() const { return lhs_sup_term + lhs_tv_term; }
  double rhs() const { return rhs_gradient_term + rhs_time_term + rhs_initial_term; }
};

struct DualField;  // flow.hpp

// Space-time gap of the variational inequality over one window:
//   integral of [ ||D(u+phi)(t)|| - ||Du(t)|| - int u_t phi dx ] dt
// over [window_begin, window_end], TV measured on the ball. phi must vanish
// outside the ball's 2h-interior and at the window's end stamps.
double minimizer_gap(const SpaceTimeField& field, const SpaceTimeField& u_t,
                     const SpaceTimeField& phi, double window_begin, double window_end,
                     const Ball& ball);

// Evaluates each term of the truncation energy inequality with constant gamma:
//   sup_t int w^2 zeta dx + int ||D(w zeta)|| dt
//     <= gamma iint [w |Dzeta| + w^2 |zeta_t|] + int w^2 zeta(., window start)
// where w = (u-k)+-. Every term is reported; slack = RHS - LHS.
EnergyBudget dg_energy_report(const SpaceTimeField& field, const Cylinder& cyl,
                              const TruncationSpec& trunc, const Cutoff& cutoff,
                              double gamma);

// Both sides of the truncation-test inequality for the flow pair (u, z),
// with P(s) the antiderivative of the truncation test:
//   int P(u-l) zeta(t2) + iint zeta d||Dp(u-l)||
//     <= int P(u-l) zeta(t1) + iint P(u-l) zeta_t - iint z . Dzeta p(u-l)
// Returns RHS - LHS. Errors if sup|z| exceeds admissibility.
double one_laplacian_certificate(const SpaceTimeField& field, const DualField& z,
                                 const TruncationSpec& trunc, const Cutoff& cutoff,
                                 double t1, double t2);

// ---------------------------------------------------------------------------
// Randomized certification suites (seeded, order-independent draws).

struct EnergyDraw {
  Vec3 center{};
  double rho = 0.0;
  double t_begin = 0.0, t_end = 0.0;
  double level = 0.0;
  TruncationSign sign = TruncationSign::Plus;
  double inner_fraction = 0.0, outer_fraction = 0.0, ramp_fraction = 0.0;
  EnergyBudget budget;
  double slack_scale = 1.0;     // 1 + |LHS| + |RHS|
  double gamma_needed = 0.0;    // smallest gamma making this draw nonnegative
};

struct EnergySuiteReport {
  double gamma = 0.0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::vector<EnergyDraw> draws;
  double min_slack = 0.0;
  double fitted_gamma = 0.0;  // max over draws of gamma_needed
  int violations = 0;
  bool pass = false;
};

EnergySuiteReport dg_energy_suite(const SpaceTimeField& field, double gamma, int count,
                                  std::uint64_t seed, double tolerance);

struct GapDraw {
  Vec3 center{};
  double width = 0.0;
  double amplitude = 0.0;
  bool smoothing = false;  // structured TV-decreasing candidate
  double gap = 0.0;
};

struct MinimizerSuiteReport {
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::vector<GapDraw> draws;
  double min_gap = 0.0;
  int violations = 0;
  bool pass = false;
};

// Random smooth bumps (and optionally local-averaging candidates) applied to
// the field over the window; u_t supplied by the caller.
MinimizerSuiteReport minimizer_suite(const SpaceTimeField& field, const SpaceTimeField& u_t,
                                     const Ball& ball, double window_begin,
                                     double window_end, int count, std::uint64_t seed,
                                     double tolerance, bool include_smoothing = false);

struct OneLapDraw {
  Vec3 center{};
  double rho = 0.0;
  double t1 = 0.0, t2 = 0.0;
  double level = 0.0;
  TruncationSign sign = TruncationSign::Plus;
  double slack = 0.0;
};

struct OneLapSuiteReport {
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::vector<OneLapDraw> draws;
  double min_slack = 0.0;
  int violations = 0;
  bool pass = false;
};

OneLapSuiteReport one_laplacian_suite(const SpaceTimeField& field, const DualField& z,
                                      int count, std::uint64_t seed, double tolerance);

// Consistency tolerance C*(h+dt). The certifier suites use the default C;
// the variational-gap suite uses kMinimizerGapC, calibrated once on the
// shrinking-disc solution under the bump corpus (its measured noise floor is
// nonnegative; the constant leaves an order of magnitude before the weakest
// structured negative control at desk scales).
double consistency_tolerance(double h, double dt, double C = 2.0);
inline constexpr double kMinimizerGapC = 0.01;

// Smooth compactly supported bump profile: exp(1 - 1/(1-s^2)) for |s|<1, 0
// outside; equals 1 at s = 0.
double bump_profile(double s);

}  // namespace tvlab
