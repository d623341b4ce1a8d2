#pragma once

#include <optional>
#include <vector>

#include "tvlab/certify.hpp"
#include "tvlab/grid.hpp"

namespace tvlab {

// Scaled space-time total variation about a point:
//   I(rho) = [rho / |Q_rho|] * integral over (t0-rho, t0] of ||Du(t)||(B_rho)
// with |Q_rho| = |B_rho| * rho (continuum ball volume). Vanishing of I along
// rho -> 0 is the point-continuity indicator; its decay is summarized by a
// log-log least squares fit (zero entries excluded).
struct IndicatorCurve {
  Vec3 point{};
  double t0 = 0.0;
  std::vector<double> rhos;    // strictly decreasing
  std::vector<double> values;  // I(rho)
  double slope = 0.0;
  double intercept = 0.0;
  int fit_count = 0;
};

IndicatorCurve indicator(const SpaceTimeField& field, const Vec3& point, double t0,
                         const std::vector<double>& rhos);

// Both sides of the necessary-direction estimate at one scale:
//   lhs = [rho/|Q_rho|] int_{t0-2rho}^{t0} ||D(u zeta)(t)||(B_2rho) dt
//   rhs = 2^(N+1) gamma * mean over Q_2rho of (|u| + u^2)
// with u normalized to vanish at the point sample and the standard cutoff
// (zeta = 1 on Q_(3/2)rho, ramps of width rho/2 in space and time).
struct NecessaryBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

NecessaryBound necessary_bound_check(const SpaceTimeField& field, const Vec3& point,
                                     double t0, double rho, double gamma);

// Critical-mass constants of the measure-to-pointwise lemma:
//   b = 2^((3N+4)/N),  nu = gamma^-N * b^(-N^2),  alpha = 1/N.
struct DeGiorgiConstants {
  int N = 2;
  double gamma = 2.0;
  double b = 0.0;
  double nu = 0.0;
  double alpha = 0.0;
};

DeGiorgiConstants degiorgi_nu(int N, double gamma,
                              TruncationSign sign = TruncationSign::Minus);

// Fast-geometric-convergence recursion Y_{n+1} = gamma * b^n * Y_n^(1+1/N),
// iterated as an equality. At Y0 = nu the sequence decays geometrically with
// ratio b^-N; above it, it blows up.
enum class YnVerdict { Converged, Diverged, Undecided };

struct YnSequence {
  std::vector<double> values;
  YnVerdict verdict = YnVerdict::Undecided;
  int stop_index = -1;  // first index past the convergence/divergence gate
};

YnSequence iterate_Yn(double Y0, const DeGiorgiConstants& constants, int steps);

// Verdicts shared by the lemma-style checks.
enum class CheckStatus { NotApplicable, Pass, Fail };

struct LemmaReport {
  CheckStatus status = CheckStatus::NotApplicable;
  double density = 0.0;      // measured hypothesis density
  double nu = 0.0;           // threshold used
  long violations = 0;       // conclusion cells out of bound
  double worst_value = 0.0;  // most violating sample
  long checked = 0;
};

// Measure-density hypothesis on the double cylinder [point + Q_2rho(theta)]
// with theta = 2 xi omega; on success asserts the half-step pointwise bound
// on Q_rho(theta) cell by cell. nu_override > 0 replaces the critical mass
// (empirical mode).
LemmaReport degiorgi_lemma_check(const SpaceTimeField& field, const Vec3& point,
                                 double vertex_time, double rho, double xi,
                                 const OscillationData& osc, TruncationSign sign,
                                 double gamma, double nu_override = 0.0);

// Expansion-of-positivity constants: sigma = 1/(16N), epsilon = 1/32,
// delta = 1/(2^8 gamma N).
struct ExpansionConstants {
  double sigma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
};

ExpansionConstants expansion_constants(int N, double gamma);

struct ExpansionReport {
  CheckStatus status = CheckStatus::NotApplicable;
  double hypothesis_measure = 0.0;
  double required_initial = 0.0;   // half the ball volume
  double required_later = 0.0;     // quarter of the ball volume
  std::optional<double> first_failing_time;
  long times_checked = 0;
};

// Hypothesis |[u(.,s) >= mu- + xi omega] cap B_rho| >= |B|/2 at the initial
// slice; conclusion |[u(.,t) > mu- + eps xi omega] cap B_rho| >= |B|/4 for
// every stamp in (s, s + delta xi omega rho].
ExpansionReport expansion_check(const SpaceTimeField& field, const Vec3& center,
                                double s, double rho, double xi,
                                const OscillationData& osc,
                                const ExpansionConstants& constants);

// Oscillation-reduction cascade. Paper mode uses the printed parameters
// (2 xi = delta/64, radius rule rho/2 * xi * omega) whose scales sit far
// below any feasible grid; empirical mode keeps eta = 1 - xi/2 with a
// configurable xi and halves the radius per stage so the geometry is
// observable. Stops at the 4h grid floor.
enum class CascadeMode { Paper, Empirical };

struct CascadeStage {
  double rho = 0.0;
  double omega = 0.0;
  bool within_bound = false;  // omega_n <= eta^n * omega_0
};

struct CascadeState {
  CascadeMode mode = CascadeMode::Empirical;
  double xi = 0.0;
  double eta = 0.0;
  double normalization = 1.0;  // u was divided by this (max(1, omega_0))
  std::vector<CascadeStage> stages;
  bool all_within_bound = false;
  int fail_stage = -1;  // first stage where the eta-bound failed
  int decays = 0;       // strict decreases across consecutive stages
};

CascadeState oscillation_cascade(const SpaceTimeField& field, const Vec3& point,
                                 double t0, double rho0, CascadeMode mode,
                                 double gamma = 2.0, double xi_empirical = 0.125);

// Sup bound shape at exponent r > N: measured_sup is the max of the signed
// part over B_rho x [s,t]; bound_shape is
//   (rho/(t-s))^(N/(r-N)) * [ (1/(rho^N (t-s))) iint_{B_4rho x [2s-t,t]} u_pm^r ]^(1/(r-N))
//   + (t-s)/rho.
struct SupBoundReport {
  double measured_sup = 0.0;
  double bound_shape = 0.0;
  double ratio = 0.0;  // measured_sup / bound_shape
};

SupBoundReport sup_bound_check(const SpaceTimeField& field, const Vec3& center, double s,
                               double t, double rho, double r,
                               TruncationSign sign = TruncationSign::Plus);

}  // namespace tvlab
