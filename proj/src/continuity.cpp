#include "tvlab/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tvlab/error.hpp"
#include "tvlab/stencil.hpp"
#include "tvlab/tvmeasure.hpp"

namespace tvlab {

namespace {

double pow_hN(double h, int dim) {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h;
  return v;
}

double ball_volume(int dim, double rho) {
  return unit_ball_volume(dim) * std::pow(rho, double(dim));
}

}  // namespace

IndicatorCurve indicator(const SpaceTimeField& field, const Vec3& point, double t0,
                         const std::vector<double>& rhos) {
  for (std::size_t i = 1; i < rhos.size(); ++i)
    if (!(rhos[i] < rhos[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "rho ladder must be strictly decreasing");
  IndicatorCurve curve;
  curve.point = point;
  curve.t0 = t0;
  curve.rhos = rhos;
  curve.values.resize(rhos.size());
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    double rho = rhos[i];
    Cylinder cyl{point, t0, rho, 1.0, TimeOrientation::Backward};
    double integral = tv_time_integral(field, cyl);
    curve.values[i] = integral * rho / (ball_volume(field.dim, rho) * rho);
  }
  // least squares on (log rho, log I); zero entries excluded
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(curve.values[i] > 0.0)) continue;
    double x = std::log(rhos[i]);
    double y = std::log(curve.values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  curve.fit_count = n;
  if (n >= 2) {
    double denom = n * sxx - sx * sx;
    curve.slope = (n * sxy - sx * sy) / denom;
    curve.intercept = (sy - curve.slope * sx) / n;
  }
  return curve;
}

NecessaryBound necessary_bound_check(const SpaceTimeField& field, const Vec3& point,
                                     double t0, double rho, double gamma) {
  const int N = field.dim;
  Ball big{point, 2.0 * rho};
  if (!ball_has_margin(field, big, 1))
    throw Error(ErrorCode::BallTouchesMargin, "necessary_bound_check needs Q_2rho inside");

  // normalize so the sample at the vertex vanishes
  auto in_big = cells_in_ball(field, big);
  int m0 = field.find_time(t0);
  if (m0 < 0) throw Error(ErrorCode::MissingTimeSlices, "vertex time is not a stamp");
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < field.cell_count(); ++c) {
    Vec3 x = field.cell_center(c);
    double d2 = 0.0;
    for (int a = 0; a < N; ++a) {
      double d = x[a] - point[a];
      d2 += d * d;
    }
    if (d2 < best) {
      best = d2;
      nearest = c;
    }
  }
  double shift = field.value(std::size_t(m0), nearest);

  // cutoff: 1 on Q_(3/2)rho, ramps of width rho/2
  Cutoff cutoff = make_radial_cutoff(field, big, 1.5 * rho,
                                     TimeCutoff::ramp(t0 - 2.0 * rho, t0 - 1.5 * rho));

  auto stamps = stamps_in_window(field, t0 - 2.0 * rho, t0, true);
  Stencil st(field);
  const double hN = pow_hN(st.h, N);
  std::vector<double> weighted(st.cells, 0.0);
  std::vector<double> tv(stamps.size()), mean_vals(stamps.size());
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    const double* u = field.slice(stamps[i]);
    double z2 = cutoff.time.value(field.times[stamps[i]]);
    std::fill(weighted.begin(), weighted.end(), 0.0);
    double mean_acc = 0.0;
    for (std::size_t c : in_big) {
      double v = u[c] - shift;
      weighted[c] = v * cutoff.space.values[c] * z2;
      mean_acc += std::abs(v) + v * v;
    }
    tv[i] = tv_primal_on_cells(st, weighted.data(), in_big);
    mean_vals[i] = mean_acc * hN;
  }
  double tv_int = 0.0, mean_int = 0.0;
  for (std::size_t i = 0; i + 1 < stamps.size(); ++i) {
    double dt = field.times[stamps[i + 1]] - field.times[stamps[i]];
    tv_int += 0.5 * (tv[i] + tv[i + 1]) * dt;
    mean_int += 0.5 * (mean_vals[i] + mean_vals[i + 1]) * dt;
  }

  NecessaryBound out;
  double q_rho = ball_volume(N, rho) * rho;
  double q_2rho = ball_volume(N, 2.0 * rho) * 2.0 * rho;
  out.lhs = rho / q_rho * tv_int;
  out.rhs = std::pow(2.0, N + 1) * gamma * (mean_int / q_2rho);
  return out;
}

DeGiorgiConstants degiorgi_nu(int N, double gamma, TruncationSign) {
  if (N < 1 || N > 3) throw Error(ErrorCode::InvalidArgument, "N must be 1, 2 or 3");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  DeGiorgiConstants k;
  k.N = N;
  k.gamma = gamma;
  k.b = std::pow(2.0, double(3 * N + 4) / double(N));
  k.nu = std::pow(gamma, -double(N)) * std::pow(k.b, -double(N) * double(N));
  k.alpha = 1.0 / double(N);
  return k;
}

YnSequence iterate_Yn(double Y0, const DeGiorgiConstants& constants, int steps) {
  if (Y0 < 0.0) throw Error(ErrorCode::InvalidArgument, "Y0 must be nonnegative");
  YnSequence seq;
  seq.values.reserve(std::size_t(steps) + 1);
  seq.values.push_back(Y0);
  double y = Y0;
  for (int n = 0; n < steps; ++n) {
    y = constants.gamma * std::pow(constants.b, double(n)) *
        std::pow(y, 1.0 + 1.0 / double(constants.N));
    if (!std::isfinite(y)) {
      // overflow counts as divergence; the sequence is truncated here
      seq.verdict = YnVerdict::Diverged;
      seq.stop_index = n + 1;
      return seq;
    }
    seq.values.push_back(y);
    if (seq.verdict == YnVerdict::Undecided) {
      if (y > 1e6) {
        seq.verdict = YnVerdict::Diverged;
        seq.stop_index = n + 1;
        return seq;  // super-exponential blowup; further steps would overflow
      }
      if (y < 1e-12) {
        seq.verdict = YnVerdict::Converged;
        seq.stop_index = n + 1;
      }
    }
  }
  if (seq.stop_index < 0) seq.stop_index = steps;
  return seq;
}

LemmaReport degiorgi_lemma_check(const SpaceTimeField& field, const Vec3& point,
                                 double vertex_time, double rho, double xi,
                                 const OscillationData& osc, TruncationSign sign,
                                 double gamma, double nu_override) {
  if (!(xi > 0.0) || xi > 0.5)
    throw Error(ErrorCode::InvalidArgument, "xi must lie in (0, 1/2]");
  LemmaReport report;
  report.nu = nu_override > 0.0 ? nu_override : degiorgi_nu(field.dim, gamma).nu;
  if (!(osc.omega > 0.0)) return report;  // no intrinsic cylinder

  double theta = 2.0 * xi * osc.omega;
  Cylinder outer{point, vertex_time, 2.0 * rho, theta, TimeOrientation::Backward};
  Cylinder inner{point, vertex_time, rho, theta, TimeOrientation::Backward};
  if (!ball_has_margin(field, outer.ball(), 1))
    throw Error(ErrorCode::BallTouchesMargin, "double cylinder must sit inside the grid");

  double rim = sign == TruncationSign::Minus ? osc.mu_minus + xi * osc.omega
                                             : osc.mu_plus - xi * osc.omega;
  auto cells = cells_in_ball(field, outer.ball());
  auto stamps = stamps_in_window(field, outer.t_begin(), outer.t_end(), false);
  if (cells.empty() || stamps.empty())
    throw Error(ErrorCode::EmptyIntersection, "double cylinder has no samples");
  long bad = 0, total = 0;
  for (std::size_t m : stamps) {
    const double* u = field.slice(m);
    for (std::size_t c : cells) {
      bool offending = sign == TruncationSign::Minus ? u[c] <= rim : u[c] >= rim;
      bad += offending;
      ++total;
    }
  }
  report.density = double(bad) / double(total);
  if (report.density > report.nu) {
    report.status = CheckStatus::NotApplicable;
    return report;
  }

  // hypothesis met: every sampled cell of the inner cylinder obeys the bound
  double bound = sign == TruncationSign::Minus ? osc.mu_minus + 0.5 * xi * osc.omega
                                               : osc.mu_plus - 0.5 * xi * osc.omega;
  auto inner_cells = cells_in_ball(field, inner.ball());
  auto inner_stamps = stamps_in_window(field, inner.t_begin(), inner.t_end(), false);
  report.worst_value = bound;
  for (std::size_t m : inner_stamps) {
    const double* u = field.slice(m);
    for (std::size_t c : inner_cells) {
      ++report.checked;
      bool violates = sign == TruncationSign::Minus ? u[c] < bound : u[c] > bound;
      if (violates) {
        ++report.violations;
        report.worst_value = sign == TruncationSign::Minus
                                 ? std::min(report.worst_value, u[c])
                                 : std::max(report.worst_value, u[c]);
      }
    }
  }
  report.status = report.violations == 0 ? CheckStatus::Pass : CheckStatus::Fail;
  return report;
}

ExpansionConstants expansion_constants(int N, double gamma) {
  if (N < 1 || N > 3) throw Error(ErrorCode::InvalidArgument, "N must be 1, 2 or 3");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  ExpansionConstants k;
  k.sigma = 1.0 / (16.0 * N);
  k.epsilon = 1.0 / 32.0;
  k.delta = 1.0 / (256.0 * gamma * N);
  return k;
}

ExpansionReport expansion_check(const SpaceTimeField& field, const Vec3& center,
                                double s, double rho, double xi,
                                const OscillationData& osc,
                                const ExpansionConstants& constants) {
  if (!(xi > 0.0) || !(xi < 1.0))
    throw Error(ErrorCode::InvalidArgument, "xi must lie in (0, 1)");
  ExpansionReport report;
  Ball ball{center, rho};
  if (!ball_has_margin(field, ball, 1))
    throw Error(ErrorCode::BallTouchesMargin, "expansion_check ball must sit inside the grid");
  int ms = field.find_time(s);
  if (ms < 0) throw Error(ErrorCode::MissingTimeSlices, "initial slice is not a stamp");

  auto cells = cells_in_ball(field, ball);
  const double hN = pow_hN(field.spacing, field.dim);
  double ball_measure = double(cells.size()) * hN;
  report.required_initial = 0.5 * ball_measure;
  report.required_later = 0.25 * ball_measure;

  double level0 = osc.mu_minus + xi * osc.omega;
  // ">=" hypothesis: complement of the strict-below set
  double below = level_set_measure(field, std::size_t(ms), ball, level0,
                                   LevelDirection::Below)
                     .measure;
  report.hypothesis_measure = ball_measure - below;
  if (report.hypothesis_measure < report.required_initial) {
    report.status = CheckStatus::NotApplicable;
    return report;
  }

  double horizon = s + constants.delta * xi * osc.omega * rho;
  double level1 = osc.mu_minus + constants.epsilon * xi * osc.omega;
  report.status = CheckStatus::Pass;
  for (std::size_t m = std::size_t(ms) + 1; m < field.times.size(); ++m) {
    double t = field.times[m];
    if (t > horizon + 1e-12 * std::max(1.0, std::abs(horizon))) break;
    ++report.times_checked;
    double above =
        level_set_measure(field, m, ball, level1, LevelDirection::Above).measure;
    if (above < report.required_later) {
      report.status = CheckStatus::Fail;
      report.first_failing_time = t;
      break;
    }
  }
  return report;
}

CascadeState oscillation_cascade(const SpaceTimeField& field, const Vec3& point,
                                 double t0, double rho0, CascadeMode mode, double gamma,
                                 double xi_empirical) {
  CascadeState state;
  state.mode = mode;
  if (mode == CascadeMode::Paper) {
    double delta = expansion_constants(field.dim, gamma).delta;
    state.xi = 0.5 * (delta / 64.0);  // 2 xi = delta/64
  } else {
    state.xi = xi_empirical;
  }
  state.eta = 1.0 - 0.5 * state.xi;

  Ball b0{point, rho0};
  if (!ball_has_margin(field, b0, 1))
    throw Error(ErrorCode::BallTouchesMargin, "cascade start ball must sit inside the grid");

  Cylinder q0{point, t0, rho0, 1.0, TimeOrientation::Backward};
  double omega0_raw = ess_osc(field, q0).omega;
  state.normalization = std::max(1.0, omega0_raw);

  const double floor = 4.0 * field.spacing;
  double rho = rho0;
  double omega0 = omega0_raw / state.normalization;
  state.all_within_bound = true;
  int n = 0;
  for (;;) {
    Cylinder q{point, t0, rho, 1.0, TimeOrientation::Backward};
    double omega = ess_osc(field, q).omega / state.normalization;
    double bound = omega0 * std::pow(state.eta, double(n));
    CascadeStage stage{rho, omega, omega <= bound + 1e-12};
    state.stages.push_back(stage);
    if (!stage.within_bound && state.fail_stage < 0) {
      state.fail_stage = n;
      state.all_within_bound = false;
    }
    if (n > 0 && omega < state.stages[std::size_t(n) - 1].omega) ++state.decays;

    double next = mode == CascadeMode::Paper ? 0.5 * state.xi * omega * rho : 0.5 * rho;
    if (!(next >= floor) || n >= 64) break;
    rho = next;
    ++n;
  }
  return state;
}

SupBoundReport sup_bound_check(const SpaceTimeField& field, const Vec3& center, double s,
                               double t, double rho, double r, TruncationSign sign) {
  const int N = field.dim;
  if (!(r > N))
    throw Error(ErrorCode::PreconditionFailed,
                "sup bound needs r > N (the constant blows up as r -> N)");
  if (!(t > s)) throw Error(ErrorCode::InvalidArgument, "need t > s");
  Ball wide{center, 4.0 * rho};
  if (!ball_has_margin(field, wide, 1))
    throw Error(ErrorCode::BallTouchesMargin, "B_4rho must sit inside the grid");

  auto positive_part = [&](double v) {
    return sign == TruncationSign::Plus ? std::max(v, 0.0) : std::max(-v, 0.0);
  };

  // measured sup over B_rho x [s, t]
  Ball core{center, rho};
  auto core_cells = cells_in_ball(field, core);
  auto core_stamps = stamps_in_window(field, s, t, false);
  if (core_cells.empty() || core_stamps.empty())
    throw Error(ErrorCode::EmptyIntersection, "no samples in B_rho x [s,t]");
  SupBoundReport report;
  for (std::size_t m : core_stamps) {
    const double* u = field.slice(m);
    for (std::size_t c : core_cells)
      report.measured_sup = std::max(report.measured_sup, positive_part(u[c]));
  }

  // iint over B_4rho x [2s - t, t] of u_pm^r
  auto wide_cells = cells_in_ball(field, wide);
  auto wide_stamps = stamps_in_window(field, 2.0 * s - t, t, true);
  const double hN = pow_hN(field.spacing, N);
  std::vector<double> slice_integrals(wide_stamps.size());
  for (std::size_t i = 0; i < wide_stamps.size(); ++i) {
    const double* u = field.slice(wide_stamps[i]);
    double acc = 0.0;
    for (std::size_t c : wide_cells) acc += std::pow(positive_part(u[c]), r);
    slice_integrals[i] = acc * hN;
  }
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < wide_stamps.size(); ++i) {
    double dt = field.times[wide_stamps[i + 1]] - field.times[wide_stamps[i]];
    mass += 0.5 * (slice_integrals[i] + slice_integrals[i + 1]) * dt;
  }

  double span = t - s;
  double scaled = mass / (std::pow(rho, double(N)) * span);
  report.bound_shape = std::pow(rho / span, double(N) / (r - N)) *
                           std::pow(scaled, 1.0 / (r - N)) +
                       span / rho;
  report.ratio = report.measured_sup / report.bound_shape;
  return report;
}

}  // namespace tvlab
