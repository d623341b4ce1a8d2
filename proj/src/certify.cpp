#include "tvlab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tvlab/error.hpp"
#include "tvlab/flow.hpp"
#include "tvlab/parallel.hpp"
#include "tvlab/rng.hpp"
#include "tvlab/stencil.hpp"
#include "tvlab/tvmeasure.hpp"

namespace tvlab {

namespace {

double pow_hN(double h, int dim) {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h;
  return v;
}

double dist(const Vec3& a, const Vec3& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

TimeCutoff TimeCutoff::ramp(double begin, double end) {
  if (!(end > begin))
    throw Error(ErrorCode::InvalidArgument, "time cutoff ramp needs end > begin");
  return TimeCutoff{begin, end, 1.0 / (end - begin)};
}

double TimeCutoff::value(double t) const {
  if (constant()) return 1.0;
  if (t <= ramp_begin) return 0.0;
  if (t >= ramp_end) return 1.0;
  return (t - ramp_begin) / (ramp_end - ramp_begin);
}

double truncate_value(double u, const TruncationSpec& trunc) {
  double d = u - trunc.level;
  return trunc.sign == TruncationSign::Plus ? std::max(d, 0.0) : std::max(-d, 0.0);
}

Cutoff make_radial_cutoff(const SpaceTimeField& field, const Ball& support,
                          double inner_radius, const TimeCutoff& time) {
  if (!(inner_radius > 0.0) || !(inner_radius < support.radius))
    throw Error(ErrorCode::InvalidArgument,
                "radial cutoff needs 0 < inner_radius < support radius");
  Cutoff cutoff;
  cutoff.time = time;
  cutoff.space.support = support;
  cutoff.space.lipschitz = 1.0 / (support.radius - inner_radius);
  const std::size_t cells = field.cell_count();
  cutoff.space.values.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    double r = dist(field.cell_center(c), support.center, field.dim);
    double v = (support.radius - r) * cutoff.space.lipschitz;
    cutoff.space.values[c] = std::clamp(v, 0.0, 1.0);
  }
  // verify the recorded bound by finite differences
  Stencil st(field);
  double worst = 0.0;
  for (std::size_t c = 0; c < cells; ++c)
    worst = std::max(worst, st.gradient_norm(cutoff.space.values.data(), c));
  if (worst > cutoff.space.lipschitz * std::sqrt(double(field.dim)) * (1.0 + 1e-9))
    throw Error(ErrorCode::InvalidArgument,
                "radial cutoff finite differences exceed the recorded bound");
  return cutoff;
}

double minimizer_gap(const SpaceTimeField& field, const SpaceTimeField& u_t,
                     const SpaceTimeField& phi, double window_begin, double window_end,
                     const Ball& ball) {
  if (!field.same_grid(u_t) || !field.same_grid(phi))
    throw Error(ErrorCode::MetadataMismatch, "field, u_t and phi must share grid metadata");
  if (!ball_has_margin(field, ball, 1))
    throw Error(ErrorCode::BallTouchesMargin, "minimizer_gap ball needs a one-cell margin");
  auto stamps = stamps_in_window(field, window_begin, window_end, true);

  // compact support: phi vanishes outside the ball's 2h interior and at the
  // window's end stamps
  Stencil st(field);
  const std::size_t cells = st.cells;
  const double hN = pow_hN(st.h, st.dim);
  double inner = ball.radius - 2.0 * st.h;
  for (std::size_t m = 0; m < field.times.size(); ++m) {
    bool inside_window = false;
    for (std::size_t s : stamps)
      if (s == m && m != stamps.front() && m != stamps.back()) inside_window = true;
    const double* p = phi.slice(m);
    for (std::size_t c = 0; c < cells; ++c) {
      if (p[c] == 0.0) continue;
      if (!inside_window)
        throw Error(ErrorCode::SupportViolation,
                    "phi must vanish outside the open time window (stamp " +
                        std::to_string(m) + ")");
      if (dist(field.cell_center(c), ball.center, field.dim) >= inner)
        throw Error(ErrorCode::SupportViolation,
                    "phi must vanish outside the ball's 2h interior");
    }
  }

  auto in_ball = cells_in_ball(field, ball);
  std::vector<double> perturbed(cells);
  std::vector<double> integrand(stamps.size());
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    std::size_t m = stamps[i];
    const double* u = field.slice(m);
    const double* p = phi.slice(m);
    const double* ut = u_t.slice(m);
    for (std::size_t c = 0; c < cells; ++c) perturbed[c] = u[c] + p[c];
    double tv_u = tv_primal_on_cells(st, u, in_ball);
    double tv_up = tv_primal_on_cells(st, perturbed.data(), in_ball);
    double coupling = 0.0;
    for (std::size_t c : in_ball) coupling += ut[c] * p[c];
    integrand[i] = tv_up - tv_u - coupling * hN;
  }
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < stamps.size(); ++i) {
    double dt = field.times[stamps[i + 1]] - field.times[stamps[i]];
    gap += 0.5 * (integrand[i] + integrand[i + 1]) * dt;
  }
  return gap;
}

EnergyBudget dg_energy_report(const SpaceTimeField& field, const Cylinder& cyl,
                              const TruncationSpec& trunc, const Cutoff& cutoff,
                              double gamma) {
  if (!ball_has_margin(field, cyl.ball(), 1))
    throw Error(ErrorCode::BallTouchesMargin, "dg_energy_report ball needs a one-cell margin");
  if (dist(cutoff.space.support.center, cyl.center, field.dim) +
          cutoff.space.support.radius >
      cyl.radius * (1.0 + 1e-9))
    throw Error(ErrorCode::SupportViolation,
                "cutoff support must lie inside the cylinder's ball");
  auto stamps = stamps_in_window(field, cyl.t_begin(), cyl.t_end(), true);
  Stencil st(field);
  const std::size_t cells = st.cells;
  const double hN = pow_hN(st.h, st.dim);
  auto in_ball = cells_in_ball(field, cyl.ball());

  // per-slice reductions
  std::vector<double> wz(cells);
  std::vector<double> grad_z1(cells, 0.0);
  for (std::size_t c : in_ball)
    grad_z1[c] = st.gradient_norm(cutoff.space.values.data(), c);

  std::size_t n = stamps.size();
  std::vector<double> sup_vals(n), tv_vals(n), grad_vals(n), l2_vals(n), z2s(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = stamps[i];
    const double* u = field.slice(m);
    double z2 = cutoff.time.value(field.times[m]);
    z2s[i] = z2;
    double sup_acc = 0.0, grad_acc = 0.0, l2_acc = 0.0;
    std::fill(wz.begin(), wz.end(), 0.0);
    for (std::size_t c : in_ball) {
      double tw = truncate_value(u[c], trunc);
      double z1 = cutoff.space.values[c];
      sup_acc += tw * tw * z1 * z2;
      grad_acc += tw * grad_z1[c] * z2;
      l2_acc += tw * tw * z1;
      wz[c] = tw * z1 * z2;
    }
    sup_vals[i] = sup_acc * hN;
    grad_vals[i] = grad_acc * hN;
    l2_vals[i] = l2_acc * hN;
    tv_vals[i] = tv_primal_on_cells(st, wz.data(), in_ball);
  }

  EnergyBudget budget;
  for (double v : sup_vals) budget.lhs_sup_term = std::max(budget.lhs_sup_term, v);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double dt = field.times[stamps[i + 1]] - field.times[stamps[i]];
    budget.lhs_tv_term += 0.5 * (tv_vals[i] + tv_vals[i + 1]) * dt;
    budget.rhs_gradient_term += gamma * 0.5 * (grad_vals[i] + grad_vals[i + 1]) * dt;
    // |zeta_t| term integrated through zeta2 increments so that constants in
    // the integrand telescope exactly
    double dz2 = z2s[i + 1] - z2s[i];
    budget.rhs_time_term += gamma * 0.5 * (l2_vals[i] + l2_vals[i + 1]) * dz2;
  }
  budget.rhs_initial_term = n ? sup_vals[0] : 0.0;
  budget.slack = budget.rhs() - budget.lhs();
  return budget;
}

double one_laplacian_certificate(const SpaceTimeField& field, const DualField& z,
                                 const TruncationSpec& trunc, const Cutoff& cutoff,
                                 double t1, double t2) {
  if (!z.same_grid(field))
    throw Error(ErrorCode::MetadataMismatch, "field and dual grid metadata differ");
  if (!z.admissible())
    throw Error(ErrorCode::InadmissibleDual,
                "dual field sup norm " + std::to_string(z.sup_norm) + " exceeds 1 + 1e-6");
  auto stamps = stamps_in_window(field, t1, t2, true);
  Stencil st(field);
  const std::size_t cells = st.cells;
  const double hN = pow_hN(st.h, st.dim);

  // P(s) = integral of the truncation test from 0 to s; for p+ = (s-k)+ this
  // is a shifted half square, likewise for p-.
  auto P = [&](double u) {
    double s = u - trunc.offset;
    double k = trunc.level;
    if (trunc.sign == TruncationSign::Plus) {
      double a = std::max(s, k) - k;   // (s-k)+
      double b = std::max(0.0, -k);    // correction when 0 < k fails
      return 0.5 * (a * a - b * b);
    }
    double a = std::min(s, k) - k;  // -(s-k)-
    double b = std::min(0.0, -k);
    return 0.5 * (a * a - b * b);
  };
  auto p_of = [&](double u) {
    double s = u - trunc.offset;
    double d = s - trunc.level;
    return trunc.sign == TruncationSign::Plus ? std::max(d, 0.0) : std::min(d, 0.0);
  };

  std::vector<double> pu(cells);
  std::array<double, 3> gz1{};
  std::size_t n = stamps.size();
  std::vector<double> mass_raw(n), tvmeasure(n), flux(n), z2s(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = stamps[i];
    const double* u = field.slice(m);
    double z2 = cutoff.time.value(field.times[m]);
    z2s[i] = z2;
    for (std::size_t c = 0; c < cells; ++c) pu[c] = p_of(u[c]);
    double mass_acc = 0.0, tv_acc = 0.0, flux_acc = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      double z1 = cutoff.space.values[c];
      if (z1 > 0.0) {
        mass_acc += P(u[c]) * z1;
        tv_acc += z1 * st.gradient_norm(pu.data(), c);
      }
      gz1 = st.gradient(cutoff.space.values.data(), c);
      double zdot = 0.0;
      for (int a = 0; a < st.dim; ++a) zdot += z.component(m, a)[c] * gz1[a];
      flux_acc += zdot * pu[c];
    }
    mass_raw[i] = mass_acc * hN;
    tvmeasure[i] = tv_acc * hN * z2;
    flux[i] = flux_acc * hN * z2;
  }

  double tv_int = 0.0, flux_int = 0.0, time_term = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double dt = field.times[stamps[i + 1]] - field.times[stamps[i]];
    tv_int += 0.5 * (tvmeasure[i] + tvmeasure[i + 1]) * dt;
    flux_int += 0.5 * (flux[i] + flux[i + 1]) * dt;
    // iint P zeta1 zeta2' via zeta2 increments so constants telescope exactly
    double dz2 = z2s[i + 1] - z2s[i];
    time_term += 0.5 * (mass_raw[i] + mass_raw[i + 1]) * dz2;
  }
  double lhs = mass_raw[n - 1] * z2s[n - 1] + tv_int;
  double rhs = mass_raw[0] * z2s[0] + time_term - flux_int;
  return rhs - lhs;
}

double consistency_tolerance(double h, double dt, double C) { return C * (h + dt); }

double bump_profile(double s) {
  double s2 = s * s;
  if (s2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s2));
}

// ---------------------------------------------------------------------------

EnergySuiteReport dg_energy_suite(const SpaceTimeField& field, double gamma, int count,
                                  std::uint64_t seed, double tolerance) {
  EnergySuiteReport report;
  report.gamma = gamma;
  report.seed = seed;
  report.tolerance = tolerance;
  report.min_slack = std::numeric_limits<double>::infinity();

  Box box = field.bounding_box();
  double half_min = std::numeric_limits<double>::infinity();
  for (int a = 0; a < field.dim; ++a)
    half_min = std::min(half_min, 0.5 * (box.hi[a] - box.lo[a]));
  const double h = field.spacing;
  const std::size_t nt = field.times.size();
  if (nt < 2) throw Error(ErrorCode::PreconditionFailed, "need at least two stamps");

  report.draws.resize(std::size_t(count));
  parallel_for(std::size_t(count), [&](std::size_t d) {
    Rng rng = Rng::substream(seed, std::uint64_t(d));
    EnergyDraw& draw = report.draws[d];
    double rho_max = std::min(0.35 * 2.0 * half_min, half_min - 9.0 * h);
    double rho_min = std::min(0.15 * 2.0 * half_min, 0.7 * rho_max);
    draw.rho = rng.uniform(rho_min, rho_max);
    for (int a = 0; a < field.dim; ++a) {
      double lo = box.lo[a] + draw.rho + 8.0 * h;
      double hi = box.hi[a] - draw.rho - 8.0 * h;
      draw.center[a] = rng.uniform(lo, hi);
    }
    std::size_t j = 1 + rng.below(nt - 1);
    std::size_t i = rng.below(j);
    draw.t_begin = field.times[i];
    draw.t_end = field.times[j];
    Cylinder cyl;
    cyl.center = draw.center;
    cyl.vertex_time = draw.t_end;
    cyl.radius = draw.rho;
    cyl.theta = (draw.t_end - draw.t_begin) / draw.rho;

    OscillationData osc = ess_osc(field, cyl);
    draw.level = osc.mu_minus + rng.uniform(0.05, 0.95) * std::max(osc.omega, 1e-12);
    draw.sign = rng.uniform01() < 0.5 ? TruncationSign::Plus : TruncationSign::Minus;
    draw.inner_fraction = rng.uniform(0.4, 0.7);
    draw.outer_fraction = rng.uniform(0.85, 0.98);
    draw.ramp_fraction = rng.uniform(0.2, 0.8);

    Ball support{draw.center, draw.outer_fraction * draw.rho};
    // time ramp vanishing at the window start
    double ramp_end = draw.t_begin + draw.ramp_fraction * (draw.t_end - draw.t_begin);
    TimeCutoff tc = ramp_end > draw.t_begin ? TimeCutoff::ramp(draw.t_begin, ramp_end)
                                            : TimeCutoff::one();
    Cutoff cutoff =
        make_radial_cutoff(field, support, draw.inner_fraction * draw.rho, tc);

    TruncationSpec trunc{draw.level, draw.sign, 0.0};
    draw.budget = dg_energy_report(field, cyl, trunc, cutoff, gamma);
    draw.slack_scale = 1.0 + std::abs(draw.budget.lhs()) + std::abs(draw.budget.rhs());
    double bracket = (draw.budget.rhs_gradient_term + draw.budget.rhs_time_term) / gamma;
    double need = draw.budget.lhs() - draw.budget.rhs_initial_term;
    if (need <= tolerance * draw.slack_scale)
      draw.gamma_needed = 0.0;
    else if (bracket > 0.0)
      draw.gamma_needed = need / bracket;
    else
      draw.gamma_needed = std::numeric_limits<double>::infinity();
  });

  report.fitted_gamma = 0.0;
  for (auto& draw : report.draws) {
    report.min_slack = std::min(report.min_slack, draw.budget.slack);
    report.fitted_gamma = std::max(report.fitted_gamma, draw.gamma_needed);
    if (draw.budget.slack < -tolerance * draw.slack_scale) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

MinimizerSuiteReport minimizer_suite(const SpaceTimeField& field, const SpaceTimeField& u_t,
                                     const Ball& ball, double window_begin,
                                     double window_end, int count, std::uint64_t seed,
                                     double tolerance, bool include_smoothing) {
  MinimizerSuiteReport report;
  report.seed = seed;
  report.tolerance = tolerance;
  report.min_gap = std::numeric_limits<double>::infinity();
  auto stamps = stamps_in_window(field, window_begin, window_end, true);
  if (stamps.size() < 3)
    throw Error(ErrorCode::PreconditionFailed,
                "perturbation window needs at least one interior stamp");
  Stencil st(field);
  const std::size_t cells = st.cells;

  // local box average for the structured TV-decreasing candidates
  auto local_average = [&](const double* u, std::size_t c, int radius_cells) {
    auto idx = st.cell_index(c);
    double acc = 0.0;
    int cnt = 0;
    std::array<int, 3> lo{}, hi{};
    for (int a = 0; a < st.dim; ++a) {
      lo[a] = std::max(0, idx[a] - radius_cells);
      hi[a] = std::min(st.shape[a] - 1, idx[a] + radius_cells);
    }
    std::array<int, 3> it = lo;
    for (;;) {
      std::size_t flat = 0;
      for (int a = 0; a < st.dim; ++a) flat = flat * std::size_t(st.shape[a]) + it[a];
      acc += u[flat];
      ++cnt;
      int a = st.dim - 1;
      while (a >= 0 && ++it[a] > hi[a]) {
        it[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
    return acc / double(cnt);
  };

  report.draws.resize(std::size_t(count));
  parallel_for(std::size_t(count), [&](std::size_t d) {
    Rng rng = Rng::substream(seed, std::uint64_t(d));
    GapDraw& draw = report.draws[d];
    draw.smoothing = include_smoothing && (d % 5 == 4);
    draw.width = (draw.smoothing ? rng.uniform(0.3, 0.5) : rng.uniform(0.12, 0.3)) *
                 ball.radius;
    double reach = (ball.radius - draw.width - 2.5 * st.h) / std::sqrt(double(field.dim));
    for (int a = 0; a < field.dim; ++a)
      draw.center[a] = ball.center[a] + rng.uniform(-reach, reach);
    draw.amplitude = rng.uniform(-0.4, 0.4);
    if (draw.smoothing) draw.amplitude = 1.0;
    int avg_radius = std::max(2, int(std::lround(draw.width / (2.0 * st.h))));

    SpaceTimeField phi = field;
    std::fill(phi.data.begin(), phi.data.end(), 0.0);
    for (std::size_t si = 1; si + 1 < stamps.size(); ++si) {
      std::size_t m = stamps[si];
      double t = field.times[m];
      double tprof =
          std::sin(3.14159265358979323846 * (t - window_begin) / (window_end - window_begin));
      tprof *= tprof;
      double* p = phi.slice(m);
      const double* u = field.slice(m);
      for (std::size_t c = 0; c < cells; ++c) {
        double r = dist(field.cell_center(c), draw.center, field.dim);
        double b = bump_profile(r / draw.width);
        if (b == 0.0) continue;
        double v = draw.smoothing
                       ? (local_average(u, c, avg_radius) - u[c]) * b
                       : draw.amplitude * b;
        p[c] = v * tprof;
      }
    }
    draw.gap = minimizer_gap(field, u_t, phi, window_begin, window_end, ball);
  });

  for (auto& draw : report.draws) {
    report.min_gap = std::min(report.min_gap, draw.gap);
    if (draw.gap < -tolerance) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

OneLapSuiteReport one_laplacian_suite(const SpaceTimeField& field, const DualField& z,
                                      int count, std::uint64_t seed, double tolerance) {
  OneLapSuiteReport report;
  report.seed = seed;
  report.tolerance = tolerance;
  report.min_slack = std::numeric_limits<double>::infinity();
  Box box = field.bounding_box();
  double half_min = std::numeric_limits<double>::infinity();
  for (int a = 0; a < field.dim; ++a)
    half_min = std::min(half_min, 0.5 * (box.hi[a] - box.lo[a]));
  const double h = field.spacing;
  const std::size_t nt = field.times.size();

  report.draws.resize(std::size_t(count));
  parallel_for(std::size_t(count), [&](std::size_t d) {
    Rng rng = Rng::substream(seed, std::uint64_t(d));
    OneLapDraw& draw = report.draws[d];
    double rho_max = std::min(0.4 * 2.0 * half_min, half_min - 9.0 * h);
    draw.rho = rng.uniform(0.5 * rho_max, rho_max);
    for (int a = 0; a < field.dim; ++a) {
      double lo = box.lo[a] + draw.rho + 8.0 * h;
      double hi = box.hi[a] - draw.rho - 8.0 * h;
      draw.center[a] = rng.uniform(lo, hi);
    }
    std::size_t j = 1 + rng.below(nt - 1);
    std::size_t i = rng.below(j);
    draw.t1 = field.times[i];
    draw.t2 = field.times[j];
    Cylinder cyl;
    cyl.center = draw.center;
    cyl.vertex_time = draw.t2;
    cyl.radius = draw.rho;
    cyl.theta = (draw.t2 - draw.t1) / draw.rho;
    OscillationData osc = ess_osc(field, cyl);
    draw.level = osc.mu_minus + rng.uniform(0.05, 0.95) * std::max(osc.omega, 1e-12);
    draw.sign = rng.uniform01() < 0.5 ? TruncationSign::Plus : TruncationSign::Minus;

    Ball support{draw.center, 0.92 * draw.rho};
    double ramp_end = draw.t1 + rng.uniform(0.2, 0.8) * (draw.t2 - draw.t1);
    Cutoff cutoff = make_radial_cutoff(field, support, rng.uniform(0.4, 0.7) * draw.rho,
                                       TimeCutoff::ramp(draw.t1, ramp_end));
    TruncationSpec trunc{draw.level, draw.sign, 0.0};
    draw.slack = one_laplacian_certificate(field, z, trunc, cutoff, draw.t1, draw.t2);
  });
  for (auto& draw : report.draws) {
    report.min_slack = std::min(report.min_slack, draw.slack);
    if (draw.slack < -tolerance) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

}  // namespace tvlab
