#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "tvlab/certify.hpp"
#include "tvlab/continuity.hpp"
#include "tvlab/error.hpp"
#include "tvlab/examples.hpp"
#include "tvlab/grid.hpp"
#include "tvlab/tvmeasure.hpp"

using namespace tvlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// time-independent field sampled with stamps at every window endpoint of the
// ladder plus the vertex
SpaceTimeField ladder_field(const AnalyticExample& ex, double half, double h,
                            const std::vector<double>& rhos, double t0) {
  std::vector<double> times;
  for (double rho : rhos) times.push_back(t0 - rho);
  times.push_back(t0);
  std::sort(times.begin(), times.end());
  return materialize(ex, half, h, times);
}

}  // namespace

TEST_CASE("indicator: constant field vanishes on every rung") {
  auto field = sample_analytic([](const Vec3&, double) { return 4.0; },
                               tvtest::centered_box(2, 0.625), 1.0 / 32.0,
                               {0.0, 0.25, 0.375, 0.5});
  IndicatorCurve curve = indicator(field, {0, 0, 0}, 0.5, {0.25, 0.125});
  for (double v : curve.values) CHECK(v == 0.0);
  CHECK(curve.fit_count == 0);
}

TEST_CASE("indicator: square-root example follows the half-power law") {
  const double h = 1.0 / 512.0;
  std::vector<double> rhos{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  auto field = ladder_field(make_example("u2"), 0.3125, h, rhos, 0.5);
  IndicatorCurve curve = indicator(field, {0, 0, 0}, 0.5, rhos);
  double c = u2_tv_constant() / kPi;  // I(rho) = c sqrt(rho)
  for (std::size_t i = 0; i < rhos.size(); ++i)
    CHECK(curve.values[i] == doctest::Approx(c * std::sqrt(rhos[i])).epsilon(0.02));
  CHECK(curve.slope == doctest::Approx(0.5).epsilon(0.2));
  CHECK(std::abs(curve.slope - 0.5) < 0.1);
}

TEST_CASE("indicator: jump example stalls near 2/pi") {
  const double h = 1.0 / 512.0;
  std::vector<double> rhos{0.25, 0.125, 0.0625, 0.03125};
  auto field = ladder_field(make_example("step"), 0.3125, h, rhos, 0.5);
  IndicatorCurve curve = indicator(field, {0, 0, 0}, 0.5, rhos);
  for (double v : curve.values) {
    CHECK(v > 0.5);
    CHECK(v < 0.8);
    CHECK(v == doctest::Approx(2.0 / kPi).epsilon(0.03));
  }
  CHECK(std::abs(curve.slope) < 0.05);
}

TEST_CASE("indicator: invariant under constants, linear in scaling") {
  const double h = 1.0 / 128.0;
  std::vector<double> rhos{0.2, 0.1};
  auto field = ladder_field(make_example("u2"), 0.3125, h, rhos, 0.5);
  IndicatorCurve base = indicator(field, {0, 0, 0}, 0.5, rhos);

  SpaceTimeField shifted = field;
  for (auto& v : shifted.data) v += 7.5;
  IndicatorCurve moved = indicator(shifted, {0, 0, 0}, 0.5, rhos);
  for (std::size_t i = 0; i < rhos.size(); ++i)
    CHECK(moved.values[i] == doctest::Approx(base.values[i]).epsilon(1e-10));

  SpaceTimeField scaled = field;
  for (auto& v : scaled.data) v *= 3.0;
  IndicatorCurve tripled = indicator(scaled, {0, 0, 0}, 0.5, rhos);
  for (std::size_t i = 0; i < rhos.size(); ++i)
    CHECK(tripled.values[i] == doctest::Approx(3.0 * base.values[i]).epsilon(1e-10));
}

TEST_CASE("indicator: rho ladder must decrease") {
  auto field = sample_analytic([](const Vec3&, double) { return 0.0; },
                               tvtest::centered_box(2, 0.625), 1.0 / 16.0, {0.0, 0.5});
  CHECK_THROWS_AS(indicator(field, {0, 0, 0}, 0.5, {0.1, 0.2}), Error);
}

TEST_CASE("necessary bound: zero field gives zero on both sides") {
  auto field = sample_analytic([](const Vec3&, double) { return 0.0; },
                               tvtest::centered_box(2, 0.75), 1.0 / 32.0,
                               {0.0, 0.125, 0.25});
  auto nb = necessary_bound_check(field, {0, 0, 0}, 0.25, 0.125, 2.0);
  CHECK(nb.lhs == 0.0);
  CHECK(nb.rhs == 0.0);
}

TEST_CASE("necessary bound: holds for the stationary examples at gamma 2") {
  const double h = 1.0 / 256.0;
  const double rho = 1.0 / 8.0;
  for (const char* name : {"u1", "u2"}) {
    std::vector<double> times{0.0, rho, 2.0 * rho};
    auto field = materialize(make_example(name), 0.375, h, times);
    auto nb = necessary_bound_check(field, {0, 0, 0}, 2.0 * rho, rho, 2.0);
    INFO(name << " lhs " << nb.lhs << " rhs " << nb.rhs);
    CHECK(nb.holds());
  }
}

TEST_CASE("necessary bound: persists under shrinking the field") {
  const double h = 1.0 / 256.0;
  const double rho = 1.0 / 8.0;
  std::vector<double> times{0.0, rho, 2.0 * rho};
  auto field = materialize(make_example("u2"), 0.375, h, times);
  for (double c : {1.0, 0.5, 0.1}) {
    SpaceTimeField scaled = field;
    for (auto& v : scaled.data) v *= c;
    auto nb = necessary_bound_check(scaled, {0, 0, 0}, 2.0 * rho, rho, 2.0);
    CHECK(nb.holds());
  }
}

TEST_CASE("critical mass constants: exact dyadic arithmetic") {
  auto k22 = degiorgi_nu(2, 2.0);
  CHECK(k22.b == 32.0);
  CHECK(k22.nu == std::pow(2.0, -22.0));
  CHECK(k22.alpha == 0.5);

  auto k11 = degiorgi_nu(1, 1.0);
  CHECK(k11.b == 128.0);
  CHECK(k11.nu == std::pow(2.0, -7.0));

  auto k32 = degiorgi_nu(3, 2.0);
  CHECK(k32.b == doctest::Approx(std::pow(2.0, 13.0 / 3.0)).epsilon(1e-14));
  CHECK(k32.nu == doctest::Approx(std::pow(2.0, -42.0)).epsilon(1e-12));
}

TEST_CASE("critical mass decreases in N and gamma") {
  CHECK(degiorgi_nu(2, 2.0).nu < degiorgi_nu(1, 2.0).nu);
  CHECK(degiorgi_nu(3, 2.0).nu < degiorgi_nu(2, 2.0).nu);
  CHECK(degiorgi_nu(2, 4.0).nu < degiorgi_nu(2, 2.0).nu);
}

TEST_CASE("Yn recursion: zero data stays zero") {
  auto seq = iterate_Yn(0.0, degiorgi_nu(2, 2.0), 10);
  for (double v : seq.values) CHECK(v == 0.0);
  CHECK(seq.verdict == YnVerdict::Converged);
}

TEST_CASE("Yn recursion: critical data decays geometrically with ratio b^-N") {
  auto constants = degiorgi_nu(2, 2.0);
  auto seq = iterate_Yn(constants.nu, constants, 20);
  double ratio = std::pow(constants.b, -double(constants.N));
  REQUIRE(seq.values.size() == 21);
  for (std::size_t n = 1; n < seq.values.size(); ++n) {
    double want = constants.nu * std::pow(ratio, double(n));
    CHECK(std::abs(seq.values[n] - want) <= 1e-10 * want);
  }
  CHECK(seq.verdict == YnVerdict::Converged);
}

TEST_CASE("Yn recursion: twice-critical data diverges quickly") {
  auto constants = degiorgi_nu(2, 2.0);
  auto seq = iterate_Yn(2.0 * constants.nu, constants, 200);
  CHECK(seq.verdict == YnVerdict::Diverged);
  CHECK(seq.stop_index <= 200);
}

TEST_CASE("lemma check: clean field passes vacuously") {
  auto field = sample_analytic([](const Vec3&, double) { return 1.0; },
                               tvtest::centered_box(2, 0.75), 1.0 / 32.0,
                               {0.0, 0.05, 0.1});
  OscillationData osc{1.0, 0.0, 1.0};  // external bounds: mu- = 0, omega = 1
  auto report = degiorgi_lemma_check(field, {0, 0, 0}, 0.1, 0.1, 0.25, osc,
                                     TruncationSign::Minus, 2.0);
  CHECK(report.status == CheckStatus::Pass);
  CHECK(report.density == 0.0);
  CHECK(report.violations == 0);
}

TEST_CASE("lemma check: zero oscillation is not applicable") {
  auto field = sample_analytic([](const Vec3&, double) { return 1.0; },
                               tvtest::centered_box(2, 0.75), 1.0 / 32.0, {0.0, 0.1});
  OscillationData osc{1.0, 1.0, 0.0};
  auto report = degiorgi_lemma_check(field, {0, 0, 0}, 0.1, 0.1, 0.25, osc,
                                     TruncationSign::Minus, 2.0);
  CHECK(report.status == CheckStatus::NotApplicable);
}

TEST_CASE("lemma check: synthetic spikes defeat the conclusion in empirical mode") {
  // a non-solution with a few deep spikes inside the inner cylinder: sparse
  // enough to satisfy the measure hypothesis, deep enough to violate the bound
  const double h = 1.0 / 48.0;
  auto f = [h](const Vec3& x, double) {
    bool spike = std::abs(x[0] - 0.02) < h && std::abs(x[1] - 0.02) < h;
    return spike ? 0.0 : 1.0;
  };
  auto field = sample_analytic(f, tvtest::centered_box(2, 0.75), h, {0.0, 0.05, 0.1});
  OscillationData osc{1.0, 0.0, 1.0};
  auto report = degiorgi_lemma_check(field, {0, 0, 0}, 0.1, 0.15, 0.25, osc,
                                     TruncationSign::Minus, 2.0, /*nu=*/0.05);
  CHECK(report.status == CheckStatus::Fail);
  CHECK(report.density <= 0.05);
  CHECK(report.violations > 0);
  CHECK(report.worst_value == doctest::Approx(0.0));
}

TEST_CASE("lemma check: solver outputs never violate when the hypothesis is met") {
  auto run = tvtest::small_run(1.0 / 48.0, 1.0, 24, 3);
  Rng rng(55);
  int applicable = 0;
  for (int trial = 0; trial < 30; ++trial) {
    double rho = rng.uniform(0.08, 0.2);
    Vec3 point{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0.0};
    double xi = rng.uniform(0.2, 0.5);
    double t0 = run.field.times[run.field.times.size() - 1 - rng.below(4)];
    Cylinder probe{point, t0, 2.0 * rho, 1.0, TimeOrientation::Backward};
    OscillationData osc = ess_osc(run.field, probe);
    if (!(osc.omega > 1e-9)) continue;
    TruncationSign sign = trial % 2 ? TruncationSign::Plus : TruncationSign::Minus;
    auto report = degiorgi_lemma_check(run.field, point, t0, rho, xi, osc, sign, 2.0,
                                       /*nu=*/0.05);
    if (report.status == CheckStatus::NotApplicable) continue;
    ++applicable;
    CHECK(report.status == CheckStatus::Pass);
  }
  CHECK(applicable > 0);
}

TEST_CASE("expansion constants match the closed forms") {
  auto k = expansion_constants(2, 2.0);
  CHECK(k.sigma == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
  CHECK(k.epsilon == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
  CHECK(k.delta == doctest::Approx(1.0 / 1024.0).epsilon(1e-15));
  auto k3 = expansion_constants(3, 1.0);
  CHECK(k3.sigma == doctest::Approx(1.0 / 48.0).epsilon(1e-15));
  CHECK(k3.delta == doctest::Approx(1.0 / 768.0).epsilon(1e-15));
}

TEST_CASE("expansion check: time-constant field keeps its level sets") {
  const double h = 1.0 / 48.0;
  std::vector<double> times;
  for (int m = 0; m <= 10; ++m) times.push_back(m * 1e-5);
  auto field = materialize(make_example("u2"), 0.75, h, times);
  Cylinder probe{{0, 0, 0}, 0.0, 0.3, 1e-4 / 0.3, TimeOrientation::Forward};
  OscillationData osc = ess_osc(field, probe);
  // relax delta so the horizon actually contains stamps
  ExpansionConstants constants = expansion_constants(2, 2.0);
  constants.delta *= 4096.0;
  auto report = expansion_check(field, {0, 0, 0}, 0.0, 0.3, 0.5, osc, constants);
  REQUIRE(report.status != CheckStatus::NotApplicable);
  CHECK(report.status == CheckStatus::Pass);
  CHECK(report.times_checked > 0);
}

TEST_CASE("expansion check: adversarial collapse is caught with relaxed delta") {
  // half the ball holds at time zero then collapses immediately
  const double h = 1.0 / 48.0;
  auto f = [](const Vec3& x, double t) {
    if (t > 0.0) return 0.0;
    return x[0] > 0.0 ? 1.0 : 0.0;
  };
  std::vector<double> times;
  for (int m = 0; m <= 10; ++m) times.push_back(m * 1e-4);
  auto field = sample_analytic(f, tvtest::centered_box(2, 0.75), h, times);
  OscillationData osc{1.0, 0.0, 1.0};
  ExpansionConstants constants = expansion_constants(2, 2.0);
  constants.delta *= 256.0;
  auto report = expansion_check(field, {0, 0, 0}, 0.0, 0.3, 0.5, osc, constants);
  CHECK(report.status == CheckStatus::Fail);
  CHECK(report.first_failing_time.has_value());
}

TEST_CASE("expansion check: solver outputs hold over the horizon") {
  auto run = tvtest::small_run(1.0 / 48.0, 1.0, 24, 3);
  Rng rng(77);
  int applicable = 0;
  for (int trial = 0; trial < 20; ++trial) {
    double rho = rng.uniform(0.1, 0.25);
    Vec3 point{rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25), 0.0};
    std::size_t ms = rng.below(run.field.times.size() - 2);
    double s = run.field.times[ms];
    Cylinder probe{point, s, rho, (run.field.times.back() - s) / rho,
                   TimeOrientation::Forward};
    OscillationData osc = ess_osc(run.field, probe);
    if (!(osc.omega > 1e-9)) continue;
    ExpansionConstants constants = expansion_constants(2, 2.0);
    constants.delta *= 4096.0;  // observable horizon
    auto report = expansion_check(run.field, point, s, rho, 0.3, osc, constants);
    if (report.status == CheckStatus::NotApplicable) continue;
    ++applicable;
    CHECK(report.status == CheckStatus::Pass);
  }
  CHECK(applicable > 0);
}

TEST_CASE("cascade: constant field reports zero oscillation everywhere") {
  auto field = sample_analytic([](const Vec3&, double) { return 2.0; },
                               tvtest::centered_box(2, 0.75), 1.0 / 64.0,
                               {0.0, 0.2, 0.4});
  auto state = oscillation_cascade(field, {0, 0, 0}, 0.4, 0.4, CascadeMode::Empirical);
  CHECK(state.all_within_bound);
  for (const auto& stage : state.stages) CHECK(stage.omega == 0.0);
}

TEST_CASE("cascade: paper constants are the printed ones and stop at the grid floor") {
  auto field = sample_analytic([](const Vec3&, double) { return 2.0; },
                               tvtest::centered_box(2, 0.75), 1.0 / 64.0,
                               {0.0, 0.2, 0.4});
  auto state = oscillation_cascade(field, {0, 0, 0}, 0.4, 0.4, CascadeMode::Paper, 2.0);
  // 2 xi = delta / 64 with delta = 1/1024
  CHECK(state.xi == doctest::Approx(1.0 / 131072.0).epsilon(1e-15));
  CHECK(state.eta == doctest::Approx(1.0 - 0.5 / 131072.0).epsilon(1e-15));
  CHECK(state.stages.size() == 1);  // next radius collapses below 4h immediately
}

TEST_CASE("cascade: smoothed solver field decays through several stages") {
  auto run = tvtest::small_run(1.0 / 64.0, 0.75, 48, 3, 1.0 / 64.0);
  double t0 = run.field.times.back();
  auto state = oscillation_cascade(run.field, {0, 0, 0}, t0, 0.64, CascadeMode::Empirical,
                                   2.0, 0.125);
  INFO("stages " << state.stages.size() << " decays " << state.decays);
  CHECK(state.stages.size() >= 4);
  CHECK(state.decays >= 3);
  CHECK(state.all_within_bound);
}

TEST_CASE("cascade: jump stalls the oscillation at stage one") {
  const double h = 1.0 / 64.0;
  std::vector<double> rhos{0.45};
  auto field = ladder_field(make_example("step"), 0.75, h, {0.45, 0.45 / 2, 0.45 / 4},
                            0.45);
  auto state = oscillation_cascade(field, {0, 0, 0}, 0.45, 0.45, CascadeMode::Empirical,
                                   2.0, 0.125);
  CHECK(!state.all_within_bound);
  CHECK(state.fail_stage == 1);
  // omega stalls at the jump height (1 after normalization bookkeeping)
  CHECK(state.stages.back().omega ==
        doctest::Approx(state.stages.front().omega).epsilon(1e-9));
}

TEST_CASE("sup bound: constant field substitution") {
  const double c = 0.8;
  std::vector<double> times;
  for (int m = 0; m <= 8; ++m) times.push_back(m * 0.01);
  auto field = sample_analytic([c](const Vec3&, double) { return c; },
                               tvtest::centered_box(2, 0.75), 1.0 / 32.0, times);
  auto report = sup_bound_check(field, {0, 0, 0}, 0.04, 0.08, 0.12, 3.0);
  CHECK(report.measured_sup == doctest::Approx(c));
  CHECK(report.bound_shape > 0.0);
  CHECK(std::isfinite(report.ratio));
}

TEST_CASE("sup bound: scaling keeps the ratio bounded for c >= 1") {
  std::vector<double> times;
  for (int m = 0; m <= 8; ++m) times.push_back(m * 0.01);
  auto base = tvtest::random_bumps_field(2, 0.75, 1.0 / 32.0, 15);
  SpaceTimeField field = base;
  field.times = times;
  field.data.resize(field.cell_count() * times.size());
  for (std::size_t m = 0; m < times.size(); ++m)
    for (std::size_t cell = 0; cell < field.cell_count(); ++cell)
      field.value(m, cell) = base.value(0, cell);
  double r1 = sup_bound_check(field, {0, 0, 0}, 0.04, 0.08, 0.12, 3.0).ratio;
  for (auto& v : field.data) v *= 4.0;
  double r4 = sup_bound_check(field, {0, 0, 0}, 0.04, 0.08, 0.12, 3.0).ratio;
  CHECK(r4 <= std::max(r1, 1.0) * 4.0);
  CHECK(std::isfinite(r4));
}

TEST_CASE("sup bound: r <= N is rejected") {
  auto field = sample_analytic([](const Vec3&, double) { return 1.0; },
                               tvtest::centered_box(2, 0.75), 1.0 / 16.0, {0.0, 0.1});
  CHECK_THROWS_AS(sup_bound_check(field, {0, 0, 0}, 0.0, 0.1, 0.1, 2.0), Error);
}
