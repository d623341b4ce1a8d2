#include "tvlab/tvmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tvlab/certify.hpp"
#include "tvlab/error.hpp"
#include "tvlab/stencil.hpp"

namespace tvlab {

namespace {

double pow_hN(double h, int dim) {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h;
  return v;
}

void require_margin(const SpaceTimeField& field, const Ball& ball, int margin,
                    const char* who) {
  if (!ball_has_margin(field, ball, margin)) {
    std::ostringstream os;
    os << who << ": ball (center";
    for (int a = 0; a < field.dim; ++a) os << " " << ball.center[a];
    os << ", radius " << ball.radius << ") needs a " << margin
       << "-cell margin inside the grid box";
    throw Error(ErrorCode::BallTouchesMargin, os.str());
  }
}

}  // namespace

TVSlice tv_slice(const SpaceTimeField& field, std::size_t m, const Ball& ball,
                 const DualAscentOptions& opts) {
  require_margin(field, ball, 1, "tv_slice");
  Stencil st(field);
  auto cells = cells_in_ball(field, ball);
  const double* u = field.slice(m);
  const double hN = pow_hN(st.h, st.dim);

  TVSlice out;
  out.primal = tv_primal_on_cells(st, u, cells);

  // Projected ascent on the linear dual objective -sum u (div phi) h^N over
  // per-cell balls |phi_c| <= 1. Supported on the in-ball cells, so summation
  // by parts is exact and the reported value is a true lower bound.
  const double step = opts.step_factor * st.h / (2.0 * std::sqrt(double(st.dim)));
  std::vector<double> phi(cells.size() * std::size_t(st.dim), 0.0);
  std::vector<std::array<double, 3>> grads(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) grads[i] = st.gradient(u, cells[i]);
  for (int it = 0; it < opts.iterations; ++it) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double norm2 = 0.0;
      for (int a = 0; a < st.dim; ++a) {
        double v = phi[i * st.dim + a] + step * grads[i][a];
        phi[i * st.dim + a] = v;
        norm2 += v * v;
      }
      if (norm2 > 1.0) {
        double inv = 1.0 / std::sqrt(norm2);
        for (int a = 0; a < st.dim; ++a) phi[i * st.dim + a] *= inv;
      }
    }
  }

  // Evaluate -sum u (div phi) h^N through the divergence, as certified.
  std::vector<double> comp(st.cells * std::size_t(st.dim), 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (int a = 0; a < st.dim; ++a)
      comp[std::size_t(a) * st.cells + cells[i]] = phi[i * st.dim + a];
  std::array<const double*, 3> cp{nullptr, nullptr, nullptr};
  for (int a = 0; a < st.dim; ++a) cp[a] = comp.data() + std::size_t(a) * st.cells;
  double dual = 0.0;
  for (std::size_t c = 0; c < st.cells; ++c) dual -= u[c] * st.divergence(cp, c);
  out.dual_lower = dual * hN;
  out.gap = out.primal - out.dual_lower;
  return out;
}

double tv_time_integral(const SpaceTimeField& field, const Cylinder& cyl,
                        const DualAscentOptions& opts) {
  auto stamps = stamps_in_window(field, cyl.t_begin(), cyl.t_end(), true);
  std::vector<double> tv(stamps.size());
  for (std::size_t i = 0; i < stamps.size(); ++i)
    tv[i] = tv_slice(field, stamps[i], cyl.ball(), opts).primal;
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < stamps.size(); ++i) {
    double dt = field.times[stamps[i + 1]] - field.times[stamps[i]];
    integral += 0.5 * (tv[i] + tv[i + 1]) * dt;
  }
  return integral;
}

LevelSet level_set_measure(const SpaceTimeField& field, std::size_t m, const Ball& ball,
                           double level, LevelDirection direction) {
  auto cells = cells_in_ball(field, ball);
  const double* u = field.slice(m);
  std::size_t count = 0;
  for (std::size_t c : cells) {
    if (direction == LevelDirection::Below ? u[c] < level : u[c] > level) ++count;
  }
  return LevelSet{level, direction, double(count) * pow_hN(field.spacing, field.dim)};
}

double embedding_ratio(const SpaceTimeField& field, const Cutoff& cutoff,
                       const Cylinder& cyl) {
  require_margin(field, cyl.ball(), 1, "embedding_ratio");
  Stencil st(field);
  auto cells = cells_in_ball(field, cyl.ball());
  auto stamps = stamps_in_window(field, cyl.t_begin(), cyl.t_end(), true);
  const double hN = pow_hN(st.h, st.dim);
  const double q = double(st.dim + 2) / double(st.dim);

  std::vector<double> weighted(st.cells, 0.0);
  std::vector<double> lq(stamps.size()), tv(stamps.size()), l2(stamps.size());
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    const double* u = field.slice(stamps[i]);
    double zt = cutoff.time.value(field.times[stamps[i]]);
    std::fill(weighted.begin(), weighted.end(), 0.0);
    double slq = 0.0, sl2 = 0.0;
    for (std::size_t c : cells) {
      if (u[c] < 0.0)
        throw Error(ErrorCode::PreconditionFailed,
                    "embedding_ratio requires a nonnegative field (truncate first)");
      double w = u[c] * cutoff.space.values[c] * zt;
      weighted[c] = w;
      slq += std::pow(w, q);
      sl2 += w * w;
    }
    lq[i] = slq * hN;
    l2[i] = sl2 * hN;
    tv[i] = tv_primal_on_cells(st, weighted.data(), cells);
  }

  double num = 0.0, tvint = 0.0, supl2 = 0.0;
  for (std::size_t i = 0; i < stamps.size(); ++i) supl2 = std::max(supl2, l2[i]);
  for (std::size_t i = 0; i + 1 < stamps.size(); ++i) {
    double dt = field.times[stamps[i + 1]] - field.times[stamps[i]];
    num += 0.5 * (lq[i] + lq[i + 1]) * dt;
    tvint += 0.5 * (tv[i] + tv[i + 1]) * dt;
  }
  double den = tvint * std::pow(supl2, 1.0 / double(st.dim));
  if (num == 0.0 && den == 0.0) return 0.0;
  return num / den;
}

double isoperimetric_ratio(const SpaceTimeField& field, std::size_t m, const Ball& ball,
                           double k, double l) {
  if (!(l > k)) throw Error(ErrorCode::InvalidArgument, "isoperimetric_ratio needs l > k");
  require_margin(field, ball, 1, "isoperimetric_ratio");
  Stencil st(field);
  auto cells = cells_in_ball(field, ball);
  const double* u = field.slice(m);
  const double hN = pow_hN(st.h, st.dim);

  double ball_volume = double(cells.size()) * hN;
  double upper = level_set_measure(field, m, ball, l, LevelDirection::Above).measure;
  if (!(upper >= 0.25 * ball_volume)) {
    std::ostringstream os;
    os << "isoperimetric_ratio: |[u>l] cap B| = " << upper << " < |B|/4 = "
       << 0.25 * ball_volume;
    throw Error(ErrorCode::PreconditionFailed, os.str());
  }
  double below = level_set_measure(field, m, ball, k, LevelDirection::Below).measure;
  if (below == 0.0) return 0.0;

  // Transition-band TV: a cell participates when its forward stencil sees the
  // open band (k, l).
  double band_tv = 0.0;
  for (std::size_t c : cells) {
    auto idx = st.cell_index(c);
    double lo = u[c], hi = u[c];
    for (int a = 0; a < st.dim; ++a) {
      if (idx[a] + 1 < st.shape[a]) {
        double v = u[c + st.stride[a]];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (lo < l && hi > k) band_tv += st.gradient_norm(u, c);
  }
  band_tv *= hN;
  if (band_tv == 0.0) return std::numeric_limits<double>::infinity();
  return ((l - k) * below) / (ball.radius * band_tv);
}

}  // namespace tvlab
