#include "tvlab/flow.hpp"
#include <cstdint>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "tvlab/error.hpp"
#include "tvlab/stencil.hpp"

namespace tvlab {

namespace {

double pow_hN(double h, int dim) {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h;
  return v;
}

}  // namespace

bool DualField::same_grid(const SpaceTimeField& field) const {
  if (dim != field.dim || shape != field.shape) return false;
  if (std::abs(spacing - field.spacing) > 1e-12 * spacing) return false;
  if (times.size() != field.times.size()) return false;
  for (std::size_t m = 0; m < times.size(); ++m)
    if (std::abs(times[m] - field.times[m]) > 1e-9 * std::max(1.0, std::abs(times[m])))
      return false;
  return true;
}

void DualField::refresh_sup_norm() {
  const std::size_t cells = cell_count();
  double worst = 0.0;
  for (std::size_t m = 0; m < times.size(); ++m) {
    for (std::size_t c = 0; c < cells; ++c) {
      double n2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        double v = component(m, a)[c];
        n2 += v * v;
      }
      worst = std::max(worst, n2);
    }
  }
  sup_norm = std::sqrt(worst);
}

void SolverConfig::validate(int dim, double h) const {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidConfig, "solver dt must be positive");
  if (inner_iters < 1) throw Error(ErrorCode::InvalidConfig, "inner_iters must be >= 1");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidConfig, "tolerance must be positive");
  double auto_step = h / (2.0 * std::sqrt(double(dim)));
  double tau = primal_step > 0.0 ? primal_step : auto_step;
  double sigma = dual_step > 0.0 ? dual_step : auto_step;
  double limit = h * h / (4.0 * double(dim));
  if (tau * sigma > limit * (1.0 + 1e-12))
    throw Error(ErrorCode::InvalidConfig,
                "primal_step * dual_step exceeds 1 / ||discrete gradient||^2");
}

namespace {

// Per-cell stencil masks so the inner loops avoid index arithmetic.
struct EdgeMasks {
  std::vector<std::uint8_t> forward;   // bit a: idx[a]+1 >= shape[a]
  std::vector<std::uint8_t> backward;  // bit a: idx[a] == 0

  explicit EdgeMasks(const Stencil& st) {
    forward.assign(st.cells, 0);
    backward.assign(st.cells, 0);
    for (std::size_t c = 0; c < st.cells; ++c) {
      auto idx = st.cell_index(c);
      for (int a = 0; a < st.dim; ++a) {
        if (idx[a] + 1 >= st.shape[a]) forward[c] |= std::uint8_t(1u << a);
        if (idx[a] == 0) backward[c] |= std::uint8_t(1u << a);
      }
    }
  }
};

double divergence_at(const Stencil& st, const EdgeMasks& masks, const double* z,
                     std::size_t cells, std::size_t c) {
  double d = 0.0;
  for (int a = 0; a < st.dim; ++a) {
    const double* za = z + std::size_t(a) * cells;
    double hi = (masks.forward[c] & (1u << a)) ? 0.0 : za[c];
    double lo = (masks.backward[c] & (1u << a)) ? 0.0 : za[c - st.stride[a]];
    d += hi - lo;
  }
  return d / st.h;
}

}  // namespace

RofStepResult rof_step(const SpaceTimeField& grid_like, const std::vector<double>& u_prev,
                       const SolverConfig& cfg, const std::vector<double>* warm_dual) {
  Stencil st(grid_like);
  cfg.validate(st.dim, st.h);
  if (u_prev.size() != st.cells)
    throw Error(ErrorCode::MetadataMismatch, "u_prev size does not match the grid");
  for (double v : u_prev)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteSample, "u_prev not finite");

  const double auto_step = st.h / (2.0 * std::sqrt(double(st.dim)));
  const double dt = cfg.dt;
  const double hN = pow_hN(st.h, st.dim);
  const std::size_t cells = st.cells;
  const int dim = st.dim;
  const EdgeMasks masks(st);

  // the quadratic term is (1/dt)-strongly convex, so the step sizes are
  // rebalanced every sweep (accelerated primal-dual); their product stays at
  // the admissible initial value
  double tau = cfg.primal_step > 0.0 ? cfg.primal_step : auto_step;
  double sigma = cfg.dual_step > 0.0 ? cfg.dual_step : auto_step;
  const double strong = 1.0 / dt;

  std::vector<double> u(u_prev);
  std::vector<double> ubar(u_prev);
  std::vector<double> z(cells * std::size_t(dim), 0.0);
  if (warm_dual && warm_dual->size() == z.size()) z = *warm_dual;

  auto objective = [&](const std::vector<double>& v) {
    double tv = 0.0;
    for (std::size_t c = 0; c < cells; ++c) tv += st.gradient_norm(v.data(), c);
    double fid = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      double d = v[c] - u_prev[c];
      fid += d * d;
    }
    return hN * (tv + fid / (2.0 * dt));
  };

  auto dual_gap = [&]() {
    // primal P(u) minus dual D(z) = -h^N sum f div z - dt/2 h^N sum (div z)^2;
    // nonnegative, zero at the saddle.
    double P = objective(u);
    double D = 0.0, q = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      double d = divergence_at(st, masks, z.data(), cells, c);
      D -= u_prev[c] * d;
      q += d * d;
    }
    D = hN * D - 0.5 * dt * hN * q;
    return (P - D) / (1.0 + std::abs(P));
  };

  RofStepResult out;
  out.objective_prev = objective(u_prev);

  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  const int check_every = 20;
  const double inv_h = 1.0 / st.h;
  for (; it < cfg.inner_iters; ++it) {
    // dual ascent on z with the extrapolated ubar
    for (std::size_t c = 0; c < cells; ++c) {
      double n2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        double g = (masks.forward[c] & (1u << a))
                       ? 0.0
                       : (ubar[c + st.stride[a]] - ubar[c]) * inv_h;
        double v = z[std::size_t(a) * cells + c] + sigma * g;
        z[std::size_t(a) * cells + c] = v;
        n2 += v * v;
      }
      if (n2 > 1.0) {
        double inv = 1.0 / std::sqrt(n2);
        for (int a = 0; a < dim; ++a) z[std::size_t(a) * cells + c] *= inv;
      }
    }
    // primal prox and extrapolation
    const double w = tau / dt;
    const double theta = 1.0 / std::sqrt(1.0 + 2.0 * strong * tau);
    for (std::size_t c = 0; c < cells; ++c) {
      double d = divergence_at(st, masks, z.data(), cells, c);
      double un = (u[c] + tau * d + w * u_prev[c]) / (1.0 + w);
      ubar[c] = un + theta * (un - u[c]);
      u[c] = un;
    }
    if (!std::isfinite(u[0]))
      throw Error(ErrorCode::DivergentIterates,
                  "non-finite iterate at inner iteration " + std::to_string(it));
    tau *= theta;
    sigma /= theta;
    if ((it + 1) % check_every == 0) {
      residual = dual_gap();
      if (residual <= cfg.tolerance) {
        ++it;
        break;
      }
    }
  }
  if (!std::isfinite(residual) || residual > cfg.tolerance) residual = dual_gap();

  out.u = std::move(u);
  out.z = std::move(z);
  out.residual = residual;
  out.iterations = it;
  out.converged = residual <= cfg.tolerance;
  out.objective_next = objective(out.u);
  return out;
}

EvolveResult evolve(const SpaceTimeField& grid_like, const std::vector<double>& initial,
                    int steps, const SolverConfig& cfg, double t0) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "evolve needs steps >= 1");
  Stencil st(grid_like);
  cfg.validate(st.dim, st.h);

  EvolveResult out;
  out.field.dim = grid_like.dim;
  out.field.spacing = grid_like.spacing;
  out.field.origin = grid_like.origin;
  out.field.shape = grid_like.shape;
  out.field.times.resize(std::size_t(steps) + 1);
  for (int s = 0; s <= steps; ++s) out.field.times[s] = t0 + s * cfg.dt;
  out.field.data.resize(out.field.cell_count() * out.field.times.size());

  out.dual.dim = grid_like.dim;
  out.dual.spacing = grid_like.spacing;
  out.dual.origin = grid_like.origin;
  out.dual.shape = grid_like.shape;
  out.dual.times = out.field.times;
  out.dual.data.assign(out.dual.cell_count() * std::size_t(grid_like.dim) *
                           out.dual.times.size(),
                       0.0);

  const std::size_t cells = st.cells;
  std::copy(initial.begin(), initial.end(), out.field.slice(0));
  std::vector<double> current(initial);
  std::vector<double> warm;
  for (int s = 1; s <= steps; ++s) {
    RofStepResult step = rof_step(grid_like, current, cfg, warm.empty() ? nullptr : &warm);
    std::copy(step.u.begin(), step.u.end(), out.field.slice(std::size_t(s)));
    for (int a = 0; a < st.dim; ++a)
      std::copy(step.z.begin() + std::size_t(a) * cells,
                step.z.begin() + std::size_t(a + 1) * cells,
                out.dual.component(std::size_t(s), a));
    current = step.u;
    warm = step.z;
    step.u.clear();
    step.z.clear();
    out.certificates.push_back(std::move(step));
  }
  out.field.validate();
  out.dual.refresh_sup_norm();
  return out;
}

std::vector<double> regularized_step(const SpaceTimeField& grid_like,
                                     const std::vector<double>& u_prev, double dt,
                                     double epsilon) {
  Stencil st(grid_like);
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (dt > st.h * epsilon / 4.0 * (1.0 + 1e-12))
    throw Error(ErrorCode::StabilityBound,
                "dt exceeds the documented bound h*epsilon/4 for the regularized step");
  const std::size_t cells = st.cells;
  const int dim = st.dim;
  const double h2 = st.h * st.h;

  // face diffusivity from lagged |grad u|, averaged from the two cells
  std::vector<double> gnorm2(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    auto g = st.gradient(u_prev.data(), c);
    double n2 = 0.0;
    for (int a = 0; a < dim; ++a) n2 += g[a] * g[a];
    gnorm2[c] = n2;
  }
  // weight on the forward face of cell c along axis a (0 on box faces)
  std::vector<double> w(cells * std::size_t(dim), 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    auto idx = st.cell_index(c);
    for (int a = 0; a < dim; ++a) {
      if (idx[a] + 1 >= st.shape[a]) continue;
      double mean = 0.5 * (gnorm2[c] + gnorm2[c + st.stride[a]]);
      w[std::size_t(a) * cells + c] = 1.0 / std::sqrt(mean + epsilon * epsilon);
    }
  }

  // (I - dt div(W grad)) u = u_prev, SPD; conjugate gradients
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t c = 0; c < cells; ++c) {
      auto idx = st.cell_index(c);
      double acc = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double* wa = w.data() + std::size_t(a) * cells;
        if (idx[a] + 1 < st.shape[a])
          acc += wa[c] * (x[c + st.stride[a]] - x[c]);
        if (idx[a] > 0)
          acc -= wa[c - st.stride[a]] * (x[c] - x[c - st.stride[a]]);
      }
      y[c] = x[c] - dt * acc / h2;
    }
  };

  std::vector<double> x(u_prev), r(cells), p(cells), Ap(cells);
  apply(x, Ap);
  double rr = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    r[c] = u_prev[c] - Ap[c];
    rr += r[c] * r[c];
  }
  p = r;
  double b2 = std::inner_product(u_prev.begin(), u_prev.end(), u_prev.begin(), 0.0);
  double tol2 = 1e-24 * std::max(1.0, b2);
  for (int it = 0; it < 500 && rr > tol2; ++it) {
    apply(p, Ap);
    double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
    if (pAp <= 0.0) break;
    double alpha = rr / pAp;
    double rr_new = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      x[c] += alpha * p[c];
      r[c] -= alpha * Ap[c];
      rr_new += r[c] * r[c];
    }
    double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t c = 0; c < cells; ++c) p[c] = r[c] + beta * p[c];
  }
  for (double v : x)
    if (!std::isfinite(v))
      throw Error(ErrorCode::DivergentIterates, "regularized step produced non-finite values");
  return x;
}

SpaceTimeField residual_div_z(const SpaceTimeField& field, const DualField& z) {
  if (!z.same_grid(field))
    throw Error(ErrorCode::MetadataMismatch, "field and dual grid metadata differ");
  Stencil st(field);
  SpaceTimeField r = field;
  std::fill(r.data.begin(), r.data.end(), 0.0);
  const std::size_t cells = st.cells;
  for (std::size_t m = 1; m < field.times.size(); ++m) {
    double dt = field.times[m] - field.times[m - 1];
    std::array<const double*, 3> zc{nullptr, nullptr, nullptr};
    for (int a = 0; a < st.dim; ++a) zc[a] = z.component(m, a);
    const double* um = field.slice(m);
    const double* up = field.slice(m - 1);
    double* rm = r.slice(m);
    for (std::size_t c = 0; c < cells; ++c) {
      auto idx = st.cell_index(c);
      bool interior = true;
      for (int a = 0; a < st.dim; ++a)
        if (idx[a] == 0 || idx[a] + 1 >= st.shape[a]) interior = false;
      if (!interior) continue;
      rm[c] = (um[c] - up[c]) / dt - st.divergence(zc, c);
    }
  }
  return r;
}

ResidualStats residual_stats(const SpaceTimeField& residual, int margin_cells,
                             double inner_radius, double outer_radius) {
  Stencil st(residual);
  std::vector<double> mags;
  const std::size_t cells = st.cells;
  for (std::size_t m = 1; m < residual.times.size(); ++m) {
    const double* rm = residual.slice(m);
    for (std::size_t c = 0; c < cells; ++c) {
      auto idx = st.cell_index(c);
      bool keep = true;
      for (int a = 0; a < st.dim; ++a)
        if (idx[a] < margin_cells || idx[a] + margin_cells >= st.shape[a]) keep = false;
      if (!keep) continue;
      if (outer_radius > 0.0) {
        Vec3 x = residual.cell_center(c);
        double r2 = 0.0;
        for (int a = 0; a < st.dim; ++a) r2 += x[a] * x[a];
        double rr = std::sqrt(r2);
        if (rr < inner_radius || rr > outer_radius) continue;
      }
      mags.push_back(std::abs(rm[c]));
    }
  }
  ResidualStats stats;
  if (mags.empty()) return stats;
  std::sort(mags.begin(), mags.end());
  stats.max_abs = mags.back();
  stats.median_abs = mags[mags.size() / 2];
  stats.mean_abs = std::accumulate(mags.begin(), mags.end(), 0.0) / double(mags.size());
  return stats;
}

namespace {
constexpr char kDualMagic[4] = {'T', 'V', 'Z', '1'};
}

void write_dual(const DualField& z, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  os.write(kDualMagic, 4);
  auto put_u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_f64 = [&](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
  put_u32(std::uint32_t(z.dim));
  for (int a = 0; a < z.dim; ++a) put_u32(std::uint32_t(z.shape[a]));
  put_f64(z.spacing);
  for (int a = 0; a < z.dim; ++a) put_f64(z.origin[a]);
  put_u32(std::uint32_t(z.times.size()));
  for (double t : z.times) put_f64(t);
  // interleave components per cell
  const std::size_t cells = z.cell_count();
  for (std::size_t m = 0; m < z.times.size(); ++m)
    for (std::size_t c = 0; c < cells; ++c)
      for (int a = 0; a < z.dim; ++a) put_f64(z.component(m, a)[c]);
  if (!os) throw Error(ErrorCode::Io, "short write to " + path);
}

DualField read_dual(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  char magic[4] = {};
  if (!is.read(magic, 4)) throw Error(ErrorCode::TruncatedPayload, "file shorter than magic");
  if (std::memcmp(magic, kDualMagic, 4) != 0)
    throw Error(ErrorCode::BadMagic,
                std::string("bad magic \"") + std::string(magic, 4) + "\" in " + path);
  auto get_u32 = [&]() {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4))
      throw Error(ErrorCode::TruncatedPayload, "file ends inside header");
    return v;
  };
  auto get_f64 = [&]() {
    double v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 8))
      throw Error(ErrorCode::TruncatedPayload, "file ends inside header");
    return v;
  };
  DualField z;
  std::uint32_t dim = get_u32();
  if (dim < 1 || dim > 3) throw Error(ErrorCode::BadHeader, "dim out of range");
  z.dim = int(dim);
  for (int a = 0; a < z.dim; ++a) z.shape[a] = int(get_u32());
  z.spacing = get_f64();
  for (int a = 0; a < z.dim; ++a) z.origin[a] = get_f64();
  std::uint32_t nt = get_u32();
  z.times.resize(nt);
  for (auto& t : z.times) t = get_f64();
  for (std::size_t m = 1; m < z.times.size(); ++m)
    if (!(z.times[m] > z.times[m - 1]))
      throw Error(ErrorCode::NonIncreasingTimes, "non-increasing time stamps in " + path);
  const std::size_t cells = z.cell_count();
  z.data.resize(cells * std::size_t(z.dim) * nt);
  for (std::size_t m = 0; m < nt; ++m)
    for (std::size_t c = 0; c < cells; ++c)
      for (int a = 0; a < z.dim; ++a) z.component(m, a)[c] = get_f64();
  z.refresh_sup_norm();
  return z;
}

}  // namespace tvlab
