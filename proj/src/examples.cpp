#include "tvlab/examples.hpp"

#include <algorithm>
#include <cmath>

#include "tvlab/error.hpp"

namespace tvlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double radius(const Vec3& x, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += x[a] * x[a];
  return std::sqrt(s);
}

// Composite Simpson on [a,b].
double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

double u2_tv_constant() {
  // 2 int_0^1 sqrt(1-s^2)/sqrt(s) ds; substitute s = q^2 to remove the
  // endpoint singularity: 4 int_0^1 sqrt(1-q^4) dq.
  static const double value =
      4.0 * simpson([](double q) { return std::sqrt(std::max(0.0, 1.0 - q * q * q * q)); },
                    0.0, 1.0, 4096);
  return value;
}

double u1_tv_on_ball(double rho) {
  if (!(rho > 0.0) || rho >= 1.0)
    throw Error(ErrorCode::InvalidArgument, "u1 TV needs 0 < rho < 1");
  auto integrand = [rho](double phi) {
    double s = std::sin(phi);
    if (s <= 0.0) return 0.0;
    return s / std::log(rho * s);
  };
  return -4.0 * rho * simpson(integrand, 0.0, 0.5 * kPi, 4096);
}

AnalyticExample make_example(const std::string& name, const ExampleParams& params) {
  AnalyticExample ex;
  ex.name = name;
  if (name == "F") {
    ex.dim = 3;
    ex.verdict = ContinuityVerdict::Unbounded;
    ex.singular_radius = 0.0;  // singular at the origin; grids must offset it
    ex.value = [](const Vec3& x, double t) {
      double r = radius(x, 3);
      return (1.0 - t) * 2.0 / r;
    };
    ex.time_derivative = [](const Vec3& x, double) { return -2.0 / radius(x, 3); };
    ex.dual = [](const Vec3& x, double) {
      double r = radius(x, 3);
      return Vec3{-x[0] / r, -x[1] / r, -x[2] / r};
    };
    return ex;
  }
  if (name == "u1") {
    ex.dim = 2;
    ex.verdict = ContinuityVerdict::Continuous;
    ex.value = [](const Vec3& x, double) {
      double x1 = x[0];
      if (x1 > 0.0) return 1.0 / std::log(x1);
      if (x1 < 0.0) return -1.0 / std::log(-x1);
      return 0.0;
    };
    ex.time_derivative = [](const Vec3&, double) { return 0.0; };
    return ex;
  }
  if (name == "u2") {
    ex.dim = 2;
    ex.verdict = ContinuityVerdict::Continuous;
    ex.value = [](const Vec3& x, double) {
      double x1 = x[0];
      return x1 > 0.0 ? std::sqrt(x1) : -std::sqrt(-x1);
    };
    ex.time_derivative = [](const Vec3&, double) { return 0.0; };
    return ex;
  }
  if (name == "step") {
    ex.dim = 2;
    ex.verdict = ContinuityVerdict::Discontinuous;
    ex.value = [](const Vec3& x, double) { return x[0] > 0.0 ? 0.5 : -0.5; };
    ex.time_derivative = [](const Vec3&, double) { return 0.0; };
    return ex;
  }
  if (name == "disc_solution") {
    ex.dim = 2;
    ex.verdict = ContinuityVerdict::Continuous;
    const double R = params.disc_radius;
    const double c = params.disc_value;
    const double w = params.disc_edge_width;
    const double rate = 2.0 / R;  // N/R in the plane
    ex.value = [R, c, w, rate](const Vec3& x, double t) {
      double amp = std::max(c - rate * t, 0.0);
      double r = radius(x, 2);
      if (w <= 0.0) return r < R ? amp : 0.0;
      return amp * std::clamp((R + 0.5 * w - r) / w, 0.0, 1.0);
    };
    ex.time_derivative = [R, c, w, rate](const Vec3& x, double t) {
      if (c - rate * t <= 0.0) return 0.0;
      double r = radius(x, 2);
      double profile = w <= 0.0 ? (r < R ? 1.0 : 0.0)
                                : std::clamp((R + 0.5 * w - r) / w, 0.0, 1.0);
      return -rate * profile;
    };
    ex.dual = [R](const Vec3& x, double) {
      double r = radius(x, 2);
      if (r < R) return Vec3{-x[0] / R, -x[1] / R, 0.0};
      // -R x / |x|^2 is divergence-free in the plane away from the origin
      double s = R / (r * r);
      return Vec3{-x[0] * s, -x[1] * s, 0.0};
    };
    return ex;
  }
  throw Error(ErrorCode::UnknownExample, "no example named \"" + name + "\"");
}

std::optional<double> analytic_tv(const AnalyticExample& example, double rho, double t,
                                  const ExampleParams& params) {
  if (example.name == "u2") return u2_tv_constant() * std::pow(rho, 1.5);
  if (example.name == "u1") return u1_tv_on_ball(rho);
  if (example.name == "step") return 2.0 * rho;
  if (example.name == "disc_solution") {
    const double R = params.disc_radius;
    const double rate = 2.0 / R;
    double amp = std::max(params.disc_value - rate * t, 0.0);
    if (rho < R) return 0.0;  // profile constant strictly inside
    return 2.0 * kPi * R * amp;
  }
  return std::nullopt;
}

SpaceTimeField materialize(const AnalyticExample& example, double box_half, double h,
                           const std::vector<double>& times) {
  Box box;
  box.dim = example.dim;
  for (int a = 0; a < example.dim; ++a) {
    box.lo[a] = -box_half;
    box.hi[a] = box_half;
  }
  return sample_analytic(example.value, box, h, times);
}

DualField materialize_dual(const AnalyticExample& example, const SpaceTimeField& field) {
  if (!example.dual)
    throw Error(ErrorCode::PreconditionFailed,
                "example \"" + example.name + "\" has no analytic dual field");
  DualField z;
  z.dim = field.dim;
  z.spacing = field.spacing;
  z.origin = field.origin;
  z.shape = field.shape;
  z.times = field.times;
  z.data.assign(z.cell_count() * std::size_t(z.dim) * z.times.size(), 0.0);
  const std::size_t cells = z.cell_count();
  for (std::size_t m = 0; m < z.times.size(); ++m) {
    for (std::size_t c = 0; c < cells; ++c) {
      Vec3 v = example.dual(field.cell_center(c), field.times[m]);
      for (int a = 0; a < z.dim; ++a) z.component(m, a)[c] = v[a];
    }
  }
  z.refresh_sup_norm();
  return z;
}

}  // namespace tvlab
