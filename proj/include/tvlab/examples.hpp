#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tvlab/flow.hpp"
#include "tvlab/grid.hpp"

namespace tvlab {

enum class ContinuityVerdict { Continuous, Discontinuous, Unbounded };

// Closed-form fields with analytic companions for oracle-grade tests.
struct AnalyticExample {
  std::string name;
  int dim = 2;
  std::function<double(const Vec3&, double)> value;
  std::function<double(const Vec3&, double)> time_derivative;  // null if absent
  std::function<Vec3(const Vec3&, double)> dual;               // null if absent
  ContinuityVerdict verdict = ContinuityVerdict::Continuous;
  Vec3 test_point{};        // where the continuity verdict applies
  double singular_radius = 0.0;  // keep diagnostics this far from the origin
};

struct ExampleParams {
  double disc_radius = 0.5;
  double disc_value = 1.0;
  double disc_edge_width = 0.0;  // 0 = sharp indicator
};

// Names: F (unbounded 3D), u1, u2 (2D stationary), step (2D jump),
// disc_solution (2D shrinking disc).
AnalyticExample make_example(const std::string& name, const ExampleParams& params = {});

// Closed-form ||Du(.,t)||(B_rho) about the origin where available:
// u2 and u1 by quadrature, step and disc_solution in closed form; nullopt for F.
std::optional<double> analytic_tv(const AnalyticExample& example, double rho, double t,
                                  const ExampleParams& params = {});

// The u2 constant 2 * int_0^1 sqrt(1-s^2)/sqrt(s) ds evaluated by quadrature
// (TV of u2 over B_rho is this times rho^(3/2)).
double u2_tv_constant();

// ||Du1||(B_rho) = -4 rho int_0^(pi/2) sin(phi) / ln(rho sin(phi)) dphi.
double u1_tv_on_ball(double rho);

// Samples the example on a centered box; times as given.
SpaceTimeField materialize(const AnalyticExample& example, double box_half, double h,
                           const std::vector<double>& times);

// Analytic dual trajectory on the same grid/stamps (errors if absent).
DualField materialize_dual(const AnalyticExample& example, const SpaceTimeField& field);

}  // namespace tvlab
