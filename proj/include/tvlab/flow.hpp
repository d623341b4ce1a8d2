#pragma once

#include <string>
#include <vector>

#include "tvlab/grid.hpp"

namespace tvlab {

// Vector field paired with a solved trajectory: N components per cell per
// time stamp, stored component-major within a slice. sup_norm records the
// largest |z| seen; admissibility demands sup_norm <= 1 + 1e-6.
struct DualField {
  int dim = 2;
  double spacing = 0.0;
  Vec3 origin{};
  std::array<int, 3> shape{1, 1, 1};
  std::vector<double> times;
  std::vector<double> data;  // [time][component][cell]
  double sup_norm = 0.0;

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= std::size_t(shape[a]);
    return n;
  }
  const double* component(std::size_t m, int axis) const {
    return data.data() + (m * std::size_t(dim) + std::size_t(axis)) * cell_count();
  }
  double* component(std::size_t m, int axis) {
    return data.data() + (m * std::size_t(dim) + std::size_t(axis)) * cell_count();
  }
  bool admissible(double tol = 1e-6) const { return sup_norm <= 1.0 + tol; }
  bool same_grid(const SpaceTimeField& field) const;
  void refresh_sup_norm();
};

struct SolverConfig {
  double dt = 0.0;           // time step; caller default: h/4
  int inner_iters = 1200;    // primal-dual iteration budget per step
  double primal_step = 0.0;  // 0 = auto: h/(2 sqrt(N))
  double dual_step = 0.0;    // 0 = auto: h/(2 sqrt(N))
  double tolerance = 2e-4;   // relative primal-dual residual target
  double epsilon = 1e-3;     // regularized cross-check parameter

  void validate(int dim, double h) const;
};

// One implicit Euler step of the total variation flow: u_next minimizes
// ||Dv|| + (1/2dt) ||v - u_prev||^2 via a primal-dual iteration; z is the
// final dual iterate projected onto the unit ball.
struct RofStepResult {
  std::vector<double> u;               // next slice
  std::vector<double> z;               // [component][cell]
  double residual = 0.0;               // relative primal-dual gap at exit
  int iterations = 0;
  bool converged = false;              // tolerance reached within the budget
  double objective_prev = 0.0;         // functional at u_prev
  double objective_next = 0.0;         // functional at u_next
};

RofStepResult rof_step(const SpaceTimeField& grid_like, const std::vector<double>& u_prev,
                       const SolverConfig& cfg,
                       const std::vector<double>* warm_dual = nullptr);

// Chains rof_step: times {t0, t0+dt, ..., t0+steps*dt}. The dual trajectory
// carries zeros at the initial stamp and the step dual at each later stamp.
struct EvolveResult {
  SpaceTimeField field;
  DualField dual;
  std::vector<RofStepResult> certificates;  // u/z payloads cleared, stats kept
};

EvolveResult evolve(const SpaceTimeField& grid_like, const std::vector<double>& initial,
                    int steps, const SolverConfig& cfg, double t0 = 0.0);

// Semi-implicit (lagged diffusivity) step of the epsilon-regularized flow;
// cross-checks rof_step on smooth regions. Enforces dt <= h*epsilon/4.
std::vector<double> regularized_step(const SpaceTimeField& grid_like,
                                     const std::vector<double>& u_prev, double dt,
                                     double epsilon);

// r[m] = (u[m]-u[m-1])/(t_m - t_{m-1}) - div z[m] on interior cells for every
// stamp m >= 1; boundary cells and the initial stamp carry zeros.
struct ResidualStats {
  double max_abs = 0.0;
  double median_abs = 0.0;
  double mean_abs = 0.0;
};

SpaceTimeField residual_div_z(const SpaceTimeField& field, const DualField& z);
ResidualStats residual_stats(const SpaceTimeField& residual, int margin_cells,
                             double inner_radius = 0.0, double outer_radius = 0.0);

// TVZ1 companion format: same header as TVF1 with magic "TVZ1"; payload has N
// components interleaved per cell, slice-by-slice.
void write_dual(const DualField& z, const std::string& path);
DualField read_dual(const std::string& path);

}  // namespace tvlab
