#pragma once

#include <vector>

#include "tvlab/grid.hpp"

namespace tvlab {

struct Cutoff;  // certify.hpp

// Primal TV estimate with a certified dual lower bound. The gap is the
// convergence diagnostic: dual_lower <= primal up to rounding, always.
struct TVSlice {
  double primal = 0.0;
  double dual_lower = 0.0;
  double gap = 0.0;
};

struct DualAscentOptions {
  int iterations = 500;
  double step_factor = 0.9;  // step = factor * h / (2 sqrt(N))
};

enum class LevelDirection { Below, Above };

struct LevelSet {
  double level = 0.0;
  LevelDirection direction = LevelDirection::Below;
  double measure = 0.0;  // cell volume sum, units h^N
};

// h^N-weighted sum of forward-difference gradient norms over in-ball cells,
// plus a dual bound from projected ascent on admissible |phi| <= 1 fields
// supported in the ball. Requires a one-cell margin around the ball.
TVSlice tv_slice(const SpaceTimeField& field, std::size_t m, const Ball& ball,
                 const DualAscentOptions& opts = {});

// Trapezoidal time quadrature of the slice TV over the cylinder's window.
// Both window endpoints must be stamps of the field.
double tv_time_integral(const SpaceTimeField& field, const Cylinder& cyl,
                        const DualAscentOptions& opts = {});

// h^N times the count of in-ball cells strictly below/above the level; ties
// are excluded from both directions.
LevelSet level_set_measure(const SpaceTimeField& field, std::size_t m, const Ball& ball,
                           double level, LevelDirection direction);

// Parabolic embedding ratio
//   [iint (u zeta)^((N+2)/N)] / [(int ||D(u zeta)|| dt) * (sup_t int (u zeta)^2)^(1/N)]
// over the cylinder; 0/0 reported as 0. Input must be nonnegative there.
double embedding_ratio(const SpaceTimeField& field, const Cutoff& cutoff,
                       const Cylinder& cyl);

// [(l-k) * |[u<k] cap B|] / [rho * TV(u over the k<u<l transition band)].
// A cell is in the band when its forward stencil values straddle (k, l).
// Requires |[u>l] cap B| >= |B|/4 (discrete volumes).
double isoperimetric_ratio(const SpaceTimeField& field, std::size_t m, const Ball& ball,
                           double k, double l);

}  // namespace tvlab
