#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tvlab {

using Vec3 = std::array<double, 3>;

// Axis-aligned spatial box; axes beyond dim are ignored.
struct Box {
  int dim = 2;
  Vec3 lo{};
  Vec3 hi{};
};

struct Ball {
  Vec3 center{};
  double radius = 0.0;
};

enum class TimeOrientation { Backward, Forward };

// Intrinsic space-time cylinder: ball of radius rho around `center`, paired
// with a time window of length theta*rho. Backward windows end at the vertex
// time, forward windows start there.
struct Cylinder {
  Vec3 center{};
  double vertex_time = 0.0;
  double radius = 0.0;
  double theta = 1.0;
  TimeOrientation orientation = TimeOrientation::Backward;

  double time_extent() const { return theta * radius; }
  double t_begin() const {
    return orientation == TimeOrientation::Backward ? vertex_time - time_extent()
                                                    : vertex_time;
  }
  double t_end() const {
    return orientation == TimeOrientation::Backward ? vertex_time
                                                    : vertex_time + time_extent();
  }
  Ball ball() const { return Ball{center, radius}; }
};

struct OscillationData {
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double omega = 0.0;
};

// Scalar samples on a uniform grid of cell centers, one slice per time stamp.
// Data is row-major within a slice (last axis fastest), slice-by-slice.
// Cell centers sit at origin + index*h; `origin` is the center of cell (0,..,0),
// offset h/2 from the box corner so no center ever lands on a coordinate axis
// crossing used by singular examples.
class SpaceTimeField {
 public:
  int dim = 2;
  double spacing = 0.0;
  Vec3 origin{};
  std::array<int, 3> shape{1, 1, 1};
  std::vector<double> times;
  std::vector<double> data;

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= std::size_t(shape[a]);
    return n;
  }
  std::size_t slice_count() const { return times.size(); }

  double value(std::size_t m, std::size_t cell) const {
    return data[m * cell_count() + cell];
  }
  double& value(std::size_t m, std::size_t cell) {
    return data[m * cell_count() + cell];
  }
  const double* slice(std::size_t m) const { return data.data() + m * cell_count(); }
  double* slice(std::size_t m) { return data.data() + m * cell_count(); }

  Vec3 cell_center(std::size_t flat) const;
  std::array<int, 3> cell_index(std::size_t flat) const;
  std::size_t flat_index(const std::array<int, 3>& idx) const;

  // Spatial box spanned by the cells (corner-to-corner).
  Box bounding_box() const;

  // Throws on violated invariants (finite data, increasing times, extents >= 2).
  void validate() const;

  // Index of the stamp equal to t (rel. tol), or -1.
  int find_time(double t) const;

  bool same_grid(const SpaceTimeField& other) const;
};

// Samples f(x,t) at every cell center / stamp. Box extents must be integer
// multiples of h (1e-12 relative); non-finite samples are rejected with the
// offending coordinate in the message.
SpaceTimeField sample_analytic(const std::function<double(const Vec3&, double)>& f,
                               const Box& box, double h,
                               const std::vector<double>& times);

// Exact max/min over samples whose center lies in the cylinder's ball and
// whose stamp falls in its closed time window. Errors on empty intersections.
OscillationData ess_osc(const SpaceTimeField& field, const Cylinder& cyl);

// Flat indices of cells whose center lies strictly inside the ball.
std::vector<std::size_t> cells_in_ball(const SpaceTimeField& field, const Ball& ball);

// True if every in-ball cell has `margin` whole cells between it and the grid
// edge along every axis (forward/backward stencils need neighbors).
bool ball_has_margin(const SpaceTimeField& field, const Ball& ball, int margin);

// Indices of stamps inside [t0, t1] (closed, rel. tol). If require_endpoints,
// both window ends must be stamps; otherwise errors list what is missing.
std::vector<std::size_t> stamps_in_window(const SpaceTimeField& field, double t0,
                                          double t1, bool require_endpoints);

// TVF1 binary format (little-endian): magic, u32 dim, dim x u32 shape,
// f64 spacing, dim x f64 origin, u32 time count, times, payload.
void write_field(const SpaceTimeField& field, const std::string& path);
SpaceTimeField read_field(const std::string& path);

// Volume of the unit ball in dimension N (1, 2 or 3).
double unit_ball_volume(int dim);

}  // namespace tvlab
