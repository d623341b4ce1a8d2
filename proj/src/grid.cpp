#include "tvlab/grid.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tvlab/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "TVF1 I/O assumes a little-endian host");

namespace tvlab {

namespace {

std::string format_point(const Vec3& x, int dim, double t) {
  std::ostringstream os;
  os << "(";
  for (int a = 0; a < dim; ++a) os << (a ? ", " : "") << x[a];
  os << "; t=" << t << ")";
  return os.str();
}

double time_tol(double a, double b) {
  return 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

Vec3 SpaceTimeField::cell_center(std::size_t flat) const {
  auto idx = cell_index(flat);
  Vec3 x = origin;
  for (int a = 0; a < dim; ++a) x[a] += idx[a] * spacing;
  return x;
}

std::array<int, 3> SpaceTimeField::cell_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = int(flat % std::size_t(shape[a]));
    flat /= std::size_t(shape[a]);
  }
  return idx;
}

std::size_t SpaceTimeField::flat_index(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * std::size_t(shape[a]) + std::size_t(idx[a]);
  return flat;
}

Box SpaceTimeField::bounding_box() const {
  Box b;
  b.dim = dim;
  for (int a = 0; a < dim; ++a) {
    b.lo[a] = origin[a] - 0.5 * spacing;
    b.hi[a] = origin[a] + (shape[a] - 0.5) * spacing;
  }
  return b;
}

void SpaceTimeField::validate() const {
  if (dim < 1 || dim > 3)
    throw Error(ErrorCode::BadHeader, "dimension must be 1, 2 or 3");
  if (!(spacing > 0.0)) throw Error(ErrorCode::BadHeader, "spacing must be positive");
  for (int a = 0; a < dim; ++a)
    if (shape[a] < 2)
      throw Error(ErrorCode::BadHeader, "shape extent < 2 on axis " + std::to_string(a));
  if (times.empty()) throw Error(ErrorCode::BadHeader, "no time stamps");
  for (std::size_t m = 1; m < times.size(); ++m)
    if (!(times[m] > times[m - 1]))
      throw Error(ErrorCode::NonIncreasingTimes,
                  "times[" + std::to_string(m) + "] <= times[" + std::to_string(m - 1) + "]");
  if (data.size() != cell_count() * times.size())
    throw Error(ErrorCode::TruncatedPayload,
                "payload has " + std::to_string(data.size()) + " samples, expected " +
                    std::to_string(cell_count() * times.size()));
  for (double v : data)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteSample, "non-finite sample");
}

int SpaceTimeField::find_time(double t) const {
  for (std::size_t m = 0; m < times.size(); ++m)
    if (std::abs(times[m] - t) <= time_tol(times[m], t)) return int(m);
  return -1;
}

bool SpaceTimeField::same_grid(const SpaceTimeField& other) const {
  if (dim != other.dim || shape != other.shape) return false;
  if (std::abs(spacing - other.spacing) > 1e-12 * spacing) return false;
  for (int a = 0; a < dim; ++a)
    if (std::abs(origin[a] - other.origin[a]) > 1e-12 * std::max(1.0, std::abs(origin[a])))
      return false;
  if (times.size() != other.times.size()) return false;
  for (std::size_t m = 0; m < times.size(); ++m)
    if (std::abs(times[m] - other.times[m]) > time_tol(times[m], other.times[m]))
      return false;
  return true;
}

SpaceTimeField sample_analytic(const std::function<double(const Vec3&, double)>& f,
                               const Box& box, double h,
                               const std::vector<double>& times) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be positive");
  SpaceTimeField field;
  field.dim = box.dim;
  field.spacing = h;
  for (int a = 0; a < box.dim; ++a) {
    double extent = box.hi[a] - box.lo[a];
    double cells = extent / h;
    double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-12 * std::max(1.0, cells))
      throw Error(ErrorCode::InvalidArgument,
                  "box extent on axis " + std::to_string(a) + " is not a multiple of h");
    field.shape[a] = int(rounded);
    field.origin[a] = box.lo[a] + 0.5 * h;
  }
  field.times = times;
  field.data.resize(field.cell_count() * times.size());
  const std::size_t cells = field.cell_count();
  for (std::size_t m = 0; m < times.size(); ++m) {
    for (std::size_t c = 0; c < cells; ++c) {
      Vec3 x = field.cell_center(c);
      double v = f(x, times[m]);
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonFiniteSample,
                    "f not finite at " + format_point(x, field.dim, times[m]));
      field.value(m, c) = v;
    }
  }
  field.validate();
  return field;
}

std::vector<std::size_t> cells_in_ball(const SpaceTimeField& field, const Ball& ball) {
  std::vector<std::size_t> out;
  const std::size_t cells = field.cell_count();
  const double r2 = ball.radius * ball.radius;
  for (std::size_t c = 0; c < cells; ++c) {
    Vec3 x = field.cell_center(c);
    double d2 = 0.0;
    for (int a = 0; a < field.dim; ++a) {
      double d = x[a] - ball.center[a];
      d2 += d * d;
    }
    if (d2 < r2) out.push_back(c);
  }
  return out;
}

bool ball_has_margin(const SpaceTimeField& field, const Ball& ball, int margin) {
  Box b = field.bounding_box();
  for (int a = 0; a < field.dim; ++a) {
    if (ball.center[a] - ball.radius < b.lo[a] + margin * field.spacing) return false;
    if (ball.center[a] + ball.radius > b.hi[a] - margin * field.spacing) return false;
  }
  return true;
}

std::vector<std::size_t> stamps_in_window(const SpaceTimeField& field, double t0,
                                          double t1, bool require_endpoints) {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < field.times.size(); ++m) {
    double t = field.times[m];
    if (t >= t0 - time_tol(t, t0) && t <= t1 + time_tol(t, t1)) out.push_back(m);
  }
  if (require_endpoints) {
    std::string missing;
    if (out.empty() || std::abs(field.times[out.front()] - t0) > time_tol(t0, t0))
      missing += " t=" + std::to_string(t0);
    if (out.empty() || std::abs(field.times[out.back()] - t1) > time_tol(t1, t1))
      missing += " t=" + std::to_string(t1);
    if (!missing.empty())
      throw Error(ErrorCode::MissingTimeSlices, "window stamps missing:" + missing);
  }
  return out;
}

OscillationData ess_osc(const SpaceTimeField& field, const Cylinder& cyl) {
  auto cells = cells_in_ball(field, cyl.ball());
  auto stamps = stamps_in_window(field, cyl.t_begin(), cyl.t_end(), false);
  if (cells.empty() || stamps.empty()) {
    std::ostringstream os;
    os << "cylinder at " << format_point(cyl.center, field.dim, cyl.vertex_time)
       << " rho=" << cyl.radius << " theta=" << cyl.theta
       << " has no samples in the field";
    throw Error(ErrorCode::EmptyIntersection, os.str());
  }
  double lo = field.value(stamps[0], cells[0]);
  double hi = lo;
  for (std::size_t m : stamps) {
    const double* u = field.slice(m);
    for (std::size_t c : cells) {
      double v = u[c];
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  return OscillationData{hi, lo, hi - lo};
}

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 3.14159265358979323846;
    case 3: return 4.18879020478639098462;  // 4*pi/3
    default: throw Error(ErrorCode::InvalidArgument, "dimension must be 1, 2 or 3");
  }
}

namespace {

constexpr char kFieldMagic[4] = {'T', 'V', 'F', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}
std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4))
    throw Error(ErrorCode::TruncatedPayload, "file ends inside header");
  return v;
}
double get_f64(std::istream& is) {
  double v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 8))
    throw Error(ErrorCode::TruncatedPayload, "file ends inside header");
  return v;
}

}  // namespace

void write_field(const SpaceTimeField& field, const std::string& path) {
  field.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  os.write(kFieldMagic, 4);
  put_u32(os, std::uint32_t(field.dim));
  for (int a = 0; a < field.dim; ++a) put_u32(os, std::uint32_t(field.shape[a]));
  put_f64(os, field.spacing);
  for (int a = 0; a < field.dim; ++a) put_f64(os, field.origin[a]);
  put_u32(os, std::uint32_t(field.times.size()));
  for (double t : field.times) put_f64(os, t);
  os.write(reinterpret_cast<const char*>(field.data.data()),
           std::streamsize(field.data.size() * sizeof(double)));
  if (!os) throw Error(ErrorCode::Io, "short write to " + path);
}

SpaceTimeField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  char magic[4] = {};
  if (!is.read(magic, 4)) throw Error(ErrorCode::TruncatedPayload, "file shorter than magic");
  if (std::memcmp(magic, kFieldMagic, 4) != 0)
    throw Error(ErrorCode::BadMagic, std::string("bad magic \"") + std::string(magic, 4) +
                                         "\" in " + path);
  SpaceTimeField field;
  std::uint32_t dim = get_u32(is);
  if (dim < 1 || dim > 3)
    throw Error(ErrorCode::BadHeader, "dim " + std::to_string(dim) + " out of range");
  field.dim = int(dim);
  for (int a = 0; a < field.dim; ++a) {
    std::uint32_t n = get_u32(is);
    if (n < 2) throw Error(ErrorCode::BadHeader, "shape extent < 2");
    field.shape[a] = int(n);
  }
  field.spacing = get_f64(is);
  if (!(field.spacing > 0.0)) throw Error(ErrorCode::BadHeader, "non-positive spacing");
  for (int a = 0; a < field.dim; ++a) field.origin[a] = get_f64(is);
  std::uint32_t nt = get_u32(is);
  if (nt == 0) throw Error(ErrorCode::BadHeader, "zero time stamps");
  field.times.resize(nt);
  for (auto& t : field.times) t = get_f64(is);
  for (std::size_t m = 1; m < field.times.size(); ++m)
    if (!(field.times[m] > field.times[m - 1]))
      throw Error(ErrorCode::NonIncreasingTimes, "non-increasing time stamps in " + path);
  field.data.resize(field.cell_count() * nt);
  if (!is.read(reinterpret_cast<char*>(field.data.data()),
               std::streamsize(field.data.size() * sizeof(double))))
    throw Error(ErrorCode::TruncatedPayload, "payload shorter than header promises in " + path);
  field.validate();
  return field;
}

}  // namespace tvlab
