// tvlab: simulate the total variation flow and run its continuity diagnostics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tvlab/certify.hpp"
#include "tvlab/continuity.hpp"
#include "tvlab/error.hpp"
#include "tvlab/examples.hpp"
#include "tvlab/flow.hpp"
#include "tvlab/grid.hpp"
#include "tvlab/rng.hpp"
#include "tvlab/tvmeasure.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

std::string hash_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return hex64(fnv1a(buf.str()));
}

Vec3 parse_point_spatial(const std::string& spec, int dim, double& t) {
  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  if (int(vals.size()) != dim + 1)
    throw Error(ErrorCode::InvalidArgument,
                "--point needs " + std::to_string(dim) + " coordinates plus a time");
  Vec3 x{};
  for (int a = 0; a < dim; ++a) x[a] = vals[std::size_t(a)];
  t = vals.back();
  return x;
}

std::vector<double> parse_csv_list(const std::string& spec) {
  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  return vals;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string());
  os << text;
}

void emit(const json& j, const std::string& out_path) {
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
}

// ---------------------------------------------------------------------------
// simulate

struct RunConfig {
  int dim = 2;
  double h = 1.0 / 64.0;
  double box_half = 1.0;
  std::string initial_type = "random_bumps";
  std::string example_name = "u2";
  int bump_count = 6;
  double bump_amplitude = 0.5;
  double bump_width_min = 0.1;
  double bump_width_max = 0.3;
  std::uint64_t initial_seed = 42;
  double disc_radius = 0.5;
  double disc_value = 1.0;
  double disc_edge_width = 0.0;
  SolverConfig solver;
  int steps = 32;
  std::string out_dir = "tvlab_run";
  bool write_dual_file = true;
  json echo;
};

double require_positive(const json& j, const std::string& path, double v) {
  if (!(v > 0.0)) throw Error(ErrorCode::InvalidConfig, path + " must be positive");
  (void)j;
  return v;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open config " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config parse: ") + e.what());
  }
  RunConfig cfg;
  cfg.echo = j;
  const json& grid = j.contains("grid") ? j.at("grid") : json::object();
  cfg.dim = grid.value("dim", 2);
  if (cfg.dim < 1 || cfg.dim > 3)
    throw Error(ErrorCode::InvalidConfig, "grid.dim must be 1, 2 or 3");
  cfg.h = require_positive(j, "grid.h", grid.value("h", 1.0 / 64.0));
  cfg.box_half = require_positive(j, "grid.box_half", grid.value("box_half", 1.0));

  const json& initial = j.contains("initial") ? j.at("initial") : json::object();
  cfg.initial_type = initial.value("type", "random_bumps");
  if (cfg.initial_type == "random_bumps") {
    cfg.bump_count = initial.value("count", 6);
    if (cfg.bump_count < 1)
      throw Error(ErrorCode::InvalidConfig, "initial.count must be >= 1");
    cfg.bump_amplitude = initial.value("amplitude", 0.5);
    cfg.bump_width_min = initial.value("width_min", 0.1);
    cfg.bump_width_max = initial.value("width_max", 0.3);
    if (!(cfg.bump_width_min > 0.0) || !(cfg.bump_width_max >= cfg.bump_width_min))
      throw Error(ErrorCode::InvalidConfig, "initial.width_min/width_max malformed");
    cfg.initial_seed = initial.value("seed", std::uint64_t(42));
  } else if (cfg.initial_type == "disc") {
    cfg.disc_radius = require_positive(j, "initial.radius", initial.value("radius", 0.5));
    cfg.disc_value = initial.value("value", 1.0);
    cfg.disc_edge_width = initial.value("edge_width", 0.0);
  } else if (cfg.initial_type == "example") {
    cfg.example_name = initial.value("name", "u2");
  } else {
    throw Error(ErrorCode::InvalidConfig, "initial.type must be random_bumps, disc or example");
  }

  const json& solver = j.contains("solver") ? j.at("solver") : json::object();
  cfg.steps = solver.value("steps", 32);
  if (cfg.steps < 1) throw Error(ErrorCode::InvalidConfig, "solver.steps must be >= 1");
  cfg.solver.dt = solver.value("dt", 0.0);
  if (cfg.solver.dt == 0.0) cfg.solver.dt = cfg.h / 4.0;
  require_positive(j, "solver.dt", cfg.solver.dt);
  cfg.solver.inner_iters = solver.value("inner_iters", 600);
  cfg.solver.tolerance = solver.value("tolerance", 1e-5);
  cfg.solver.primal_step = solver.value("primal_step", 0.0);
  cfg.solver.dual_step = solver.value("dual_step", 0.0);
  cfg.solver.epsilon = solver.value("epsilon", 1e-3);
  cfg.solver.validate(cfg.dim, cfg.h);

  const json& io = j.contains("io") ? j.at("io") : json::object();
  cfg.out_dir = io.value("out", std::string("tvlab_run"));
  cfg.write_dual_file = io.value("write_dual", true);
  return cfg;
}

SpaceTimeField initial_field(const RunConfig& cfg) {
  Box box;
  box.dim = cfg.dim;
  for (int a = 0; a < cfg.dim; ++a) {
    box.lo[a] = -cfg.box_half;
    box.hi[a] = cfg.box_half;
  }
  if (cfg.initial_type == "example") {
    AnalyticExample ex = make_example(cfg.example_name);
    if (ex.dim != cfg.dim)
      throw Error(ErrorCode::InvalidConfig, "example dimension differs from grid.dim");
    return sample_analytic(ex.value, box, cfg.h, {0.0});
  }
  if (cfg.initial_type == "disc") {
    ExampleParams params;
    params.disc_radius = cfg.disc_radius;
    params.disc_value = cfg.disc_value;
    params.disc_edge_width = cfg.disc_edge_width;
    AnalyticExample ex = make_example("disc_solution", params);
    return sample_analytic(ex.value, box, cfg.h, {0.0});
  }
  // random smooth bumps
  Rng rng(cfg.initial_seed);
  struct BumpSpec {
    Vec3 c;
    double w, a;
  };
  std::vector<BumpSpec> bumps;
  for (int i = 0; i < cfg.bump_count; ++i) {
    BumpSpec b{};
    for (int a = 0; a < cfg.dim; ++a)
      b.c[a] = rng.uniform(-0.6, 0.6) * cfg.box_half;
    b.w = rng.uniform(cfg.bump_width_min, cfg.bump_width_max);
    b.a = rng.uniform(-cfg.bump_amplitude, cfg.bump_amplitude);
    bumps.push_back(b);
  }
  auto f = [&](const Vec3& x, double) {
    double acc = 0.0;
    for (const auto& b : bumps) {
      double r2 = 0.0;
      for (int a = 0; a < cfg.dim; ++a) {
        double d = x[a] - b.c[a];
        r2 += d * d;
      }
      acc += b.a * std::exp(-r2 / (b.w * b.w));
    }
    return acc;
  };
  return sample_analytic(f, box, cfg.h, {0.0});
}

int cmd_simulate(const std::string& config_path, const std::string& out_override) {
  RunConfig cfg = load_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  fs::create_directories(cfg.out_dir);

  SpaceTimeField init = initial_field(cfg);
  std::vector<double> u0(init.slice(0), init.slice(0) + init.cell_count());
  EvolveResult run = evolve(init, u0, cfg.steps, cfg.solver);

  fs::path field_path = fs::path(cfg.out_dir) / "field.tvf1";
  write_field(run.field, field_path.string());
  fs::path dual_path;
  if (cfg.write_dual_file) {
    dual_path = fs::path(cfg.out_dir) / "dual.tvz1";
    write_dual(run.dual, dual_path.string());
  }

  json manifest;
  manifest["config"] = cfg.echo;
  manifest["config_hash"] = hex64(fnv1a(cfg.echo.dump()));
  manifest["formats"] = {{"field", "TVF1"}, {"dual", "TVZ1"}};
  manifest["files"]["field"] = field_path.filename().string();
  if (cfg.write_dual_file) manifest["files"]["dual"] = dual_path.filename().string();
  json steps = json::array();
  for (std::size_t s = 0; s < run.certificates.size(); ++s) {
    const auto& c = run.certificates[s];
    steps.push_back({{"step", s + 1},
                     {"objective_prev", c.objective_prev},
                     {"objective_next", c.objective_next},
                     {"descent", c.objective_next <= c.objective_prev + cfg.solver.tolerance},
                     {"residual", c.residual},
                     {"iterations", c.iterations},
                     {"converged", c.converged}});
  }
  manifest["steps"] = steps;
  write_text(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "wrote " << field_path.string();
  if (cfg.write_dual_file) std::cout << " and " << dual_path.string();
  std::cout << " (" << cfg.steps << " steps)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

json draw_json(const EnergyDraw& d) {
  json j;
  j["center"] = {d.center[0], d.center[1], d.center[2]};
  j["rho"] = d.rho;
  j["t_begin"] = d.t_begin;
  j["t_end"] = d.t_end;
  j["level"] = d.level;
  j["sign"] = d.sign == TruncationSign::Plus ? "plus" : "minus";
  j["slack"] = d.budget.slack;
  j["gamma_needed"] = std::isfinite(d.gamma_needed) ? json(d.gamma_needed) : json("inf");
  return j;
}

int cmd_certify_energy(const std::string& field_path, double gamma, int count,
                       std::uint64_t seed, double tol_override, const std::string& out) {
  SpaceTimeField field = read_field(field_path);
  double dt = field.times.size() > 1 ? field.times[1] - field.times[0] : field.spacing;
  double tol = tol_override > 0.0 ? tol_override : consistency_tolerance(field.spacing, dt);
  EnergySuiteReport report = dg_energy_suite(field, gamma, count, seed, tol);
  json j;
  j["suite"] = "energy";
  j["field"] = field_path;
  j["field_hash"] = hash_file(field_path);
  j["seed"] = seed;
  j["gamma"] = gamma;
  j["count"] = count;
  j["tolerance"] = tol;
  j["min_slack"] = report.min_slack;
  j["fitted_gamma"] = std::isfinite(report.fitted_gamma) ? json(report.fitted_gamma)
                                                         : json("inf");
  j["violations"] = report.violations;
  j["verdict"] = report.pass ? "pass" : "fail";
  json draws = json::array();
  for (const auto& d : report.draws) draws.push_back(draw_json(d));
  j["draws"] = draws;
  emit(j, out);
  return report.pass ? kExitOk : kExitFail;
}

int cmd_certify_minimizer(const std::string& field_path, const std::string& example_name,
                          double h, double box_half, int count, std::uint64_t seed,
                          bool stationary, const std::string& out) {
  SpaceTimeField field;
  SpaceTimeField ut;
  std::string source;
  if (!example_name.empty()) {
    AnalyticExample ex = make_example(example_name);
    double span = 4.0 * h;
    field = materialize(ex, box_half, h, {0.0, span / 2.0, span});
    ut = field;
    std::fill(ut.data.begin(), ut.data.end(), 0.0);
    if (ex.time_derivative) {
      for (std::size_t m = 0; m < field.times.size(); ++m)
        for (std::size_t c = 0; c < field.cell_count(); ++c)
          ut.value(m, c) = ex.time_derivative(field.cell_center(c), field.times[m]);
    }
    source = example_name;
  } else {
    field = read_field(field_path);
    ut = field;
    std::fill(ut.data.begin(), ut.data.end(), 0.0);
    if (!stationary) {
      for (std::size_t m = 1; m < field.times.size(); ++m) {
        double dt = field.times[m] - field.times[m - 1];
        for (std::size_t c = 0; c < field.cell_count(); ++c)
          ut.value(m, c) = (field.value(m, c) - field.value(m - 1, c)) / dt;
      }
    }
    source = field_path;
  }
  Box box = field.bounding_box();
  double half = 0.5 * (box.hi[0] - box.lo[0]);
  Ball ball{{0.5 * (box.lo[0] + box.hi[0]), 0.5 * (box.lo[1] + box.hi[1]),
             0.5 * (box.lo[2] + box.hi[2])},
            half - 6.0 * field.spacing};
  double t0 = field.times.front();
  double t1 = field.times.back();
  double dt = field.times.size() > 1 ? field.times[1] - field.times[0] : field.spacing;
  double tol = consistency_tolerance(field.spacing, dt);
  MinimizerSuiteReport report =
      minimizer_suite(field, ut, ball, t0, t1, count, seed, tol);
  json j;
  j["suite"] = "minimizer";
  j["source"] = source;
  j["seed"] = seed;
  j["count"] = count;
  j["tolerance"] = tol;
  j["min_gap"] = report.min_gap;
  j["violations"] = report.violations;
  j["verdict"] = report.pass ? "pass" : "fail";
  json draws = json::array();
  for (const auto& d : report.draws)
    draws.push_back({{"center", {d.center[0], d.center[1], d.center[2]}},
                     {"width", d.width},
                     {"amplitude", d.amplitude},
                     {"smoothing", d.smoothing},
                     {"gap", d.gap}});
  j["draws"] = draws;
  emit(j, out);
  return report.pass ? kExitOk : kExitFail;
}

int cmd_certify_onelap(const std::string& field_path, const std::string& dual_path,
                       int count, std::uint64_t seed, const std::string& out) {
  SpaceTimeField field = read_field(field_path);
  DualField z = read_dual(dual_path);
  double dt = field.times.size() > 1 ? field.times[1] - field.times[0] : field.spacing;
  double tol = consistency_tolerance(field.spacing, dt);
  OneLapSuiteReport report = one_laplacian_suite(field, z, count, seed, tol);
  json j;
  j["suite"] = "onelap";
  j["field"] = field_path;
  j["field_hash"] = hash_file(field_path);
  j["dual_hash"] = hash_file(dual_path);
  j["seed"] = seed;
  j["count"] = count;
  j["tolerance"] = tol;
  j["min_slack"] = report.min_slack;
  j["violations"] = report.violations;
  j["verdict"] = report.pass ? "pass" : "fail";
  json draws = json::array();
  for (const auto& d : report.draws)
    draws.push_back({{"center", {d.center[0], d.center[1], d.center[2]}},
                     {"rho", d.rho},
                     {"t1", d.t1},
                     {"t2", d.t2},
                     {"level", d.level},
                     {"sign", d.sign == TruncationSign::Plus ? "plus" : "minus"},
                     {"slack", d.slack}});
  j["draws"] = draws;
  emit(j, out);
  return report.pass ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"total variation flow laboratory"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the flow solver from a JSON config");
  std::string sim_config, sim_out;
  sim->add_option("--config", sim_config, "config path")->required();
  sim->add_option("--out", sim_out, "output directory override");

  // tv
  auto* tv = app.add_subcommand("tv", "slice total variation with dual certificate");
  std::string tv_field, tv_center, tv_out;
  double tv_radius = 0.0, tv_time = 0.0;
  int tv_index = -1;
  tv->add_option("--field", tv_field)->required();
  tv->add_option("--center", tv_center, "comma separated ball center")->required();
  tv->add_option("--radius", tv_radius)->required();
  tv->add_option("--time-index", tv_index);
  tv->add_option("--time", tv_time);
  tv->add_option("--out", tv_out);

  // indicator
  auto* ind = app.add_subcommand("indicator", "point-continuity indicator curve");
  std::string ind_field, ind_point, ind_rhos, ind_out;
  ind->add_option("--field", ind_field)->required();
  ind->add_option("--point", ind_point, "x,y[,z],t")->required();
  ind->add_option("--rhos", ind_rhos, "strictly decreasing CSV ladder")->required();
  ind->add_option("--out", ind_out, "output directory")->required();

  // certify
  auto* certify = app.add_subcommand("certify", "inequality certifiers");
  certify->require_subcommand(1);
  auto* cmin = certify->add_subcommand("minimizer", "variational gap suite");
  std::string cmin_field, cmin_example, cmin_out;
  double cmin_h = 1.0 / 128.0, cmin_box = 0.4;
  int cmin_count = 50;
  std::uint64_t cmin_seed = 7;
  bool cmin_stationary = false;
  cmin->add_option("--field", cmin_field);
  cmin->add_option("--example", cmin_example, "u1|u2|step|disc_solution");
  cmin->add_option("--spacing", cmin_h);
  cmin->add_option("--box-half", cmin_box);
  cmin->add_option("--suite", cmin_count);
  cmin->add_option("--seed", cmin_seed);
  cmin->add_flag("--stationary", cmin_stationary, "treat the field as time independent");
  cmin->add_option("--out", cmin_out);

  auto* cen = certify->add_subcommand("energy", "truncation energy suite");
  std::string cen_field, cen_out;
  double cen_gamma = 2.0, cen_tol = 0.0;
  int cen_count = 100;
  std::uint64_t cen_seed = 7;
  cen->add_option("--field", cen_field)->required();
  cen->add_option("--gamma", cen_gamma);
  cen->add_option("--suite", cen_count);
  cen->add_option("--seed", cen_seed);
  cen->add_option("--tolerance", cen_tol, "override the consistency tolerance");
  cen->add_option("--out", cen_out);

  auto* cone = certify->add_subcommand("onelap", "flow-pair truncation certificate suite");
  std::string cone_field, cone_dual, cone_out;
  int cone_count = 50;
  std::uint64_t cone_seed = 7;
  cone->add_option("--field", cone_field)->required();
  cone->add_option("--dual", cone_dual)->required();
  cone->add_option("--suite", cone_count);
  cone->add_option("--seed", cone_seed);
  cone->add_option("--out", cone_out);

  // degiorgi
  auto* dg = app.add_subcommand("degiorgi", "iteration lemma tools");
  dg->require_subcommand(1);
  auto* dgi = dg->add_subcommand("iterate", "critical mass recursion");
  int dgi_N = 2, dgi_steps = 200;
  double dgi_gamma = 2.0;
  std::string dgi_y0 = "at-critical", dgi_out;
  dgi->add_option("--N", dgi_N);
  dgi->add_option("--gamma", dgi_gamma);
  dgi->add_option("--Y0", dgi_y0, "number | at-critical | 2x-critical");
  dgi->add_option("--steps", dgi_steps);
  dgi->add_option("--out", dgi_out);

  auto* dgl = dg->add_subcommand("lemma", "measure-to-pointwise check");
  std::string dgl_field, dgl_point, dgl_out, dgl_sign = "minus";
  double dgl_rho = 0.1, dgl_xi = 0.25, dgl_gamma = 2.0, dgl_nu = 0.0;
  dgl->add_option("--field", dgl_field)->required();
  dgl->add_option("--point", dgl_point)->required();
  dgl->add_option("--rho", dgl_rho)->required();
  dgl->add_option("--xi", dgl_xi);
  dgl->add_option("--gamma", dgl_gamma);
  dgl->add_option("--nu", dgl_nu, "empirical critical mass override");
  dgl->add_option("--sign", dgl_sign);
  dgl->add_option("--out", dgl_out);

  auto* dge = dg->add_subcommand("expansion", "time expansion of positivity check");
  std::string dge_field, dge_point, dge_out;
  double dge_rho = 0.1, dge_xi = 0.25, dge_gamma = 2.0, dge_delta_scale = 1.0;
  dge->add_option("--field", dge_field)->required();
  dge->add_option("--point", dge_point, "x,y[,z],s")->required();
  dge->add_option("--rho", dge_rho)->required();
  dge->add_option("--xi", dge_xi);
  dge->add_option("--gamma", dge_gamma);
  dge->add_option("--delta-scale", dge_delta_scale, "empirical relaxation of delta");
  dge->add_option("--out", dge_out);

  // cascade
  auto* casc = app.add_subcommand("cascade", "oscillation reduction cascade");
  std::string casc_field, casc_point, casc_mode = "empirical", casc_out;
  double casc_rho0 = 0.25, casc_xi = 0.125, casc_gamma = 2.0;
  casc->add_option("--field", casc_field)->required();
  casc->add_option("--point", casc_point)->required();
  casc->add_option("--rho0", casc_rho0)->required();
  casc->add_option("--mode", casc_mode, "paper|empirical");
  casc->add_option("--xi", casc_xi);
  casc->add_option("--gamma", casc_gamma);
  casc->add_option("--out", casc_out);

  // example
  auto* exm = app.add_subcommand("example", "materialize an analytic example field");
  std::string exm_name, exm_times = "0", exm_out_path;
  double exm_h = 1.0 / 128.0, exm_box = 0.4;
  double exm_disc_radius = 0.5, exm_disc_value = 1.0, exm_disc_edge = 0.0;
  exm->add_option("--name", exm_name)->required();
  exm->add_option("--spacing", exm_h);
  exm->add_option("--box-half", exm_box);
  exm->add_option("--times", exm_times, "CSV stamps");
  exm->add_option("--disc-radius", exm_disc_radius);
  exm->add_option("--disc-value", exm_disc_value);
  exm->add_option("--disc-edge", exm_disc_edge);
  exm->add_option("--out", exm_out_path, "TVF1 output path")->required();

  // supbound
  auto* sup = app.add_subcommand("supbound", "sup bound shape diagnostic");
  std::string sup_field, sup_point, sup_out;
  double sup_t = 0.0, sup_rho = 0.1, sup_r = 3.0;
  sup->add_option("--field", sup_field)->required();
  sup->add_option("--point", sup_point, "x,y[,z],s")->required();
  sup->add_option("--t", sup_t, "window end time")->required();
  sup->add_option("--rho", sup_rho)->required();
  sup->add_option("--r", sup_r);
  sup->add_option("--out", sup_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(sim_config, sim_out);

    if (*tv) {
      SpaceTimeField field = read_field(tv_field);
      double tdummy = 0.0;
      Vec3 center = parse_point_spatial(tv_center + ",0", field.dim, tdummy);
      std::size_t m = 0;
      if (tv_index >= 0)
        m = std::size_t(tv_index);
      else {
        int found = field.find_time(tv_time);
        if (found < 0) throw Error(ErrorCode::MissingTimeSlices, "--time is not a stamp");
        m = std::size_t(found);
      }
      TVSlice slice = tv_slice(field, m, Ball{center, tv_radius});
      json j{{"primal", slice.primal}, {"dual_lower", slice.dual_lower}, {"gap", slice.gap}};
      emit(j, tv_out);
      return kExitOk;
    }

    if (*ind) {
      SpaceTimeField field = read_field(ind_field);
      double t0 = 0.0;
      Vec3 point = parse_point_spatial(ind_point, field.dim, t0);
      std::vector<double> rhos = parse_csv_list(ind_rhos);
      IndicatorCurve curve = indicator(field, point, t0, rhos);
      fs::create_directories(ind_out);
      std::ostringstream csv;
      csv << "rho,indicator,log_rho,log_indicator\n";
      for (std::size_t i = 0; i < curve.rhos.size(); ++i) {
        csv << curve.rhos[i] << "," << curve.values[i] << ",";
        if (curve.values[i] > 0.0)
          csv << std::log(curve.rhos[i]) << "," << std::log(curve.values[i]);
        else
          csv << std::log(curve.rhos[i]) << ",";
        csv << "\n";
      }
      write_text(fs::path(ind_out) / "indicator.csv", csv.str());
      json j;
      j["point"] = {point[0], point[1], point[2]};
      j["t0"] = t0;
      j["slope"] = curve.slope;
      j["intercept"] = curve.intercept;
      j["fit_count"] = curve.fit_count;
      j["rhos"] = curve.rhos;
      j["values"] = curve.values;
      write_text(fs::path(ind_out) / "indicator.json", j.dump(2) + "\n");
      std::cout << "indicator slope " << curve.slope << " over " << curve.fit_count
                << " rungs\n";
      return kExitOk;
    }

    if (*cmin)
      return cmd_certify_minimizer(cmin_field, cmin_example, cmin_h, cmin_box, cmin_count,
                                   cmin_seed, cmin_stationary, cmin_out);
    if (*cen)
      return cmd_certify_energy(cen_field, cen_gamma, cen_count, cen_seed, cen_tol,
                                cen_out);
    if (*cone)
      return cmd_certify_onelap(cone_field, cone_dual, cone_count, cone_seed, cone_out);

    if (*dgi) {
      DeGiorgiConstants constants = degiorgi_nu(dgi_N, dgi_gamma);
      double y0 = 0.0;
      if (dgi_y0 == "at-critical")
        y0 = constants.nu;
      else if (dgi_y0 == "2x-critical")
        y0 = 2.0 * constants.nu;
      else
        y0 = std::stod(dgi_y0);
      YnSequence seq = iterate_Yn(y0, constants, dgi_steps);
      json j;
      j["N"] = constants.N;
      j["gamma"] = constants.gamma;
      j["b"] = constants.b;
      j["nu"] = constants.nu;
      j["Y0"] = y0;
      j["verdict"] = seq.verdict == YnVerdict::Converged   ? "converged"
                     : seq.verdict == YnVerdict::Diverged  ? "diverged"
                                                           : "undecided";
      j["stop_index"] = seq.stop_index;
      json ratios = json::array();
      for (std::size_t i = 1; i < seq.values.size() && i <= 24; ++i)
        if (seq.values[i - 1] > 0.0) ratios.push_back(seq.values[i] / seq.values[i - 1]);
      j["ratios"] = ratios;
      j["values_head"] = std::vector<double>(
          seq.values.begin(), seq.values.begin() + std::min<std::size_t>(seq.values.size(), 24));
      emit(j, dgi_out);
      return kExitOk;
    }

    if (*dgl) {
      SpaceTimeField field = read_field(dgl_field);
      double t0 = 0.0;
      Vec3 point = parse_point_spatial(dgl_point, field.dim, t0);
      TruncationSign sign =
          dgl_sign == "plus" ? TruncationSign::Plus : TruncationSign::Minus;
      Cylinder probe{point, t0, 2.0 * dgl_rho, 0.0, TimeOrientation::Backward};
      // oscillation data over the double cylinder at the intrinsic height
      OscillationData osc;
      {
        Cylinder osc_probe = probe;
        osc_probe.theta = 1.0;
        osc = ess_osc(field, osc_probe);
      }
      double theta = 2.0 * dgl_xi * osc.omega;
      LemmaReport report = degiorgi_lemma_check(field, point, t0, dgl_rho, dgl_xi, osc,
                                                sign, dgl_gamma, dgl_nu);
      json j;
      j["point"] = {point[0], point[1], point[2]};
      j["vertex_time"] = t0;
      j["rho"] = dgl_rho;
      j["xi"] = dgl_xi;
      j["theta"] = theta;
      j["omega"] = osc.omega;
      j["nu"] = report.nu;
      j["density"] = report.density;
      j["violations"] = report.violations;
      j["checked"] = report.checked;
      j["status"] = report.status == CheckStatus::Pass          ? "pass"
                    : report.status == CheckStatus::Fail        ? "fail"
                                                                : "not-applicable";
      emit(j, dgl_out);
      return report.status == CheckStatus::Fail ? kExitFail : kExitOk;
    }

    if (*dge) {
      SpaceTimeField field = read_field(dge_field);
      double s = 0.0;
      Vec3 point = parse_point_spatial(dge_point, field.dim, s);
      ExpansionConstants constants = expansion_constants(field.dim, dge_gamma);
      constants.delta *= dge_delta_scale;
      Cylinder probe{point, s, dge_rho, 1.0, TimeOrientation::Forward};
      OscillationData osc = ess_osc(field, probe);
      ExpansionReport report =
          expansion_check(field, point, s, dge_rho, dge_xi, osc, constants);
      json j;
      j["point"] = {point[0], point[1], point[2]};
      j["s"] = s;
      j["rho"] = dge_rho;
      j["xi"] = dge_xi;
      j["sigma"] = constants.sigma;
      j["epsilon"] = constants.epsilon;
      j["delta"] = constants.delta;
      j["hypothesis_measure"] = report.hypothesis_measure;
      j["required_initial"] = report.required_initial;
      j["required_later"] = report.required_later;
      j["times_checked"] = report.times_checked;
      if (report.first_failing_time) j["first_failing_time"] = *report.first_failing_time;
      j["status"] = report.status == CheckStatus::Pass          ? "pass"
                    : report.status == CheckStatus::Fail        ? "fail"
                                                                : "not-applicable";
      emit(j, dge_out);
      return report.status == CheckStatus::Fail ? kExitFail : kExitOk;
    }

    if (*casc) {
      SpaceTimeField field = read_field(casc_field);
      double t0 = 0.0;
      Vec3 point = parse_point_spatial(casc_point, field.dim, t0);
      CascadeMode mode = casc_mode == "paper" ? CascadeMode::Paper : CascadeMode::Empirical;
      CascadeState state =
          oscillation_cascade(field, point, t0, casc_rho0, mode, casc_gamma, casc_xi);
      json j;
      j["mode"] = casc_mode;
      j["xi"] = state.xi;
      j["eta"] = state.eta;
      j["normalization"] = state.normalization;
      j["all_within_bound"] = state.all_within_bound;
      j["fail_stage"] = state.fail_stage;
      j["decays"] = state.decays;
      json stages = json::array();
      for (const auto& s : state.stages)
        stages.push_back({{"rho", s.rho}, {"omega", s.omega}, {"within_bound", s.within_bound}});
      j["stages"] = stages;
      emit(j, casc_out);
      return state.all_within_bound ? kExitOk : kExitFail;
    }

    if (*exm) {
      ExampleParams params;
      params.disc_radius = exm_disc_radius;
      params.disc_value = exm_disc_value;
      params.disc_edge_width = exm_disc_edge;
      AnalyticExample ex = make_example(exm_name, params);
      std::vector<double> times = parse_csv_list(exm_times);
      SpaceTimeField field = materialize(ex, exm_box, exm_h, times);
      write_field(field, exm_out_path);
      std::cout << "wrote " << exm_out_path << " (" << field.cell_count() << " cells x "
                << field.times.size() << " stamps)\n";
      return kExitOk;
    }

    if (*sup) {
      SpaceTimeField field = read_field(sup_field);
      double s = 0.0;
      Vec3 point = parse_point_spatial(sup_point, field.dim, s);
      SupBoundReport report = sup_bound_check(field, point, s, sup_t, sup_rho, sup_r);
      json j;
      j["measured_sup"] = report.measured_sup;
      j["bound_shape"] = report.bound_shape;
      j["ratio"] = report.ratio;
      emit(j, sup_out);
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
