// End-to-end checks of the command line tool: exit codes, file outputs and
// byte-identical reruns. Takes the binary path as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int failures = 0;
std::string tvlab_bin;
fs::path work;

void record(const std::string& name, bool ok, const std::string& detail = "") {
  std::printf("[%s] %s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  if (!ok) ++failures;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  fs::path out = work / "cmd_output.txt";
  std::string cmd = tvlab_bin + " " + args + " > " + out.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  RunResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  std::ifstream is(out);
  std::stringstream ss;
  ss << is.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_config(const fs::path& p, int steps, const std::string& out_dir) {
  std::ofstream os(p);
  os << R"({
  "grid": {"dim": 2, "h": 0.03125, "box_half": 1.0},
  "initial": {"type": "random_bumps", "count": 4, "amplitude": 0.5,
              "width_min": 0.15, "width_max": 0.3, "seed": 11},
  "solver": {"steps": )"
     << steps << R"(, "inner_iters": 700, "tolerance": 3e-4},
  "io": {"out": ")"
     << out_dir << R"(", "write_dual": true}
})";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: test_cli <tvlab-binary>\n";
    return 2;
  }
  tvlab_bin = argv[1];
  work = fs::temp_directory_path() / "tvlab_cli_test";
  fs::remove_all(work);
  fs::create_directories(work);

  // --- simulate: happy path, determinism, validation error
  fs::path cfg = work / "run.json";
  write_config(cfg, 10, (work / "run_a").string());
  auto sim = run("simulate --config " + cfg.string());
  record("simulate exits 0", sim.exit_code == 0, sim.output.substr(0, 60));
  record("simulate writes field/dual/manifest",
         fs::exists(work / "run_a/field.tvf1") && fs::exists(work / "run_a/dual.tvz1") &&
             fs::exists(work / "run_a/manifest.json"));

  auto rerun = run("simulate --config " + cfg.string() + " --out " + (work / "run_b").string());
  record("rerun exits 0", rerun.exit_code == 0);
  record("rerun is byte identical",
         slurp(work / "run_a/field.tvf1") == slurp(work / "run_b/field.tvf1") &&
             slurp(work / "run_a/dual.tvz1") == slurp(work / "run_b/dual.tvz1"));

  fs::path bad_cfg = work / "bad.json";
  write_config(bad_cfg, 0, (work / "run_c").string());
  auto bad = run("simulate --config " + bad_cfg.string());
  record("steps=0 config rejected with exit 1", bad.exit_code == 1,
         bad.output.substr(0, 60));

  // --- example materialization + tv + indicator on it
  fs::path step_field = work / "step.tvf1";
  auto ex = run("example --name step --spacing 0.001953125 --box-half 0.3125 "
                "--times 0.25,0.375,0.4375,0.46875,0.484375,0.5 --out " +
                step_field.string());
  record("example writes a field file", ex.exit_code == 0 && fs::exists(step_field));

  auto tv = run("tv --field " + step_field.string() +
                " --center 0,0 --radius 0.25 --time-index 0");
  record("tv reports primal and dual", tv.exit_code == 0 &&
                                           tv.output.find("primal") != std::string::npos &&
                                           tv.output.find("dual_lower") != std::string::npos);

  auto ind = run("indicator --field " + step_field.string() +
                 " --point 0,0,0.5 --rhos 0.25,0.125,0.0625 --out " +
                 (work / "ind").string());
  record("indicator writes csv and json", ind.exit_code == 0 &&
                                              fs::exists(work / "ind/indicator.csv") &&
                                              fs::exists(work / "ind/indicator.json"));
  {
    std::string csv = slurp(work / "ind/indicator.csv");
    record("indicator csv has the documented header",
           csv.rfind("rho,indicator,log_rho,log_indicator", 0) == 0);
  }

  // constant field: all-zero indicator, exit 0
  fs::path flat_field = work / "flat.tvf1";
  run("example --name disc_solution --disc-value 0 --spacing 0.03125 --box-half 1 "
      "--times 0,0.25,0.375,0.5 --out " +
      flat_field.string());
  auto flat_ind = run("indicator --field " + flat_field.string() +
                      " --point 0,0,0.5 --rhos 0.25,0.125 --out " +
                      (work / "flat_ind").string());
  {
    std::string csv = slurp(work / "flat_ind/indicator.csv");
    record("constant-field indicator is zero with exit 0",
           flat_ind.exit_code == 0 && csv.find("0.25,0,") != std::string::npos);
  }

  // --- degiorgi iterate: exact critical ratio in the report
  auto dgi = run("degiorgi iterate --N 2 --gamma 2 --Y0 at-critical --steps 20");
  record("iterate reports the exact critical ratio",
         dgi.exit_code == 0 && dgi.output.find("0.0009765625") != std::string::npos);

  // --- certify energy on the simulated run: pass at gamma 2, fail at tiny gamma
  fs::path run_field = work / "run_a/field.tvf1";
  auto cert = run("certify energy --field " + run_field.string() +
                  " --gamma 2 --suite 40 --seed 7 --out " + (work / "energy.json").string());
  record("energy certificate passes at gamma 2", cert.exit_code == 0,
         cert.output.substr(0, 40));
  {
    std::string j = slurp(work / "energy.json");
    record("energy report carries hash/seed/draws",
           j.find("field_hash") != std::string::npos &&
               j.find("\"seed\": 7") != std::string::npos &&
               j.find("draws") != std::string::npos);
  }
  auto cert_fail = run("certify energy --field " + run_field.string() +
                       " --gamma 0.0001 --suite 40 --seed 7 --tolerance 1e-6");
  record("energy certificate fails at tiny gamma with exit 2", cert_fail.exit_code == 2);

  // certify onelap on the run pair
  auto onelap = run("certify onelap --field " + run_field.string() + " --dual " +
                    (work / "run_a/dual.tvz1").string() + " --suite 25 --seed 11");
  record("flow-pair certificate passes", onelap.exit_code == 0);

  // certify minimizer on the stationary example
  auto cmin = run("certify minimizer --example u2 --spacing 0.015625 --box-half 0.375 "
                  "--suite 20 --seed 7");
  record("minimizer certificate passes on u2", cmin.exit_code == 0);

  // --- cascade on the step field: verdict failure -> exit 2
  auto casc = run("cascade --field " + step_field.string() +
                  " --point 0,0,0.5 --rho0 0.25 --mode empirical --xi 0.125");
  record("jump cascade reports failure with exit 2", casc.exit_code == 2,
         casc.output.substr(0, 40));

  // --- supbound on the solver field
  auto sup = run("supbound --field " + run_field.string() +
                 " --point 0.1,0.1,0.0390625 --t 0.0625 --rho 0.1 --r 3");
  record("supbound reports a finite ratio", sup.exit_code == 0 &&
                                                sup.output.find("ratio") != std::string::npos);

  // --- io errors surface as exit 1
  auto missing = run("tv --field /nonexistent.tvf1 --center 0,0 --radius 0.2 --time-index 0");
  record("missing file exits 1", missing.exit_code == 1);

  std::printf("%s (%d failures)\n", failures == 0 ? "CLI OK" : "CLI FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
