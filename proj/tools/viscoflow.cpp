#include <cstdio>
#include <exception>
#include <limits>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "viscoflow/cli.hpp"
#include "viscoflow/verify.hpp"

namespace vf = viscoflow;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

struct RunFlags {
  std::string case_name = "reservoir";
  std::string model;
  std::string init = "stokes";
  std::vector<double> rect;
  std::vector<double> force;
  std::vector<std::string> dirichlet;
  std::vector<std::string> stress_free;
  double p = 0, mu = 0, tau_s = 0, gamma = 0;
  bool no_projection = false;
  bool no_vtk = false, no_csv = false, no_json = false, no_svg = false;
};

vf::RunConfig to_config(const RunFlags& f, vf::RunConfig c, const CLI::App& app) {
  c.kind = vf::parse_case(f.case_name);
  c.params = vf::default_params(c.kind);
  if (app.count("--model")) c.params.law = vf::parse_law(f.model);
  if (app.count("--p")) c.params.p = f.p;
  if (app.count("--mu")) c.params.mu = f.mu;
  if (app.count("--tau-s")) c.params.tau_s = f.tau_s;
  if (app.count("--gamma")) c.params.gamma = f.gamma;
  if (c.params.law == vf::Law::Casson) c.params.p = 2.0;
  c.ssn.init = vf::parse_init(f.init);
  c.ssn.use_projection = !f.no_projection;
  c.outputs = {!f.no_vtk, !f.no_csv, !f.no_json, !f.no_svg};

  if (!f.rect.empty()) c.custom.rect = vf::Rect{f.rect[0], f.rect[2], f.rect[1], f.rect[3]};
  if (!f.force.empty()) c.custom.force = Eigen::Vector2d(f.force[0], f.force[1]);
  for (const std::string& item : f.dirichlet) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw vf::UsageError("--dirichlet expects TAG:ux,uy, got '" + item + "'");
    c.custom.dirichlet[vf::parse_boundary_tag(item.substr(0, colon))] = vf::parse_vector(item.substr(colon + 1));
  }
  for (const std::string& tag : f.stress_free) c.custom.stress_free.push_back(vf::parse_boundary_tag(tag));
  if (c.kind != vf::CaseKind::Custom &&
      (app.count("--rect") || app.count("--force") || app.count("--dirichlet") || app.count("--stress-free") ||
       app.count("--ny")))
    throw vf::UsageError("mesh and data flags are only valid with --case custom");
  return c;
}

int tap(int& counter, bool ok, const std::string& name, const std::string& detail) {
  ++counter;
  std::printf("%s %d - %s # %s\n", ok ? "ok" : "not ok", counter, name.c_str(), detail.c_str());
  std::fflush(stdout);
  return ok ? 0 : 1;
}

int run_verify(std::uint64_t seed) {
  int n = 0, failures = 0;
  std::printf("1..12\n");
  char buf[160];

  const std::vector<double> gammas{1.0, 1e3, 1e6};
  const auto huber = vf::huber_property_suite(100000, gammas, seed);
  std::snprintf(buf, sizeof buf, "violations %lld, worst excess %.3e", static_cast<long long>(huber.violations),
                huber.worst_excess);
  failures += tap(n, huber.passed(), "huber magnitude is gamma-Lipschitz", buf);
  const auto huber_mutant = vf::huber_property_suite(10000, gammas, seed, 0.5);
  std::snprintf(buf, sizeof buf, "%lld violations", static_cast<long long>(huber_mutant.violations));
  failures += tap(n, !huber_mutant.passed(), "huber suite rejects a halved Lipschitz constant", buf);

  double worst_pairing = std::numeric_limits<double>::infinity();
  bool mono_ok = true;
  for (double p : {1.6, 1.75, 2.0, 4.0}) {
    vf::Params params;
    params.p = p;
    params.tau_s = 1.0;
    const auto r = vf::monotonicity_suite(8, params, 1000, seed);
    worst_pairing = std::min(worst_pairing, r.min_pairing);
    mono_ok = mono_ok && r.passed();
  }
  std::snprintf(buf, sizeof buf, "min pairing %.3e", worst_pairing);
  failures += tap(n, mono_ok, "regularized operator is monotone", buf);
  {
    vf::Params params;
    params.p = 1.6;
    params.tau_s = 1.0;
    const auto r = vf::monotonicity_suite(8, params, 100, seed, -1.0);
    std::snprintf(buf, sizeof buf, "min pairing %.3e", r.min_pairing);
    failures += tap(n, !r.passed(), "monotonicity suite rejects the negated operator", buf);
  }

  struct FdCase {
    const char* name;
    vf::Law law;
    double p;
  };
  vf::Params fd_params;
  fd_params.tau_s = 1.0;
  fd_params.gamma = 10.0;
  for (const FdCase& fc : {FdCase{"hb p=1.75", vf::Law::HerschelBulkley, 1.75},
                           FdCase{"hb p=2", vf::Law::HerschelBulkley, 2.0},
                           FdCase{"hb p=4", vf::Law::HerschelBulkley, 4.0},
                           FdCase{"carreau p=1.75", vf::Law::CarreauYield, 1.75},
                           FdCase{"casson", vf::Law::Casson, 2.0}}) {
    vf::Params params = fd_params;
    params.law = fc.law;
    params.p = fc.p;
    const auto r = vf::fd_jacobian_check(4, params, seed);
    std::snprintf(buf, sizeof buf, "max relative error %.3e over %lld entries", r.max_relative_error,
                  static_cast<long long>(r.entries_compared));
    failures += tap(n, r.max_relative_error <= 1e-5, std::string("jacobian matches differences, ") + fc.name, buf);
  }
  {
    vf::Params params = fd_params;
    params.p = 1.75;
    vf::FdCheckOptions corrupt;
    corrupt.theta_block_scale = 1.01;
    const auto r = vf::fd_jacobian_check(2, params, seed, corrupt);
    std::snprintf(buf, sizeof buf, "max relative error %.3e", r.max_relative_error);
    failures += tap(n, r.max_relative_error > 1e-3, "difference check flags a corrupted block", buf);
  }

  const auto mms = vf::stokes_mms_convergence({8, 16, 32});
  std::snprintf(buf, sizeof buf, "velocity rates %.3f %.3f", mms.velocity_rates[0], mms.velocity_rates[1]);
  failures += tap(n, mms.passed(), "stokes limit converges at first order", buf);
  const auto mms_mutant = vf::stokes_mms_convergence({8, 16, 32}, 1.5);
  std::snprintf(buf, sizeof buf, "velocity rates %.3f %.3f", mms_mutant.velocity_rates[0],
                mms_mutant.velocity_rates[1]);
  failures += tap(n, !mms_mutant.passed(), "convergence study rejects a scaled load", buf);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semismooth Newton solver for regularized viscoplastic flow"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "key = value file; run flags go under a [run] section");

  RunFlags flags;
  vf::RunConfig config;
  CLI::App* run = app.add_subcommand("run", "solve a benchmark or custom case");
  run->add_option("--case", flags.case_name, "reservoir, cavity, channel or custom")->capture_default_str();
  run->add_option("--nx", config.nx, "cells per side (per unit length for the channel)")->capture_default_str();
  run->add_option("--model", flags.model, "hb, carreau or casson");
  run->add_option("--p", flags.p, "flow index");
  run->add_option("--mu", flags.mu, "model constant");
  run->add_option("--tau-s", flags.tau_s, "yield stress");
  run->add_option("--gamma", flags.gamma, "regularization parameter");
  run->add_option("--tol", config.ssn.tol, "relative residual tolerance")->capture_default_str();
  run->add_option("--max-iters", config.ssn.max_iters, "iteration cap")->capture_default_str();
  run->add_flag("--no-projection", flags.no_projection, "skip the projection of the multiplier");
  run->add_option("--init", flags.init, "stokes or zero")->capture_default_str();
  run->add_option("--out", config.out_dir, "output directory")->capture_default_str();
  run->add_flag("--no-vtk", flags.no_vtk, "skip solution.vtk");
  run->add_flag("--no-csv", flags.no_csv, "skip residuals.csv");
  run->add_flag("--no-json", flags.no_json, "skip stats.json");
  run->add_flag("--no-svg", flags.no_svg, "skip residuals.svg");
  run->add_option("--channel-length", config.channel.length, "channel length")->capture_default_str();
  run->add_option("--channel-half-height", config.channel.half_height, "channel half-height")->capture_default_str();
  run->add_option("--channel-ratio", config.channel.ratio, "half-width of the contraction over the channel half-height")
      ->capture_default_str();
  run->add_option("--rect", flags.rect, "custom mesh bounds x0,x1,y0,y1")->delimiter(',')->expected(4);
  run->add_option("--ny", config.custom.ny, "custom mesh cells in y (default nx)");
  run->add_option("--force", flags.force, "constant load fx,fy")->delimiter(',')->expected(2);
  run->add_option("--dirichlet", flags.dirichlet, "boundary velocity TAG:ux,uy (repeatable)");
  run->add_option("--stress-free", flags.stress_free, "stress-free boundary TAG (repeatable)");

  std::uint64_t seed = 20240601;
  CLI::App* verify = app.add_subcommand("verify", "run the built-in property and convergence checks (TAP)");
  verify->add_option("--seed", seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*verify) return run_verify(seed);
    const vf::RunConfig full = to_config(flags, config, *run);
    return vf::run(full, std::cout) == 0 ? kExitConverged : kExitNotConverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
