#include "amctl/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "amctl/csv.hpp"
#include "amctl/philox.hpp"
#include "amctl/version.hpp"

namespace amctl {

namespace {

std::ostream* logger(const RunContext& ctx) { return ctx.quiet ? nullptr : ctx.log; }

template <typename Writer>
void write_file(RunContext& ctx, const std::string& name, Writer&& writer) {
  const std::filesystem::path path = ctx.out_dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  writer(out);
  out.close();
  if (!out) throw ConfigError("error while writing " + path.string());
  ctx.outputs.push_back(name);
}

std::uint64_t seed_of(const Config& config) {
  return static_cast<std::uint64_t>(config.get_int("experiment", "seed", 0));
}

}  // namespace

int cmd_resolvent(const Config& config, RunContext& ctx) {
  const SpectralModel model = build_model(config);
  const TimeGrid grid(model.horizon(), build_steps(config));
  const ResolventTable table = build_table(model, grid);
  const AxiomReport report = check_axioms(table);
  write_file(ctx, "resolvent.csv", [&](std::ostream& o) { write_table_csv(o, table); });
  write_file(ctx, "axioms.csv", [&](std::ostream& o) { write_axiom_report_csv(o, report); });
  if (std::ostream* log = logger(ctx)) {
    *log << "identity residual  " << report.identity_residual << "\n"
         << "scaled residual    " << report.scaled_residual << " (limit "
         << AxiomReport::kScaledResidualLimit << ")\n"
         << "gamma_hat          " << report.gamma_hat << "\n"
         << "bound M, beta      " << report.bound_M << ", " << report.bound_beta << "\n";
  }
  return report.passed() ? kExitOk : kExitAcceptance;
}

int cmd_gramian(const Config& config, RunContext& ctx) {
  const SpectralModel model = build_model(config);
  const TimeGrid grid(model.horizon(), build_steps(config));
  const ResolventTable table = build_table(model, grid);
  const Gramian gramian = assemble_gramian(table, model.control());
  const std::vector<double> mu = build_sweep_config(config).ac_mu_list;

  // Unit probes plus four Gaussian probes from a stream no sweep path uses.
  std::vector<SpectralField> probes;
  const int n = model.dim();
  for (int i = 0; i < n; ++i) probes.push_back(SpectralField::Unit(n, i));
  for (std::uint32_t p = 0; p < 4; ++p) {
    SpectralField v(n);
    for (int i = 0; i < n; ++i) {
      v(i) = philox_normal(seed_of(config), ~std::uint64_t{0} - p, static_cast<std::uint32_t>(i), 0);
    }
    probes.push_back(v);
  }
  const DecayReport decay = linear_ac_test(gramian, mu, probes);
  write_file(ctx, "gramian.csv", [&](std::ostream& o) { write_gramian_csv(o, gramian); });
  write_file(ctx, "decay.csv", [&](std::ostream& o) { write_decay_csv(o, decay); });
  if (std::ostream* log = logger(ctx)) {
    *log << "lambda_min         " << gramian.min_eigenvalue() << "\n"
         << "symmetry defect    " << gramian.symmetry_defect() << "\n"
         << "decay test         " << (decay.passed() ? "pass" : "fail") << "\n";
  }
  return decay.passed() && gramian.is_psd() ? kExitOk : kExitAcceptance;
}

int cmd_sweep(const Config& config, RunContext& ctx) {
  const SweepReport report = run_sweep(build_sweep_config(config));
  write_file(ctx, "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, report); });
  write_file(ctx, "sweep_bounds.csv", [&](std::ostream& o) { write_sweep_bounds_csv(o, report); });
  if (config.get_bool("output", "svg", false)) {
    write_file(ctx, "sweep.svg", [&](std::ostream& o) { write_sweep_svg(o, report); });
  }
  if (std::ostream* log = logger(ctx)) {
    for (const SweepRow& r : report.rows) {
      *log << "mu " << r.mu << "  err " << r.mean_err << " +- " << r.stderr_err << "  u2 "
           << r.mean_u2 << "  failures " << r.failures << "\n";
    }
    *log << "linear test " << (report.linear_ac_passed ? "pass" : "fail") << ", decay "
         << (report.error_decays() ? "yes" : "no") << ", control bound "
         << (report.control_bound_holds() ? "holds" : "violated") << "\n";
  }
  return report.accepted() ? kExitOk : kExitAcceptance;
}

int cmd_gamma(const Config& config, RunContext& ctx) {
  const GammaStudyReport report = run_gamma_study(build_gamma_config(config));
  write_file(ctx, "gamma.csv", [&](std::ostream& o) { write_gamma_csv(o, report); });
  if (std::ostream* log = logger(ctx)) {
    for (const GammaRow& r : report.rows) {
      *log << "gamma " << r.snapped_gamma << "  distance " << r.mean_distance << " +- "
           << r.stderr_distance << "  failures " << r.failures << "\n";
    }
  }
  return report.distances_nonincreasing() ? kExitOk : kExitAcceptance;
}

int cmd_feasibility(const Config& config, RunContext& ctx) {
  const SpectralModel model = build_model(config);
  const GrowthEnvelope envelope = build_envelope(config, model);
  const SteeringTarget target = build_target(config, model);
  const double mu = config.get_real("experiment", "mu_fixed", 1e-2);
  if (!(mu > 0.0)) throw ConfigError(config.where("experiment", "mu_fixed") + ": experiment.mu_fixed must be positive");
  const double r = config.get_real("experiment", "radius", 1.0);
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw ConfigError(config.where("experiment", "radius") + ": experiment.radius must be positive");
  }
  const TimeGrid grid(model.horizon(), build_steps(config));
  const double M = build_table(model, grid).bound_M();
  const double Ku = eval_Ku({target, mu}, model, envelope, r, M);
  const FeasibilityResult result = feasibility_check(model, envelope, Ku, r, M);
  write_file(ctx, "feasibility.csv", [&](std::ostream& o) {
    CsvWriter csv(o);
    csv.row("r", "mu", "M", "Ku", "lhs", "feasible");
    csv.row(r, mu, M, Ku, result.lhs, result.feasible ? 1 : 0);
  });
  if (std::ostream* log = logger(ctx)) {
    *log << "lhs = " << CsvWriter::format(result.lhs) << "\nr   = " << CsvWriter::format(r)
         << "\n" << (result.feasible ? "feasible" : "not feasible") << "\n";
  }
  return result.feasible ? kExitOk : kExitAcceptance;
}

namespace {

void write_manifest(const std::string& name, const Config& config, RunContext& ctx, int code) {
  nlohmann::ordered_json m;
  m["program"] = "amctl";
  m["version"] = kVersion;
  m["subcommand"] = name;
  m["config_source"] = config.source();
  m["config_hash"] = config.hash();
  m["seed"] = seed_of(config);
  m["exit_code"] = code;
  m["rng"] = {{"name", Philox4x32::kName}, {"version", Philox4x32::kVersion}};
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
#ifdef _OPENMP
  m["openmp"] = _OPENMP;
#endif
#if defined(__clang__)
  m["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  m["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  m["outputs"] = ctx.outputs;
  std::ofstream out(ctx.out_dir / "manifest.json");
  out << m.dump(2) << "\n";
}

}  // namespace

int run_command(const std::string& name, const Config& config, RunContext& ctx, std::ostream& err) {
  int code = kExitOk;
  try {
    std::filesystem::create_directories(ctx.out_dir);
    if (name == "resolvent") {
      code = cmd_resolvent(config, ctx);
    } else if (name == "gramian") {
      code = cmd_gramian(config, ctx);
    } else if (name == "sweep") {
      code = cmd_sweep(config, ctx);
    } else if (name == "gamma") {
      code = cmd_gamma(config, ctx);
    } else if (name == "feasibility") {
      code = cmd_feasibility(config, ctx);
    } else {
      throw ConfigError("unknown subcommand '" + name + "'");
    }
    write_file(ctx, "config.txt", [&](std::ostream& o) { o << config.serialize(); });
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const StructuralError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    code = kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (code == kExitAcceptance) err << name << ": acceptance property does not hold\n";
  try {
    write_manifest(name, config, ctx, code);
  } catch (const std::exception& e) {
    err << "io error: " << e.what() << "\n";
  }
  return code;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Approximate controllability experiments for spectral Galerkin models"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  for (const char* name : {"resolvent", "gramian", "sweep", "gamma", "feasibility"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_flag("--quiet", quiet, "suppress summaries");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  Config config;
  try {
    config = Config::load(config_path);
    if (seed) config.set("experiment", "seed", static_cast<std::int64_t>(*seed));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  RunContext ctx;
  ctx.out_dir = out_dir.empty() ? config.get_string("output", "directory", "out") : out_dir;
  ctx.quiet = quiet;
  ctx.log = &std::cout;
  return run_command(name, config, ctx, std::cerr);
}

}  // namespace amctl
