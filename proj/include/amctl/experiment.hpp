#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "amctl/solver.hpp"

namespace amctl {

enum class SweepMode { stochastic, deterministic };

struct SweepConfig {
  SpectralModel model;
  int steps = 1000;
  std::vector<double> mu_list;  // strictly decreasing, positive
  int paths = 1;                // forced to 1 in deterministic mode
  SteeringTarget target;
  SweepMode mode = SweepMode::stochastic;
  std::uint64_t seed = 0;
  SolveOptions solve;
  GrowthEnvelope envelope;      // used for the K_u bound column
  // mu levels of the linear decay precondition, strictly decreasing
  std::vector<double> ac_mu_list = {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

  void validate() const;
};

struct SweepRow {
  double mu = 0.0;
  double mean_err = 0.0;     // E||x(c) - x_c||^2
  double stderr_err = 0.0;
  double mean_u2 = 0.0;      // E (1/c) int ||u||^2
  int failures = 0;
  // Bound diagnostics.
  double mean_max_u2 = 0.0;  // E sup_sigma ||u(sigma)||^2
  double stderr_max_u2 = 0.0;
  double radius = 0.0;       // max over paths of sup_sigma ||x(sigma)||^2
  double Ku = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // mu descending
  std::uint64_t seed = 0;
  int steps = 0;
  int paths = 0;
  std::string model_hash;
  bool linear_ac_passed = false;

  // Strictly decreasing mean error and final <= 0.1 * initial.
  bool error_decays() const;
  // mean_max_u2 <= Ku + 3 stderr on every row.
  bool control_bound_holds() const;
  // linear_ac_passed, control bound, and error_decays() unless every mean
  // error is already below 1e-20 (trivial models).
  bool accepted() const;
};

// x_c = mean + loading .* W(c) along the path.
SpectralField realize_target(const SteeringTarget& target, const QWienerPath& path);

// Monte Carlo mu-sweep. Paths are sampled from independent substreams
// (seed, path index), shared across mu levels. Per-path failures are
// counted; throws NumericalError only if every path fails at some mu.
SweepReport run_sweep(const SweepConfig& config, Execution exec = Execution::parallel);

struct GammaStudyConfig {
  SweepConfig base;  // mu_list must hold exactly one value
  std::vector<double> gamma_list;  // absolute times, strictly decreasing in (0, c)
};

struct GammaRow {
  double gamma = 0.0;
  double snapped_gamma = 0.0;
  double mean_distance = 0.0;  // E sup_sigma ||x_gamma - x*||
  double stderr_distance = 0.0;
  int failures = 0;
};

struct GammaStudyReport {
  std::vector<GammaRow> rows;
  std::uint64_t seed = 0;
  std::string model_hash;
  bool distances_nonincreasing() const;
};

GammaStudyReport run_gamma_study(const GammaStudyConfig& config,
                                 Execution exec = Execution::parallel);

// Stable 64-bit FNV-1a digest of the model data, as 16 hex digits.
std::string model_hash(const SpectralModel& model);

void write_sweep_csv(std::ostream& out, const SweepReport& report);
void write_sweep_bounds_csv(std::ostream& out, const SweepReport& report);
void write_sweep_svg(std::ostream& out, const SweepReport& report);
void write_gamma_csv(std::ostream& out, const GammaStudyReport& report);

}  // namespace amctl
