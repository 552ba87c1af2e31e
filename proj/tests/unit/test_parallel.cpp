#include <doctest.h>

#include <omp.h>

#include "amctl/experiment.hpp"

using namespace amctl;

// The OpenMP kernels must reproduce the serial reference bit for bit.
TEST_CASE("parallel kernels match the serial reference") {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  const SpectralModel model = example_model(6, 1.0, MemoryKernel::exponential(1, 1));
  const TimeGrid grid(1.0, 300);
  CHECK(build_table(model, grid, Execution::serial).values() ==
        build_table(model, grid, Execution::parallel).values());

  SpectralField mean = SpectralField::LinSpaced(6, 1.0, 0.2);
  const SweepConfig cfg{model, 150, {1.0, 0.01}, 6, SteeringTarget::affine(mean, 0.5, 1),
                        SweepMode::stochastic, 5, SolveOptions{}, GrowthEnvelope::example_safe(6)};
  const SweepReport s = run_sweep(cfg, Execution::serial);
  const SweepReport p = run_sweep(cfg, Execution::parallel);
  REQUIRE(s.rows.size() == p.rows.size());
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    CHECK(s.rows[i].mean_err == p.rows[i].mean_err);
    CHECK(s.rows[i].stderr_err == p.rows[i].stderr_err);
    CHECK(s.rows[i].mean_u2 == p.rows[i].mean_u2);
    CHECK(s.rows[i].Ku == p.rows[i].Ku);
  }

  SweepConfig g = cfg;
  g.mu_list = {0.01};
  const GammaStudyReport gs = run_gamma_study({g, {0.4, 0.2}}, Execution::serial);
  const GammaStudyReport gp = run_gamma_study({g, {0.4, 0.2}}, Execution::parallel);
  for (std::size_t i = 0; i < gs.rows.size(); ++i) CHECK(gs.rows[i].mean_distance == gp.rows[i].mean_distance);
  omp_set_num_threads(saved);
}
