#include <doctest.h>

#include <cmath>
#include <sstream>

#include "amctl/experiment.hpp"

using namespace amctl;

namespace {

SpectralModel scalar_linear() {
  return SpectralModel({-1.0}, MemoryKernel::zero(), ControlOperatorSpec(), QWienerSpec({1.0}),
                       NonlinearitySpec::zero(), 1.0);
}

SweepConfig example_sweep(int paths, int steps) {
  const SpectralModel model = example_model(4, 1.0, MemoryKernel::exponential(1, 1));
  SpectralField mean(4);
  mean << 1, 0.5, 1.0 / 3, 0.25;
  return SweepConfig{model, steps, {1.0, 0.1, 0.01}, paths, SteeringTarget::affine(mean, 0.5, 1),
                     SweepMode::stochastic, 17, SolveOptions{}, GrowthEnvelope::example_safe(4)};
}

}  // namespace

TEST_CASE("trivial sweep has zero error") {
  const SpectralModel model = example_model(3, 1.0, MemoryKernel::exponential(1, 1))
                                  .with_nonlinearity(NonlinearitySpec::zero());
  const SweepConfig cfg{model, 100, {1.0, 0.1, 0.01}, 4, SteeringTarget::deterministic(SpectralField::Zero(3)),
                        SweepMode::stochastic, 1, SolveOptions{}, GrowthEnvelope::zero()};
  const SweepReport rep = run_sweep(cfg);
  REQUIRE(rep.rows.size() == 3);
  for (const SweepRow& r : rep.rows) {
    CHECK(r.mean_err == 0.0);
    CHECK(r.mean_u2 == 0.0);
    CHECK(r.failures == 0);
  }
  CHECK(rep.accepted());
  CHECK_FALSE(rep.error_decays());
}

TEST_CASE("linear scalar sweep matches the closed form") {
  const SweepConfig cfg{scalar_linear(), 2000, {1.0, 0.1, 0.01, 0.001}, 1,
                        SteeringTarget::deterministic(SpectralField::Ones(1)), SweepMode::deterministic, 0,
                        SolveOptions{}, GrowthEnvelope::zero()};
  const SweepReport rep = run_sweep(cfg);
  const double delta = (1 - std::exp(-2.0)) / 2;
  for (const SweepRow& r : rep.rows) {
    CHECK(std::abs(r.mean_err - std::pow(r.mu / (r.mu + delta), 2)) <= 1e-4);
  }
  CHECK(rep.error_decays());
}

TEST_CASE("realized targets") {
  const TimeGrid grid(1.0, 20);
  const QWienerSpec q = QWienerSpec::inverse_square(2);
  const QWienerPath path = sample_path(q, grid, 3, 0);
  SpectralField a(2);
  a << 0.7, -0.2;
  CHECK(realize_target(SteeringTarget::affine(a, 0.0, 1), path) == a);
  const SpectralField w = realize_target(SteeringTarget::affine(SpectralField::Zero(2), 1.0, 1), path);
  CHECK(w(0) == doctest::Approx(path.value(20)(0)).epsilon(1e-14));
  CHECK(w(1) == 0.0);

  const int n = 10000;
  double s1 = 0, s2 = 0;
  for (int p = 0; p < n; ++p) {
    const double v = realize_target(SteeringTarget::affine(a, 2.0, 1), sample_path(q, grid, 4, p))(0);
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / n;
  CHECK(std::abs(mean - 0.7) <= 3 * std::sqrt((s2 / n - mean * mean) / n));
}

TEST_CASE("deterministic mode is the small-noise limit") {
  SweepConfig det = example_sweep(1, 200);
  det.mode = SweepMode::deterministic;
  SweepConfig sto = example_sweep(2, 200);
  sto.model = sto.model.with_noise(QWienerSpec(std::vector<double>(4, 1e-16)));
  const SweepReport a = run_sweep(det);
  const SweepReport b = run_sweep(sto);
  CHECK(a.paths == 1);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(std::abs(a.rows[i].mean_err - b.rows[i].mean_err) <= 1e-6);
  }
}

TEST_CASE("report invariants and writers") {
  const SweepReport rep = run_sweep(example_sweep(6, 200));
  REQUIRE(rep.rows.size() == 3);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].mu < rep.rows[i - 1].mu);
  for (const SweepRow& r : rep.rows) CHECK(r.failures <= rep.paths);
  CHECK(rep.linear_ac_passed);
  CHECK(rep.model_hash.size() == 16);

  std::ostringstream csv, bounds, svg;
  write_sweep_csv(csv, rep);
  write_sweep_bounds_csv(bounds, rep);
  write_sweep_svg(svg, rep);
  CHECK(csv.str().rfind("mu,mean_err,stderr,mean_u2,failures\n", 0) == 0);
  CHECK(bounds.str().rfind("mu,mean_max_u2,stderr_max_u2,Ku,radius\n", 0) == 0);
  CHECK(svg.str().find("<polyline") != std::string::npos);
}

TEST_CASE("configuration checks") {
  SweepConfig cfg = example_sweep(2, 100);
  cfg.mu_list = {0.1, 1.0};
  CHECK_THROWS_AS(run_sweep(cfg), StructuralError);
  cfg = example_sweep(0, 100);
  CHECK_THROWS_AS(run_sweep(cfg), StructuralError);
  cfg = example_sweep(2, 100);
  cfg.target = SteeringTarget::deterministic(SpectralField::Zero(3));
  CHECK_THROWS_AS(run_sweep(cfg), StructuralError);
}

TEST_CASE("sweep aborts only when every path fails") {
  SweepConfig cfg = example_sweep(3, 100);
  cfg.solve.max_iter = 1;
  CHECK_THROWS_AS(run_sweep(cfg), NumericalError);
}

TEST_CASE("gamma study") {
  SweepConfig base = example_sweep(3, 200);
  base.mu_list = {0.01};
  const GammaStudyReport one = run_gamma_study({base, {0.3}});
  CHECK(one.rows.size() == 1);
  CHECK(one.rows[0].snapped_gamma == doctest::Approx(0.3));

  NonlinearitySpec constant;
  constant.f = ScalarMap::custom([](double s, double) { return s; }, "s");
  SweepConfig flat = base;
  flat.model = base.model.with_nonlinearity(constant);
  const GammaStudyReport rep = run_gamma_study({flat, {0.4, 0.2, 0.1}});
  for (const GammaRow& r : rep.rows) CHECK(r.mean_distance <= 1e-12);
  CHECK(rep.distances_nonincreasing());

  base.mu_list = {0.1, 0.01};
  CHECK_THROWS_AS(run_gamma_study({base, {0.3}}), StructuralError);
}

TEST_CASE("model hash") {
  const SpectralModel a = example_model(4, 1.0, MemoryKernel::exponential(1, 1));
  CHECK(model_hash(a) == model_hash(example_model(4, 1.0, MemoryKernel::exponential(1, 1))));
  CHECK(model_hash(a) != model_hash(example_model(4, 1.0, MemoryKernel::exponential(1, 2))));
  CHECK(model_hash(a) != model_hash(a.with_nonlinearity(NonlinearitySpec::zero())));
}
