#include <doctest.h>

#include <cmath>
#include <sstream>

#include "amctl/solver.hpp"

using namespace amctl;

namespace {

SpectralModel scalar(NonlinearitySpec nl, double c = 1.0, MemoryKernel k = MemoryKernel::zero()) {
  return SpectralModel({-1.0}, k, ControlOperatorSpec(), QWienerSpec({1.0}), std::move(nl), c);
}

NonlinearitySpec only(Nonlinearity which, ScalarMap map) {
  NonlinearitySpec nl;
  (which == Nonlinearity::f ? nl.f : which == Nonlinearity::g ? nl.g : nl.zeta) = std::move(map);
  return nl;
}

}  // namespace

TEST_CASE("zero data gives the zero trajectory in one map") {
  const SpectralModel model = scalar(NonlinearitySpec::zero());
  const TimeGrid grid(1.0, 100);
  const SolveResult res = picard_solve(model, build_table(model, grid), nullptr, zero_path(1, grid), {});
  CHECK(res.iterations == 1);
  CHECK(res.trajectory.states.isZero(0));
  CHECK(res.control.size() == 0);
}

TEST_CASE("converged trajectory satisfies the mild equation") {
  const SpectralModel model =
      scalar(only(Nonlinearity::f, ScalarMap::custom([](double s, double v) { return std::sin(v) + s; }, "sin")));
  const TimeGrid grid(1.0, 400);
  const ResolventTable t = build_table(model, grid);
  SolveOptions o;
  o.tol = 1e-10;
  const SolveResult res = picard_solve(model, t, nullptr, zero_path(1, grid), o);
  const FieldHistory image = mild_map(model, t, nullptr, zero_path(1, grid), res.trajectory.states, 0.0);
  CHECK(trajectory_distance(image, res.trajectory.states) <= o.tol);
  CHECK(res.residuals.back() <= o.tol);
}

TEST_CASE("nonlocal condition against a shooting oracle") {
  // f = g = 0, so x(s) = alpha e^{-s} and alpha solves alpha = int_0^c zeta(s, alpha e^{-s}) ds.
  const double c = 0.5;
  const int m = 2000;
  const SpectralModel model = scalar(only(Nonlinearity::zeta, ScalarMap::example()), c);
  const TimeGrid grid(c, m);
  SolveOptions o;
  o.tol = 1e-8;
  const SolveResult res = picard_solve(model, build_table(model, grid), nullptr, zero_path(1, grid), o);
  auto F = [&](double alpha) {
    double integral = 0;
    for (int j = 0; j <= m; ++j) {
      const double s = grid.node(j);
      const double z = s == 0 ? 0 : 2 * s * s * std::cos(alpha * std::exp(-s) / s);
      integral += grid.trapezoid_weight(j, m) * z;
    }
    return integral - alpha;
  };
  double lo = -1, hi = 1;
  REQUIRE(F(lo) * F(hi) < 0);
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (F(lo) * F(mid) <= 0 ? hi : lo) = mid;
  }
  CHECK(std::abs(res.trajectory.states(0, 0) - 0.5 * (lo + hi)) <= 10 * o.tol);
}

TEST_CASE("failure modes") {
  const SpectralModel model =
      scalar(only(Nonlinearity::f, ScalarMap::custom([](double, double v) { return 3 * v + 1; }, "affine")), 4.0);
  const TimeGrid grid(4.0, 200);
  const ResolventTable t = build_table(model, grid);
  SolveOptions o;
  o.max_iter = 2;
  try {
    picard_solve(model, t, nullptr, zero_path(1, grid), o);
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.iterations() == 2);
    CHECK(e.last_residual() > 0);
  }
  o.max_iter = 1000;
  o.blowup = 1.0;
  CHECK_THROWS_AS(picard_solve(model, t, nullptr, zero_path(1, grid), o), DivergenceError);
  o.tol = 0;
  CHECK_THROWS_AS(picard_solve(model, t, nullptr, zero_path(1, grid), o), StructuralError);
}

TEST_CASE("damping reaches the same fixed point") {
  const SpectralModel model = example_model(3, 0.5, MemoryKernel::exponential(1, 1));
  const TimeGrid grid(0.5, 200);
  const ResolventTable t = build_table(model, grid);
  const QWienerPath path = sample_path(model.noise(), grid, 1, 0);
  SolveOptions a, b;
  a.tol = b.tol = 1e-11;
  b.damping = 0.6;
  const SolveResult ra = picard_solve(model, t, nullptr, path, a);
  const SolveResult rb = picard_solve(model, t, nullptr, path, b);
  CHECK(trajectory_distance(ra.trajectory.states, rb.trajectory.states) <= 1e-9);
  CHECK(rb.iterations > ra.iterations);
}

TEST_CASE("determinism") {
  const SpectralModel model = example_model(4, 1.0, MemoryKernel::exponential(1, 1));
  const TimeGrid grid(1.0, 100);
  const ResolventTable t = build_table(model, grid);
  const Gramian g = assemble_gramian(t, model.control());
  const Controller ctl(t, model.control(), g, {SteeringTarget::affine(SpectralField::Ones(4), 0.5, 1), 0.1});
  const QWienerPath path = sample_path(model.noise(), grid, 3, 1);
  const SolveResult a = picard_solve(model, t, &ctl, path, {});
  const SolveResult b = picard_solve(model, t, &ctl, path, {});
  CHECK(a.trajectory.states == b.trajectory.states);
  CHECK(a.control == b.control);
  CHECK(a.control.rows() == 3);
}

TEST_CASE("freezing operator") {
  const TimeGrid grid(1.0, 10);
  FieldHistory x(2, 11);
  for (int j = 0; j <= 10; ++j) x.col(j) << j, -j * j;
  const Trajectory traj{grid, x, 0};
  CHECK(apply_N_gamma(traj, 0.0).trajectory.states == x);

  const FrozenTrajectory last = apply_N_gamma(traj, 0.9);
  for (int j = 0; j < 10; ++j) CHECK(last.trajectory.states.col(j) == x.col(9));
  CHECK(last.trajectory.states.col(10) == x.col(10));

  const FrozenTrajectory snapped = apply_N_gamma(traj, 0.33);
  CHECK(snapped.gamma_node == 3);
  CHECK(snapped.snapped_gamma == doctest::Approx(0.3));
  CHECK(apply_N_gamma(snapped.trajectory, 0.33).trajectory.states == snapped.trajectory.states);
  CHECK_THROWS_AS(apply_N_gamma(traj, 1.0), StructuralError);

  // Trajectories agreeing on [gamma, c] give identical frozen nonlinearities there.
  FieldHistory y = x;
  y.leftCols(3).setRandom();
  const auto nx = evaluate_nonlinearities(NonlinearitySpec::example(), grid,
                                          apply_N_gamma({grid, x, 0}, 0.3).trajectory.states);
  const auto ny = evaluate_nonlinearities(NonlinearitySpec::example(), grid,
                                          apply_N_gamma({grid, y, 0}, 0.3).trajectory.states);
  CHECK(nx.f == ny.f);
  CHECK(nx.g == ny.g);
  CHECK(nx.nonlocal == ny.nonlocal);
}

TEST_CASE("gamma sequence") {
  const TimeGrid grid(1.0, 100);
  SUBCASE("zero data") {
    const SpectralModel model = scalar(NonlinearitySpec::zero());
    const auto res = gamma_sequence_solve(model, build_table(model, grid), nullptr, zero_path(1, grid),
                                          {0.4, 0.2}, {});
    REQUIRE(res.solves.size() == 2);
    for (const auto& s : res.solves) CHECK(s.result->trajectory.states.isZero(0));
    CHECK(res.distance_to_unfrozen == std::vector<double>{0.0, 0.0});
    CHECK(res.pairwise_distance.size() == 1);
  }
  SUBCASE("state-independent nonlinearities") {
    NonlinearitySpec nl;
    nl.f = ScalarMap::custom([](double s, double) { return std::cos(s); }, "cos");
    nl.g = ScalarMap::custom([](double, double) { return 0.3; }, "const");
    nl.zeta = ScalarMap::custom([](double s, double) { return s; }, "id");
    const SpectralModel model = scalar(nl, 1.0, MemoryKernel::exponential(1, 1));
    const QWienerPath path = sample_path(model.noise(), grid, 2, 0);
    const auto res = gamma_sequence_solve(model, build_table(model, grid), nullptr, path, {0.5, 0.25, 0.1}, {});
    for (double d : res.distance_to_unfrozen) CHECK(d <= 1e-12);
  }
  SUBCASE("list validation") {
    const SpectralModel model = scalar(NonlinearitySpec::zero());
    const ResolventTable t = build_table(model, grid);
    CHECK_THROWS_AS(gamma_sequence_solve(model, t, nullptr, zero_path(1, grid), {0.2, 0.4}, {}), StructuralError);
    CHECK_THROWS_AS(gamma_sequence_solve(model, t, nullptr, zero_path(1, grid), {1.0}, {}), StructuralError);
  }
}

TEST_CASE("feasibility inequality") {
  const SpectralModel model = example_model(4, 1.0, MemoryKernel::exponential(1, 1));
  const FeasibilityResult zero = feasibility_check(model, GrowthEnvelope::zero(), 0.0, 0.5, 1.0);
  CHECK(zero.feasible);
  CHECK(zero.lhs == 0.0);
  CHECK_THROWS_AS(feasibility_check(model, GrowthEnvelope::zero(), 0.0, 0.0, 1.0), StructuralError);

  // Mixing C (M_C^2 = 5), stated envelope, M = 2, c = 1, r = 1, K_u = 0.1.
  const double trq = model.noise().trace();
  const double hand = 3 * 4 * (1.0 / 3) + 6 * 4 * (2.0 / 12 + 5 * 0.1) + 3 * trq * 0.25;
  const FeasibilityResult res = feasibility_check(model, GrowthEnvelope::stated(), 0.1, 1.0, 2.0);
  CHECK(res.lhs == doctest::Approx(hand).epsilon(1e-13));
  CHECK_FALSE(res.feasible);
}

TEST_CASE("trajectory csv") {
  std::ostringstream out;
  write_trajectory_csv(out, Trajectory{TimeGrid(1.0, 2), FieldHistory::Ones(2, 3), 0});
  CHECK(out.str() == "sigma,x_1,x_2\n0,1,1\n0.5,1,1\n1,1,1\n");
}
