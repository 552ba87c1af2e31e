#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "amctl/resolvent.hpp"

using namespace amctl;

namespace {

// r from the augmented system (r, I)' = [[a, a], [beta, -alpha]] (r, I).
double expm_oracle(double a, double beta, double alpha, double t) {
  Eigen::Matrix2d L;
  L << a, a, beta, -alpha;
  return (L * t).exp()(0, 0);
}

std::map<std::string, double> read_report(std::istream& in) {
  std::map<std::string, double> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g(2.0, 8);
  CHECK(g.step() == 0.25);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(8) == 2.0);
  CHECK(g.nearest_node(0.3) == 1);
  CHECK(g.nearest_node(-1.0) == 0);
  CHECK(g.nearest_node(5.0) == 8);
  CHECK_THROWS_AS(TimeGrid(1.0, 1), StructuralError);
  CHECK_THROWS_AS(TimeGrid(0.0, 10), StructuralError);
}

TEST_CASE("solve_mode without memory is the exponential") {
  const TimeGrid grid(1.0, 1000);
  const std::vector<double> r = solve_mode(-1.0, MemoryKernel::zero(), grid);
  double err = 0;
  for (int j = 0; j <= 1000; ++j) err = std::max(err, std::abs(r[j] - std::exp(-grid.node(j))));
  CHECK(err <= 1e-5);
}

TEST_CASE("zero eigenvalue keeps r identically one") {
  const std::vector<double> r = solve_mode(0.0, MemoryKernel::exponential(3.0, 0.5), TimeGrid(1.0, 300));
  for (double v : r) REQUIRE(v == 1.0);
}

TEST_CASE("exponential memory against the matrix exponential") {
  const TimeGrid grid(1.0, 1000);
  const MemoryKernel k = MemoryKernel::exponential(1.0, 1.0);
  const std::vector<double> r = solve_mode(-1.0, k, grid);
  double err = 0;
  for (int j = 0; j <= 1000; ++j) {
    err = std::max(err, std::abs(r[j] - expm_oracle(-1, 1, 1, grid.node(j))));
    // Closed form for this case: e^{-s} cos s.
    REQUIRE(std::abs(expm_oracle(-1, 1, 1, grid.node(j)) - std::exp(-grid.node(j)) * std::cos(grid.node(j))) <= 1e-13);
  }
  CHECK(err <= 1e-6);

  // Stiffer modes: second-order convergence towards the oracle.
  const std::vector<double> a = {-4.0, -9.0};
  auto worst = [&](int m) {
    const TimeGrid g(1.0, m);
    const ResolventTable t = build_table(a, k, g);
    double w = 0;
    for (int n = 0; n < 2; ++n) {
      for (int j = 0; j <= m; ++j) w = std::max(w, std::abs(t.value(n, j) - expm_oracle(a[n], 1, 1, g.node(j))));
    }
    return w;
  };
  const double ratio = worst(500) / worst(1000);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
  CHECK(worst(1000) <= 1e-5);
}

TEST_CASE("table structure") {
  const TimeGrid grid(1.0, 200);
  const ResolventTable t = build_table({-1.0, -4.0, -9.0}, MemoryKernel::exponential(2.0, 0.5), grid);
  CHECK(t.values().col(0).isOnes(0));
  CHECK(t.bound_M() > 0);
  for (int n = 0; n < 3; ++n) {
    for (int j = 0; j <= 200; ++j) {
      REQUIRE(std::abs(t.value(n, j)) <= t.bound_M() * std::exp(t.bound_beta() * grid.node(j)) * (1 + 1e-12));
    }
  }
  const ResolventTable single = build_table({-1.0}, MemoryKernel::zero(), grid);
  CHECK(single.modes() == 1);
  CHECK(single.value(0, 200) == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
}

TEST_CASE("apply_resolvent") {
  const TimeGrid grid(1.0, 1000);
  const ResolventTable t = build_table({-1.0, -4.0}, MemoryKernel::zero(), grid);
  const SpectralField v = SpectralField::Ones(2);
  CHECK(apply_resolvent(t, 0, v) == v);
  const SpectralField at1 = apply_resolvent(t, 1000, v);
  CHECK(std::abs(at1(0) - std::exp(-1.0)) <= 1e-5);
  CHECK(std::abs(at1(1) - std::exp(-4.0)) <= 1e-5);
  const SpectralField w(Eigen::Vector2d(0.3, -2.0));
  const SpectralField lin = apply_resolvent(t, 500, 2.5 * v + w) - 2.5 * apply_resolvent(t, 500, v) - apply_resolvent(t, 500, w);
  CHECK(lin.norm() <= 1e-12);
  CHECK_THROWS_AS(apply_resolvent(t, 1001, v), StructuralError);
  CHECK_THROWS_AS(apply_resolvent(t, 0, SpectralField::Ones(3)), StructuralError);
}

TEST_CASE("axioms without memory") {
  const TimeGrid grid(1.0, 1000);
  const AxiomReport rep = check_axioms(build_table({-1.0, -4.0}, MemoryKernel::zero(), grid));
  CHECK(rep.identity_residual == 0.0);
  CHECK(rep.passed());
  CHECK(rep.bounded_by_one);
  // e^{a(s+e)} = e^{ae} e^{as}; the trapezoid amplification factor is exactly multiplicative up to rounding.
  double worst = 0;
  for (double d : rep.defect_value) worst = std::max(worst, d);
  CHECK(worst <= 1e-12);
}

TEST_CASE("axiom residuals converge at second order") {
  const MemoryKernel k = MemoryKernel::exponential(1.0, 1.0);
  const std::vector<double> a = {-1.0, -4.0};
  const AxiomReport coarse = check_axioms(build_table(a, k, TimeGrid(1.0, 400)));
  const AxiomReport fine = check_axioms(build_table(a, k, TimeGrid(1.0, 800)));
  const double order_gen = std::log2(coarse.generator_residual / fine.generator_residual);
  const double order_com = std::log2(coarse.commuted_residual / fine.commuted_residual);
  CHECK(order_gen >= 1.8);
  CHECK(order_com >= 1.8);
  CHECK(fine.passed());
  CHECK(std::isfinite(fine.gamma_hat));
  for (std::size_t i = 0; i < fine.defect_eps.size(); ++i) {
    REQUIRE(fine.defect_value[i] <= fine.gamma_hat * fine.defect_eps[i] * (1 + 1e-12));
  }
  // Adjacent-node jumps bounded by C * step.
  CHECK(fine.continuity_constant <= 2 * 4.0);
}

TEST_CASE("axiom report golden file") {
  const SpectralModel model(dirichlet_laplacian_eigenvalues(3), MemoryKernel::exponential(1.0, 1.0),
                            ControlOperatorSpec(ControlOperatorSpec::Kind::example),
                            QWienerSpec::inverse_square(3), NonlinearitySpec::example(), 1.0);
  std::stringstream got;
  write_axiom_report_csv(got, check_axioms(build_table(model, TimeGrid(1.0, 200))));
  std::ifstream in(std::string(AMCTL_GOLDEN_DIR) + "/axioms_exponential.csv");
  REQUIRE(in);
  const auto want = read_report(in);
  const auto have = read_report(got);
  REQUIRE(want.size() == have.size());
  for (const auto& [key, value] : want) {
    INFO(key);
    CHECK(have.at(key) == doctest::Approx(value).epsilon(1e-12));
  }
}

TEST_CASE("table csv layout") {
  std::ostringstream out;
  write_table_csv(out, build_table({-1.0}, MemoryKernel::zero(), TimeGrid(1.0, 2)));
  CHECK(out.str() == "mode,0,0.5,1\n1,1,0.59999999999999998,0.35999999999999999\n");
}

TEST_CASE("grid mismatch is rejected") {
  const SpectralModel model = example_model(2, 1.0, MemoryKernel::zero());
  CHECK_THROWS_AS(build_table(model, TimeGrid(2.0, 10)), StructuralError);
}
