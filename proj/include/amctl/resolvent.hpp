#pragma once

#include <iosfwd>
#include <vector>

#include "amctl/spectral_model.hpp"

namespace amctl {

// Solves r' = a r + a (theta * r), r(0) = 1 on the grid with the implicit
// trapezoid rule and trapezoidal convolution quadrature. Second order.
// Throws NumericalError if the solution is not finite.
std::vector<double> solve_mode(double eigenvalue, const MemoryKernel& kernel, const TimeGrid& grid);

// Per-mode resolvent values r_n(sigma_j) for a diagonal operator A and
// kernel theta(t) A. Immutable once built.
class ResolventTable {
 public:
  ResolventTable(TimeGrid grid, std::vector<double> eigenvalues, MemoryKernel kernel,
                 Eigen::MatrixXd values);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const MemoryKernel& kernel() const { return kernel_; }
  int modes() const { return static_cast<int>(values_.rows()); }
  // rows: modes, columns: grid nodes 0..m.
  const Eigen::MatrixXd& values() const { return values_; }
  double value(int mode, int node) const { return values_(mode, node); }
  // Diagonal of R(sigma_j).
  auto at(int node) const { return values_.col(node); }

  // |r_n(sigma)| <= bound_M * exp(bound_beta * sigma) over the table.
  double bound_M() const { return bound_M_; }
  double bound_beta() const { return bound_beta_; }
  double max_abs() const { return max_abs_; }

 private:
  TimeGrid grid_;
  std::vector<double> eigenvalues_;
  MemoryKernel kernel_;
  Eigen::MatrixXd values_;
  double bound_M_ = 1.0;
  double bound_beta_ = 0.0;
  double max_abs_ = 1.0;
};

ResolventTable build_table(const SpectralModel& model, const TimeGrid& grid,
                           Execution exec = Execution::parallel);
ResolventTable build_table(const std::vector<double>& eigenvalues, const MemoryKernel& kernel,
                           const TimeGrid& grid, Execution exec = Execution::parallel);

// R(sigma_j) v, coefficient-wise.
SpectralField apply_resolvent(const ResolventTable& table, int node, const SpectralField& v);

struct AxiomReport {
  double identity_residual = 0.0;
  // max_j |r'(sigma_j) - a r - a (theta * r)| over interior nodes, central differences.
  double generator_residual = 0.0;
  // max_j |r'(sigma_j) - r a - (r * theta) a|.
  double commuted_residual = 0.0;
  // Residuals divided by (step^2 * max(1, |a_n|)^3), maximized over modes.
  double scaled_residual = 0.0;
  // Semigroup defect D(eps) = max |r(s + eps) - r(eps) r(s)| for sampled eps = k * step.
  std::vector<double> defect_eps;
  std::vector<double> defect_value;
  double gamma_hat = 0.0;    // sup D(eps) / eps
  double gamma_slope = 0.0;  // least-squares slope of D against eps through the origin
  double bound_M = 1.0;
  double bound_beta = 0.0;
  bool bounded_by_one = true;
  double continuity_constant = 0.0;  // max |r_{j+1} - r_j| / step

  static constexpr double kScaledResidualLimit = 1.0;
  bool passed() const;
};

AxiomReport check_axioms(const ResolventTable& table);

void write_table_csv(std::ostream& out, const ResolventTable& table);
void write_axiom_report_csv(std::ostream& out, const AxiomReport& report);

}  // namespace amctl
