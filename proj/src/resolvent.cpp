#include "amctl/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "amctl/csv.hpp"

namespace amctl {

std::vector<double> solve_mode(double a, const MemoryKernel& kernel, const TimeGrid& grid) {
  const int m = grid.steps();
  const double h = grid.step();
  std::vector<double> theta(m + 1);
  for (int k = 0; k <= m; ++k) theta[k] = kernel(grid.node(k));

  std::vector<double> r(m + 1);
  r[0] = 1.0;
  // F_j = a (r_j + conv_j) with conv_0 = 0.
  double f_prev = a * r[0];
  const double lhs = 1.0 - 0.5 * h * a * (1.0 + 0.5 * h * theta[0]);
  for (int j = 0; j < m; ++j) {
    // History part of conv_{j+1}: every node except j+1 itself.
    double history = 0.5 * theta[j + 1] * r[0];
    for (int i = 1; i <= j; ++i) history += theta[j + 1 - i] * r[i];
    history *= h;
    r[j + 1] = (r[j] + 0.5 * h * f_prev + 0.5 * h * a * history) / lhs;
    f_prev = a * (r[j + 1] + history + 0.5 * h * theta[0] * r[j + 1]);
    if (!std::isfinite(r[j + 1])) {
      throw NumericalError("resolvent: non-finite value for eigenvalue " + std::to_string(a) +
                           " at node " + std::to_string(j + 1));
    }
  }
  return r;
}

namespace {

struct Bound {
  double M;
  double beta;
  double max_abs;
};

Bound fit_bound(const Eigen::MatrixXd& values, const TimeGrid& grid) {
  const int m = grid.steps();
  Eigen::VectorXd envelope(m + 1);
  for (int j = 0; j <= m; ++j) envelope(j) = values.col(j).cwiseAbs().maxCoeff();
  const double max_abs = envelope.maxCoeff();
  if (max_abs <= 1.0) return {max_abs, 0.0, max_abs};

  // Least-squares slope of log|r| envelope, clipped at zero.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int j = 0; j <= m; ++j) {
    if (envelope(j) <= 0.0) continue;
    const double x = grid.node(j);
    const double y = std::log(envelope(j));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  double beta = 0.0;
  const double denom = count * sxx - sx * sx;
  if (count > 1 && denom > 0.0) beta = std::max(0.0, (count * sxy - sx * sy) / denom);
  double M = 0.0;
  for (int j = 0; j <= m; ++j) M = std::max(M, envelope(j) * std::exp(-beta * grid.node(j)));
  return {M, beta, max_abs};
}

}  // namespace

ResolventTable::ResolventTable(TimeGrid grid, std::vector<double> eigenvalues,
                               MemoryKernel kernel, Eigen::MatrixXd values)
    : grid_(grid),
      eigenvalues_(std::move(eigenvalues)),
      kernel_(kernel),
      values_(std::move(values)) {
  if (values_.rows() != static_cast<Eigen::Index>(eigenvalues_.size()) ||
      values_.cols() != grid_.steps() + 1) {
    throw StructuralError("resolvent table: value matrix does not match modes x nodes");
  }
  const Bound b = fit_bound(values_, grid_);
  bound_M_ = b.M;
  bound_beta_ = b.beta;
  max_abs_ = b.max_abs;
}

ResolventTable build_table(const std::vector<double>& eigenvalues, const MemoryKernel& kernel,
                           const TimeGrid& grid, Execution exec) {
  const int modes = static_cast<int>(eigenvalues.size());
  Eigen::MatrixXd values(modes, grid.steps() + 1);
  auto fill_row = [&](int n) {
    try {
      const std::vector<double> row = solve_mode(eigenvalues[n], kernel, grid);
      values.row(n) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), grid.steps() + 1);
    } catch (const NumericalError& e) {
      throw NumericalError("mode " + std::to_string(n + 1) + ": " + e.what());
    }
  };

  if (exec == Execution::serial) {
    for (int n = 0; n < modes; ++n) fill_row(n);
  } else {
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int n = 0; n < modes; ++n) {
      try {
        fill_row(n);
      } catch (const NumericalError& e) {
#pragma omp critical(amctl_resolvent_failure)
        if (failure.empty()) failure = e.what();
      }
    }
    if (!failure.empty()) throw NumericalError(failure);
  }
  return ResolventTable(grid, eigenvalues, kernel, std::move(values));
}

ResolventTable build_table(const SpectralModel& model, const TimeGrid& grid, Execution exec) {
  if (grid.horizon() != model.horizon()) {
    throw StructuralError("build_table: grid horizon differs from model horizon");
  }
  return build_table(model.eigenvalues(), model.kernel(), grid, exec);
}

SpectralField apply_resolvent(const ResolventTable& table, int node, const SpectralField& v) {
  if (node < 0 || node > table.grid().steps()) {
    throw StructuralError("apply_resolvent: node " + std::to_string(node) + " out of range");
  }
  if (v.size() != table.modes()) throw StructuralError("apply_resolvent: dimension mismatch");
  return table.at(node).cwiseProduct(v);
}

AxiomReport check_axioms(const ResolventTable& table) {
  const TimeGrid& grid = table.grid();
  const int m = grid.steps();
  const double h = grid.step();
  const MemoryKernel& kernel = table.kernel();
  std::vector<double> theta(m + 1);
  for (int k = 0; k <= m; ++k) theta[k] = kernel(grid.node(k));

  AxiomReport report;
  report.bound_M = table.bound_M();
  report.bound_beta = table.bound_beta();
  report.bounded_by_one = table.max_abs() <= 1.0 + 1e-12;

  for (int n = 0; n < table.modes(); ++n) {
    const double a = table.eigenvalues()[n];
    const auto r = table.values().row(n);
    report.identity_residual = std::max(report.identity_residual, std::abs(r(0) - 1.0));

    double mode_residual = 0.0;
    for (int j = 1; j < m; ++j) {
      const double derivative = (r(j + 1) - r(j - 1)) / (2.0 * h);
      double memory = 0.0;
      double commuted = 0.0;
      for (int i = 0; i <= j; ++i) {
        const double w = grid.trapezoid_weight(i, j);
        memory += w * theta[j - i] * r(i);
        commuted += w * r(j - i) * theta[i];
      }
      const double res1 = std::abs(derivative - (a * r(j) + a * memory));
      const double res2 = std::abs(derivative - (r(j) * a + commuted * a));
      report.generator_residual = std::max(report.generator_residual, res1);
      report.commuted_residual = std::max(report.commuted_residual, res2);
      mode_residual = std::max({mode_residual, res1, res2});
    }
    const double scale = std::pow(std::max(1.0, std::abs(a)), 3) * h * h;
    report.scaled_residual = std::max(report.scaled_residual, mode_residual / scale);

    for (int j = 0; j < m; ++j) {
      report.continuity_constant =
          std::max(report.continuity_constant, std::abs(r(j + 1) - r(j)) / h);
    }
  }

  // Semigroup defect for eps = k h with eps <= sigma and sigma + eps <= c.
  const int k_max = m / 2;
  const int stride = std::max(1, k_max / 256);
  double num = 0.0, den = 0.0;
  for (int k = 1; k <= k_max; k += stride) {
    double defect = 0.0;
    for (int n = 0; n < table.modes(); ++n) {
      const auto r = table.values().row(n);
      for (int j = k; j + k <= m; ++j) {
        defect = std::max(defect, std::abs(r(j + k) - r(k) * r(j)));
      }
    }
    const double eps = k * h;
    report.defect_eps.push_back(eps);
    report.defect_value.push_back(defect);
    report.gamma_hat = std::max(report.gamma_hat, defect / eps);
    num += defect * eps;
    den += eps * eps;
  }
  report.gamma_slope = den > 0.0 ? num / den : 0.0;
  return report;
}

bool AxiomReport::passed() const {
  return identity_residual == 0.0 && scaled_residual <= kScaledResidualLimit &&
         std::isfinite(gamma_hat) && std::isfinite(bound_M) && bound_M > 0.0;
}

void write_table_csv(std::ostream& out, const ResolventTable& table) {
  CsvWriter csv(out);
  csv.cell("mode");
  for (int j = 0; j <= table.grid().steps(); ++j) csv.cell(table.grid().node(j));
  csv.end_row();
  for (int n = 0; n < table.modes(); ++n) {
    csv.cell(n + 1);
    for (int j = 0; j <= table.grid().steps(); ++j) csv.cell(table.value(n, j));
    csv.end_row();
  }
}

void write_axiom_report_csv(std::ostream& out, const AxiomReport& report) {
  CsvWriter csv(out);
  csv.row("quantity", "value");
  csv.row("identity_residual", report.identity_residual);
  csv.row("generator_residual", report.generator_residual);
  csv.row("commuted_residual", report.commuted_residual);
  csv.row("scaled_residual", report.scaled_residual);
  csv.row("gamma_hat", report.gamma_hat);
  csv.row("gamma_slope", report.gamma_slope);
  csv.row("bound_M", report.bound_M);
  csv.row("bound_beta", report.bound_beta);
  csv.row("bounded_by_one", report.bounded_by_one ? 1 : 0);
  csv.row("continuity_constant", report.continuity_constant);
  csv.row("passed", report.passed() ? 1 : 0);
}

}  // namespace amctl
