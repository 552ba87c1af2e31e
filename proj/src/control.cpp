#include "amctl/control.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "amctl/csv.hpp"

namespace amctl {

Gramian::Gramian(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw StructuralError("Gramian must be square");
}

double Gramian::symmetry_defect() const {
  return (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
}

Eigen::VectorXd Gramian::eigenvalues() const {
  // Symmetrize before the eigensolver; the defect is reported separately.
  const Eigen::MatrixXd sym = 0.5 * (matrix_ + matrix_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

bool Gramian::is_psd() const {
  const Eigen::VectorXd ev = eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  return ev(0) >= -1e-10 * scale;
}

Gramian assemble_gramian(const ResolventTable& table, const ControlOperatorSpec& control) {
  const int n = table.modes();
  const int m = table.grid().steps();
  const Eigen::MatrixXd c = control.matrix(n);
  const Eigen::MatrixXd cc = c * c.transpose();

  // Weighted second moments int_0^c r_p(c-s) r_q(c-s) ds.
  Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i <= m; ++i) {
    const double w = table.grid().trapezoid_weight(i, m);
    const auto r = table.at(m - i);
    moments.noalias() += w * r * r.transpose();
  }
  return Gramian(cc.cwiseProduct(moments));
}

RegularizedInverse::RegularizedInverse(const Gramian& gramian, double mu) : mu_(mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw StructuralError("regularized inverse: mu must be positive");
  }
  const int n = gramian.dim();
  const Eigen::MatrixXd shifted = mu * Eigen::MatrixXd::Identity(n, n) + gramian.matrix();
  factor_.compute(shifted);
  if (factor_.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "regularized inverse: Cholesky failed for mu = " << mu
        << " (lambda_min(D) = " << gramian.min_eigenvalue()
        << ", symmetry defect = " << gramian.symmetry_defect() << ")";
    throw NumericalError(msg.str());
  }
  operator_norm_ = 1.0 / (mu + gramian.min_eigenvalue());
}

SpectralField RegularizedInverse::solve(const SpectralField& rhs) const {
  if (rhs.size() != factor_.rows()) throw StructuralError("regularized solve: dimension mismatch");
  return factor_.solve(rhs);
}

SpectralField regularized_solve(const Gramian& gramian, double mu, const SpectralField& rhs) {
  return RegularizedInverse(gramian, mu).solve(rhs);
}

SteeringTarget SteeringTarget::deterministic(SpectralField mean) {
  SteeringTarget t;
  t.noise_loading = SpectralField::Zero(mean.size());
  t.mean = std::move(mean);
  return t;
}

SteeringTarget SteeringTarget::affine(SpectralField mean, double loading, int mode) {
  if (mode < 1 || mode > mean.size()) throw StructuralError("target: noise mode out of range");
  SteeringTarget t = deterministic(std::move(mean));
  t.noise_loading(mode - 1) = loading;
  return t;
}

Controller::Controller(const ResolventTable& table, ControlOperatorSpec control,
                       const Gramian& gramian, SteeringProblem problem)
    : table_(table),
      control_(control),
      problem_(std::move(problem)),
      inverse_(gramian, problem_.mu) {
  if (gramian.dim() != table.modes() || problem_.target.mean.size() != table.modes() ||
      problem_.target.noise_loading.size() != table.modes()) {
    throw StructuralError("controller: Gramian, target and table dimensions differ");
  }
}

SpectralField martingale_term(const SteeringTarget& target, const QWienerPath& path) {
  return target.noise_loading.cwiseProduct(path.value(path.grid().steps()));
}

SpectralField Controller::bracket(const SpectralField& nonlocal_value,
                                  const SpectralField& drift_terminal,
                                  const SpectralField& noise_terminal,
                                  const QWienerPath& path) const {
  const int m = table_.grid().steps();
  return problem_.target.mean - table_.at(m).cwiseProduct(nonlocal_value) +
         martingale_term(problem_.target, path) - drift_terminal - noise_terminal;
}

FieldHistory Controller::control_from_bracket(const SpectralField& bracket) const {
  const int m = table_.grid().steps();
  const int n = table_.modes();
  const SpectralField y = inverse_.solve(bracket);
  FieldHistory u(control_.control_dim(n), m + 1);
  for (int j = 0; j <= m; ++j) u.col(j) = control_.adjoint(table_.at(m - j).cwiseProduct(y));
  return u;
}

FieldHistory Controller::forcing(const FieldHistory& control) const {
  const int n = table_.modes();
  FieldHistory cu(n, control.cols());
  for (Eigen::Index j = 0; j < control.cols(); ++j) cu.col(j) = control_.apply(control.col(j), n);
  return cu;
}

NonlinearHistories evaluate_nonlinearities(const NonlinearitySpec& spec, const TimeGrid& grid,
                                           const FieldHistory& states) {
  const int m = grid.steps();
  if (states.cols() != m + 1) throw StructuralError("nonlinearities: trajectory length mismatch");
  const Eigen::Index n = states.rows();
  NonlinearHistories out{FieldHistory(n, m + 1), FieldHistory(n, m + 1), FieldHistory(n, m + 1),
                         SpectralField::Zero(n)};
  for (int j = 0; j <= m; ++j) {
    const double s = grid.node(j);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double v = states(k, j);
      out.f(k, j) = spec.f.evaluate(Nonlinearity::f, s, v);
      out.g(k, j) = spec.g.evaluate(Nonlinearity::g, s, v);
      out.zeta(k, j) = spec.zeta.evaluate(Nonlinearity::zeta, s, v);
    }
    out.nonlocal += grid.trapezoid_weight(j, m) * out.zeta.col(j);
  }
  return out;
}

FieldHistory synthesize_control(const SteeringProblem& problem, const ResolventTable& table,
                                const ControlOperatorSpec& control, const Gramian& gramian,
                                const FieldHistory& states, const QWienerPath& path,
                                const NonlinearitySpec& nonlinearity) {
  const Controller controller(table, control, gramian, problem);
  const NonlinearHistories terms = evaluate_nonlinearities(nonlinearity, table.grid(), states);
  const int m = table.grid().steps();
  const SpectralField drift = det_convolution(table, terms.f, m);
  const SpectralField noise = ito_convolution(table, terms.g, path, m);
  return controller.control_from_bracket(controller.bracket(terms.nonlocal, drift, noise, path));
}

double target_second_moment(const SteeringTarget& target, const QWienerSpec& noise,
                            double horizon) {
  double second = target.mean.squaredNorm();
  for (Eigen::Index n = 0; n < target.noise_loading.size(); ++n) {
    const double b = target.noise_loading(n);
    second += b * b * noise.mode_variances()[n] * horizon;
  }
  return second;
}

double density_l2_norm_squared(const SteeringTarget& target, double horizon) {
  return horizon * target.noise_loading.squaredNorm();
}

double eval_Ku(const SteeringProblem& problem, const SpectralModel& model,
               const GrowthEnvelope& envelope, double r, double resolvent_bound) {
  if (!(r > 0.0)) throw StructuralError("eval_Ku: radius must be positive");
  if (!(problem.mu > 0.0)) throw StructuralError("eval_Ku: mu must be positive");
  const double c = model.horizon();
  const double trace = model.noise().trace();
  const double mc = model.control().norm(model.dim());
  const double M2 = resolvent_bound * resolvent_bound;

  const double target_part = 2.0 * target_second_moment(problem.target, model.noise(), c) +
                             2.0 * trace * density_l2_norm_squared(problem.target, c);
  const double growth_part = envelope.omega_zeta(r) * envelope.tau_zeta.l1_norm(c) +
                             envelope.omega_f(r) * envelope.tau_f.l1_norm(c) +
                             trace * c * envelope.omega_g(r) * envelope.tau_g.l1_norm(c);
  return 4.0 * mc * mc / (problem.mu * problem.mu) * M2 * (target_part + c * M2 * growth_part);
}

DecayReport linear_ac_test(const Gramian& gramian, const std::vector<double>& mu_list,
                           const std::vector<SpectralField>& probes) {
  for (std::size_t i = 0; i < mu_list.size(); ++i) {
    if (!(mu_list[i] > 0.0) || (i > 0 && !(mu_list[i] < mu_list[i - 1]))) {
      throw StructuralError("linear_ac_test: mu list must be positive and strictly decreasing");
    }
  }
  DecayReport report;
  report.mu = mu_list;
  std::vector<RegularizedInverse> inverses;
  inverses.reserve(mu_list.size());
  for (double mu : mu_list) inverses.emplace_back(gramian, mu);

  for (const SpectralField& x : probes) {
    std::vector<double> delta;
    delta.reserve(mu_list.size());
    for (const RegularizedInverse& inv : inverses) delta.push_back((inv.mu() * inv.solve(x)).norm());
    for (std::size_t i = 1; i < delta.size(); ++i) {
      if (delta[i] > delta[i - 1]) report.nonincreasing = false;
      if (!(delta[i] < delta[i - 1])) report.strictly_decreasing = false;
    }
    if (!delta.empty() && !(delta.back() < 0.1 * delta.front())) report.final_drop = false;
    report.delta.push_back(std::move(delta));
  }
  return report;
}

void write_gramian_csv(std::ostream& out, const Gramian& gramian) {
  CsvWriter csv(out);
  csv.cell("mode");
  for (int q = 0; q < gramian.dim(); ++q) csv.cell(q + 1);
  csv.end_row();
  for (int p = 0; p < gramian.dim(); ++p) {
    csv.cell(p + 1);
    for (int q = 0; q < gramian.dim(); ++q) csv.cell(gramian.matrix()(p, q));
    csv.end_row();
  }
}

void write_decay_csv(std::ostream& out, const DecayReport& report) {
  CsvWriter csv(out);
  csv.row("mu", "probe", "delta");
  for (std::size_t i = 0; i < report.mu.size(); ++i) {
    for (std::size_t p = 0; p < report.delta.size(); ++p) {
      csv.row(report.mu[i], static_cast<int>(p), report.delta[p][i]);
    }
  }
}

}  // namespace amctl
