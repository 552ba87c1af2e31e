#include "amctl/solver.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "amctl/csv.hpp"

namespace amctl {

void SolveOptions::validate(double horizon) const {
  if (!(tol > 0.0)) throw StructuralError("solve options: tol must be positive");
  if (max_iter < 1) throw StructuralError("solve options: max_iter must be >= 1");
  if (!(gamma >= 0.0 && gamma < horizon)) {
    throw StructuralError("solve options: gamma must lie in [0, c)");
  }
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw StructuralError("solve options: damping must lie in (0, 1]");
  }
  if (!(blowup > 0.0)) throw StructuralError("solve options: blowup radius must be positive");
}

namespace {

void freeze_in_place(FieldHistory& states, int gamma_node) {
  for (int j = 0; j < gamma_node; ++j) states.col(j) = states.col(gamma_node);
}

}  // namespace

FrozenTrajectory apply_N_gamma(const Trajectory& traj, double gamma) {
  if (!(gamma >= 0.0 && gamma < traj.grid.horizon())) {
    throw StructuralError("N_gamma: gamma must lie in [0, c)");
  }
  const int node = traj.grid.nearest_node(gamma);
  FrozenTrajectory out{traj, traj.grid.node(node), node};
  freeze_in_place(out.trajectory.states, node);
  return out;
}

double trajectory_distance(const FieldHistory& a, const FieldHistory& b) {
  return (a - b).colwise().norm().maxCoeff();
}

FieldHistory mild_map(const SpectralModel& model, const ResolventTable& table,
                      const Controller* controller, const QWienerPath& path,
                      const FieldHistory& states, double gamma, FieldHistory* control) {
  const TimeGrid& grid = table.grid();
  const int m = grid.steps();
  FieldHistory frozen = states;
  if (gamma > 0.0) freeze_in_place(frozen, grid.nearest_node(gamma));

  const NonlinearHistories terms = evaluate_nonlinearities(model.nonlinearity(), grid, frozen);
  FieldHistory out = det_convolution_all(table, terms.f);
  const FieldHistory noise = ito_convolution_all(table, terms.g, path);

  if (controller != nullptr) {
    const SpectralField bracket =
        controller->bracket(terms.nonlocal, out.col(m), noise.col(m), path);
    FieldHistory u = controller->control_from_bracket(bracket);
    out += det_convolution_all(table, controller->forcing(u));
    if (control != nullptr) *control = std::move(u);
  } else if (control != nullptr) {
    control->resize(0, 0);
  }
  out += noise;
  for (int j = 0; j <= m; ++j) out.col(j) += table.at(j).cwiseProduct(terms.nonlocal);
  return out;
}

SolveResult picard_solve(const SpectralModel& model, const ResolventTable& table,
                         const Controller* controller, const QWienerPath& path,
                         const SolveOptions& opts) {
  opts.validate(table.grid().horizon());
  if (table.modes() != model.dim()) throw StructuralError("picard_solve: table/model mismatch");
  const TimeGrid& grid = table.grid();

  SolveResult result{
      Trajectory{grid, FieldHistory::Zero(model.dim(), grid.steps() + 1), path.stream()},
      FieldHistory(), 0, {},
      opts.gamma > 0.0 ? grid.node(grid.nearest_node(opts.gamma)) : 0.0};
  FieldHistory& states = result.trajectory.states;

  double residual = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= opts.max_iter; ++k) {
    FieldHistory control;
    const FieldHistory image =
        mild_map(model, table, controller, path, states, opts.gamma, &control);
    residual = trajectory_distance(image, states);
    result.residuals.push_back(residual);
    if (!std::isfinite(residual)) {
      throw DivergenceError("picard_solve: non-finite iterate at iteration " + std::to_string(k));
    }
    if (residual <= opts.tol) {
      result.iterations = k;
      result.control = std::move(control);
      return result;
    }
    states = (1.0 - opts.damping) * states + opts.damping * image;
    const double peak = states.colwise().squaredNorm().maxCoeff();
    if (!(peak <= opts.blowup)) {
      std::ostringstream msg;
      msg << "picard_solve: ||x||^2 = " << peak << " exceeds guard " << opts.blowup
          << " at iteration " << k;
      throw DivergenceError(msg.str());
    }
  }
  std::ostringstream msg;
  msg << "picard_solve: no convergence in " << opts.max_iter << " iterations (residual "
      << residual << ")";
  throw NonConvergenceError(msg.str(), residual, opts.max_iter);
}

GammaSequenceResult gamma_sequence_solve(const SpectralModel& model, const ResolventTable& table,
                                         const Controller* controller, const QWienerPath& path,
                                         const std::vector<double>& gamma_list,
                                         const SolveOptions& opts) {
  const double c = table.grid().horizon();
  for (std::size_t i = 0; i < gamma_list.size(); ++i) {
    if (!(gamma_list[i] > 0.0 && gamma_list[i] < c) ||
        (i > 0 && !(gamma_list[i] < gamma_list[i - 1]))) {
      throw StructuralError("gamma_sequence_solve: gamma list must be strictly decreasing in (0, c)");
    }
  }
  GammaSequenceResult out;
  SolveOptions base = opts;
  base.gamma = 0.0;
  try {
    out.unfrozen = picard_solve(model, table, controller, path, base);
  } catch (const NumericalError& e) {
    out.unfrozen_error = e.what();
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (double gamma : gamma_list) {
    GammaSolve solve;
    solve.gamma = gamma;
    solve.snapped_gamma = table.grid().node(table.grid().nearest_node(gamma));
    SolveOptions frozen = opts;
    frozen.gamma = gamma;
    try {
      solve.result = picard_solve(model, table, controller, path, frozen);
    } catch (const NumericalError& e) {
      solve.error = e.what();
    }
    out.distance_to_unfrozen.push_back(
        solve.result && out.unfrozen
            ? trajectory_distance(solve.result->trajectory.states, out.unfrozen->trajectory.states)
            : nan);
    out.solves.push_back(std::move(solve));
  }
  for (std::size_t i = 0; i + 1 < out.solves.size(); ++i) {
    const auto& a = out.solves[i].result;
    const auto& b = out.solves[i + 1].result;
    out.pairwise_distance.push_back(
        a && b ? trajectory_distance(a->trajectory.states, b->trajectory.states) : nan);
  }
  return out;
}

FeasibilityResult feasibility_check(const SpectralModel& model, const GrowthEnvelope& envelope,
                                    double Ku, double r, double resolvent_bound) {
  if (!(r > 0.0)) throw StructuralError("feasibility_check: radius must be positive");
  const double c = model.horizon();
  const double M2 = resolvent_bound * resolvent_bound;
  const double mc = model.control().norm(model.dim());
  const double trace = model.noise().trace();
  const double lhs =
      3.0 * M2 * c * envelope.omega_zeta(r) * envelope.tau_zeta.l1_norm(c) +
      6.0 * M2 * c *
          (2.0 * envelope.omega_f(r) * envelope.tau_f.l1_norm(c) + mc * mc * c * Ku) +
      3.0 * trace * std::sqrt(c) * envelope.omega_g(r) * envelope.tau_g.l1_norm(c);
  return {lhs <= r, lhs};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  CsvWriter csv(out);
  csv.cell("sigma");
  for (Eigen::Index n = 0; n < traj.states.rows(); ++n) csv.cell("x_" + std::to_string(n + 1));
  csv.end_row();
  for (int j = 0; j <= traj.grid.steps(); ++j) {
    csv.cell(traj.grid.node(j));
    for (Eigen::Index n = 0; n < traj.states.rows(); ++n) csv.cell(traj.states(n, j));
    csv.end_row();
  }
}

}  // namespace amctl
