#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amctl/control.hpp"

namespace amctl {

struct Trajectory {
  TimeGrid grid;
  FieldHistory states;  // N x (m + 1)
  std::uint64_t path_stream = 0;

  SpectralField at(int node) const { return states.col(node); }
  SpectralField terminal() const { return states.col(states.cols() - 1); }
};

struct SolveOptions {
  double tol = 1e-8;        // on max_j ||Psi(x)(sigma_j) - x(sigma_j)||
  int max_iter = 100;
  double gamma = 0.0;       // freezing time in [0, c); 0 disables freezing
  double damping = 1.0;     // x <- (1 - d) x + d Psi(x), d in (0, 1]
  double blowup = 1e8;      // guard on ||x(sigma_j)||^2

  void validate(double horizon) const;
};

struct SolveResult {
  Trajectory trajectory;
  FieldHistory control;  // empty when no controller is attached
  int iterations = 0;
  std::vector<double> residuals;
  double snapped_gamma = 0.0;
};

// Replaces x on [0, gamma] by x(gamma). gamma is snapped to the nearest node.
struct FrozenTrajectory {
  Trajectory trajectory;
  double snapped_gamma;
  int gamma_node;
};
FrozenTrajectory apply_N_gamma(const Trajectory& traj, double gamma);

// Picard iteration for the nonlocal mild equation
//   x(s) = R(s) h(x) + int_0^s R(s-r)[f(r, x) + C u(r)] dr + int_0^s R(s-r) g(r, x) dW(r),
// with u recomputed from every iterate when `controller` is non-null and u = 0
// otherwise. With opts.gamma > 0 the nonlinearities and the control see the
// frozen iterate N_gamma x. The returned trajectory satisfies the equation
// with max-node residual <= tol.
//
// Throws NonConvergenceError after max_iter maps and DivergenceError when
// the guard radius is exceeded or a value is not finite.
SolveResult picard_solve(const SpectralModel& model, const ResolventTable& table,
                         const Controller* controller, const QWienerPath& path,
                         const SolveOptions& opts);

// One application of the fixed-point map; exposed for residual checks.
FieldHistory mild_map(const SpectralModel& model, const ResolventTable& table,
                      const Controller* controller, const QWienerPath& path,
                      const FieldHistory& states, double gamma, FieldHistory* control = nullptr);

// sup_j ||a(sigma_j) - b(sigma_j)||
double trajectory_distance(const FieldHistory& a, const FieldHistory& b);

struct GammaSolve {
  double gamma = 0.0;
  double snapped_gamma = 0.0;
  std::optional<SolveResult> result;
  std::string error;
};

struct GammaSequenceResult {
  std::optional<SolveResult> unfrozen;
  std::string unfrozen_error;
  std::vector<GammaSolve> solves;
  // ||x_{gamma_n} - x_{gamma_{n+1}}||, NaN when either solve failed.
  std::vector<double> pairwise_distance;
  // ||x_{gamma_n} - x*||, NaN when unavailable.
  std::vector<double> distance_to_unfrozen;
};

// gamma_list must be strictly decreasing in (0, c). Failures are recorded per
// gamma and the sequence continues.
GammaSequenceResult gamma_sequence_solve(const SpectralModel& model, const ResolventTable& table,
                                         const Controller* controller, const QWienerPath& path,
                                         const std::vector<double>& gamma_list,
                                         const SolveOptions& opts);

struct FeasibilityResult {
  bool feasible;
  double lhs;
};

// 3 M^2 c Omega_z(r)|tau_z| + 6 M^2 c (2 Omega_f(r)|tau_f| + M_C^2 c K_u)
//   + 3 Tr(Q) c^{1/2} Omega_g(r)|tau_g|  <=  r
FeasibilityResult feasibility_check(const SpectralModel& model, const GrowthEnvelope& envelope,
                                    double Ku, double r, double resolvent_bound);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace amctl
