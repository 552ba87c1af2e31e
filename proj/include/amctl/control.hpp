#pragma once

#include <iosfwd>
#include <vector>

#include "amctl/stochastic.hpp"

namespace amctl {

// Controllability Gramian  int_0^c R(c-s) C C* R*(c-s) ds  on the truncation.
class Gramian {
 public:
  explicit Gramian(Eigen::MatrixXd matrix);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  // max |D_pq - D_qp|
  double symmetry_defect() const;
  Eigen::VectorXd eigenvalues() const;
  double min_eigenvalue() const { return eigenvalues()(0); }
  // Smallest eigenvalue is >= -1e-10 * ||D||.
  bool is_psd() const;

 private:
  Eigen::MatrixXd matrix_;
};

// Trapezoid rule in s on the table grid; with diagonal R the (p, q) entry is
// (CC*)_pq * int_0^c r_p(c-s) r_q(c-s) ds.
Gramian assemble_gramian(const ResolventTable& table, const ControlOperatorSpec& control);

// Cholesky factorization of mu I + D, reused for every solve at fixed mu.
class RegularizedInverse {
 public:
  RegularizedInverse(const Gramian& gramian, double mu);

  double mu() const { return mu_; }
  SpectralField solve(const SpectralField& rhs) const;
  // ||(mu I + D)^{-1}||_2 = 1 / lambda_min(mu I + D).
  double operator_norm() const { return operator_norm_; }

 private:
  double mu_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double operator_norm_;
};

// Solves (mu I + D) x = rhs. Throws NumericalError if the factorization fails.
SpectralField regularized_solve(const Gramian& gramian, double mu, const SpectralField& rhs);

// Terminal targets x_c = mean + loading .* W(c). The martingale density is
// then the deterministic diagonal phi_n = loading_n.
struct SteeringTarget {
  SpectralField mean;
  SpectralField noise_loading;

  static SteeringTarget deterministic(SpectralField mean);
  // mean + loading * W_k(c) in mode k (1-based).
  static SteeringTarget affine(SpectralField mean, double loading, int mode);
};

struct SteeringProblem {
  SteeringTarget target;
  double mu = 1.0;
};

// Control law  u(sigma) = C* R*(c - sigma) (mu I + D)^{-1} [bracket].
class Controller {
 public:
  Controller(const ResolventTable& table, ControlOperatorSpec control, const Gramian& gramian,
             SteeringProblem problem);

  const SteeringProblem& problem() const { return problem_; }
  const ControlOperatorSpec& control() const { return control_; }
  const RegularizedInverse& inverse() const { return inverse_; }
  const ResolventTable& table() const { return table_; }

  // E x_c - R(c) h + int phi dW - int R(c-s) f ds - int R(c-s) g dW.
  SpectralField bracket(const SpectralField& nonlocal_value, const SpectralField& drift_terminal,
                        const SpectralField& noise_terminal, const QWienerPath& path) const;
  // control_dim x (m + 1) history of u for the given bracket.
  FieldHistory control_from_bracket(const SpectralField& bracket) const;
  // N x (m + 1) history of C u.
  FieldHistory forcing(const FieldHistory& control) const;

 private:
  const ResolventTable& table_;
  ControlOperatorSpec control_;
  SteeringProblem problem_;
  RegularizedInverse inverse_;
};

// Nonlinearities evaluated along a trajectory, plus the nonlocal value
// h = int_0^c zeta(s, x(s)) ds by the trapezoid rule.
struct NonlinearHistories {
  FieldHistory f;
  FieldHistory g;
  FieldHistory zeta;
  SpectralField nonlocal;
};

NonlinearHistories evaluate_nonlinearities(const NonlinearitySpec& spec, const TimeGrid& grid,
                                           const FieldHistory& states);

// Evaluates u^mu on every node for the trajectory `states` (N x (m + 1)).
FieldHistory synthesize_control(const SteeringProblem& problem, const ResolventTable& table,
                                const ControlOperatorSpec& control, const Gramian& gramian,
                                const FieldHistory& states, const QWienerPath& path,
                                const NonlinearitySpec& nonlinearity);

// Martingale term  int_0^c phi dW  for the target's diagonal density.
SpectralField martingale_term(const SteeringTarget& target, const QWienerPath& path);

// Second-moment data of a target under the model's noise.
double target_second_moment(const SteeringTarget& target, const QWienerSpec& noise, double horizon);
double density_l2_norm_squared(const SteeringTarget& target, double horizon);

// Bound K_u on E||u^mu(sigma)||^2 over the ball B_r:
//   (4 M_C^2 / mu^2) M^2 (2 E||x_c||^2 + 2 Tr(Q) int E||phi||^2
//     + c M^2 [Omega_z(r)|tau_z| + Omega_f(r)|tau_f| + Tr(Q) c Omega_g(r)|tau_g|]).
// resolvent_bound is M = sup ||R(sigma)||.
double eval_Ku(const SteeringProblem& problem, const SpectralModel& model,
               const GrowthEnvelope& envelope, double r, double resolvent_bound);

struct DecayReport {
  std::vector<double> mu;
  // delta[p][i] = ||mu_i S(mu_i) x_p||
  std::vector<std::vector<double>> delta;
  bool nonincreasing = true;
  bool strictly_decreasing = true;
  bool final_drop = true;  // last < 0.1 * first for every probe
  bool passed() const { return nonincreasing && final_drop; }
};

// Requires mu_list strictly decreasing and positive.
DecayReport linear_ac_test(const Gramian& gramian, const std::vector<double>& mu_list,
                           const std::vector<SpectralField>& probes);

void write_gramian_csv(std::ostream& out, const Gramian& gramian);
void write_decay_csv(std::ostream& out, const DecayReport& report);

}  // namespace amctl
