#pragma once

#include <functional>
#include <string>
#include <vector>

#include "amctl/types.hpp"

namespace amctl {

// Scalar memory weight theta; the kernel operator is theta(t) * A.
class MemoryKernel {
 public:
  enum class Family { zero, exponential };

  static MemoryKernel zero() { return MemoryKernel(Family::zero, 0.0, 0.0); }
  // theta(t) = amplitude * exp(-decay * t), decay > 0.
  static MemoryKernel exponential(double amplitude, double decay);

  double operator()(double t) const;
  Family family() const { return family_; }
  double amplitude() const { return amplitude_; }
  double decay() const { return decay_; }

 private:
  MemoryKernel(Family family, double amplitude, double decay)
      : family_(family), amplitude_(amplitude), decay_(decay) {}

  Family family_;
  double amplitude_;
  double decay_;
};

// Control operator from control coefficients into state coefficients.
//
// identity:      control dimension N, (Cu)_n = u_n.
// example: control coefficients u_2..u_N (dimension N-1),
//                (Cu)_1 = 2 u_2 and (Cu)_n = u_n for n >= 2.
class ControlOperatorSpec {
 public:
  enum class Kind { identity, example };

  explicit ControlOperatorSpec(Kind kind = Kind::identity) : kind_(kind) {}

  Kind kind() const { return kind_; }
  int control_dim(int state_dim) const;
  SpectralField apply(const ControlField& u, int state_dim) const;
  ControlField adjoint(const SpectralField& v) const;
  // Dense N x control_dim matrix representation.
  Eigen::MatrixXd matrix(int state_dim) const;
  // Operator 2-norm M_C.
  double norm(int state_dim) const;

 private:
  Kind kind_;
};

// Trace-class covariance of the Q-Wiener process in its eigenbasis.
class QWienerSpec {
 public:
  explicit QWienerSpec(std::vector<double> mode_variances);

  // lambda_k = scale / k^2, k = 1..modes.
  static QWienerSpec inverse_square(int modes, double scale = 1.0);

  const std::vector<double>& mode_variances() const { return variances_; }
  int modes() const { return static_cast<int>(variances_.size()); }
  double trace() const { return trace_; }

 private:
  std::vector<double> variances_;
  double trace_;
};

enum class Nonlinearity { f, g, zeta };

// A scalar map (sigma, v) -> value applied mode-wise in coefficient space.
class ScalarMap {
 public:
  enum class Family { zero, example, bounded_custom };
  using Function = std::function<double(double sigma, double value)>;

  static ScalarMap zero() { return ScalarMap(Family::zero, {}, "zero"); }
  static ScalarMap example() { return ScalarMap(Family::example, {}, "example"); }
  static ScalarMap custom(Function fn, std::string descriptor);

  Family family() const { return family_; }
  const std::string& descriptor() const { return descriptor_; }
  // Requires a known role to select the example formula.
  double evaluate(Nonlinearity role, double sigma, double value) const;

 private:
  ScalarMap(Family family, Function fn, std::string descriptor)
      : family_(family), fn_(std::move(fn)), descriptor_(std::move(descriptor)) {}

  Family family_;
  Function fn_;
  std::string descriptor_;
};

struct NonlinearitySpec {
  ScalarMap f = ScalarMap::zero();
  ScalarMap g = ScalarMap::zero();
  ScalarMap zeta = ScalarMap::zero();

  static NonlinearitySpec zero() { return {}; }
  static NonlinearitySpec example() {
    return {ScalarMap::example(), ScalarMap::example(), ScalarMap::example()};
  }
  const ScalarMap& get(Nonlinearity which) const;
};

// tau(sigma) = coefficient * sigma^power.
struct PowerWeight {
  double coefficient = 0.0;
  double power = 0.0;

  double operator()(double sigma) const;
  // ||tau||_{L^1([0, c])}
  double l1_norm(double horizon) const;
};

// Omega(r) = offset + slope * r, nondecreasing for slope >= 0.
struct AffineEnvelope {
  double offset = 0.0;
  double slope = 0.0;

  double operator()(double r) const { return offset + slope * r; }
};

// Growth bounds E||f(s,v)||^2 <= tau_f(s) Omega_f(E||v||^2), likewise g, zeta.
struct GrowthEnvelope {
  PowerWeight tau_f, tau_g, tau_zeta;
  AffineEnvelope omega_f, omega_g, omega_zeta;

  static GrowthEnvelope zero() { return {}; }
  // Weights displayed for the example system: tau_f = s^2/4, tau_g = 1/4,
  // tau_zeta = s^2, Omega = identity. The zeta bound does not hold for the
  // cosine nonlinearity at v = 0; kept for the evaluator cross-checks.
  static GrowthEnvelope stated();
  // Same f and g bounds; zeta bounded by tau_zeta = 4 s^4, Omega_zeta = N,
  // which holds mode-wise since |2 s^2 cos(.)| <= 2 s^2.
  static GrowthEnvelope example_safe(int state_dim);
};

class SpectralModel {
 public:
  SpectralModel(std::vector<double> eigenvalues, MemoryKernel kernel, ControlOperatorSpec control,
                QWienerSpec noise, NonlinearitySpec nonlinearity, double horizon,
                std::string basis_label = "eigenbasis");

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const MemoryKernel& kernel() const { return kernel_; }
  const ControlOperatorSpec& control() const { return control_; }
  const QWienerSpec& noise() const { return noise_; }
  const NonlinearitySpec& nonlinearity() const { return nonlinearity_; }
  double horizon() const { return horizon_; }
  const std::string& basis_label() const { return basis_label_; }

  SpectralModel with_nonlinearity(NonlinearitySpec nonlinearity) const;
  SpectralModel with_noise(QWienerSpec noise) const;

 private:
  std::vector<double> eigenvalues_;
  MemoryKernel kernel_;
  ControlOperatorSpec control_;
  QWienerSpec noise_;
  NonlinearitySpec nonlinearity_;
  double horizon_;
  std::string basis_label_;
};

// a_n = -n^2, n = 1..modes.
std::vector<double> dirichlet_laplacian_eigenvalues(int modes);

// Heat equation with memory on N sine modes: a_n = -n^2, mixing control
// operator, lambda_k = k^-2, and the example nonlinearities.
SpectralModel example_model(int modes, double horizon, MemoryKernel kernel);

SpectralField apply_A(const SpectralModel& model, const SpectralField& v);
SpectralField apply_C(const ControlOperatorSpec& spec, const ControlField& u, int state_dim);
SpectralField eval_nonlinearity(const NonlinearitySpec& spec, Nonlinearity which, double sigma,
                                const SpectralField& v);

}  // namespace amctl
