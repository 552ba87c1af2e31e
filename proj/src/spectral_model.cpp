#include "amctl/spectral_model.hpp"

#include <cmath>
#include <sstream>

namespace amctl {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw StructuralError("time grid: horizon must be positive and finite");
  }
  if (steps < 2) throw StructuralError("time grid: at least 2 steps required");
  step_ = horizon / steps;
}

int TimeGrid::nearest_node(double t) const {
  const long j = std::lround(t / step_);
  if (j < 0) return 0;
  if (j > steps_) return steps_;
  return static_cast<int>(j);
}

MemoryKernel MemoryKernel::exponential(double amplitude, double decay) {
  if (!(decay > 0.0) || !std::isfinite(decay)) {
    throw StructuralError("memory kernel: exponential decay rate must be positive");
  }
  if (!std::isfinite(amplitude)) throw StructuralError("memory kernel: amplitude must be finite");
  return MemoryKernel(Family::exponential, amplitude, decay);
}

double MemoryKernel::operator()(double t) const {
  if (family_ == Family::zero) return 0.0;
  return amplitude_ * std::exp(-decay_ * t);
}

int ControlOperatorSpec::control_dim(int state_dim) const {
  return kind_ == Kind::identity ? state_dim : state_dim - 1;
}

SpectralField ControlOperatorSpec::apply(const ControlField& u, int state_dim) const {
  if (u.size() != control_dim(state_dim)) {
    std::ostringstream msg;
    msg << "apply_C: control has " << u.size() << " coefficients, expected "
        << control_dim(state_dim);
    throw StructuralError(msg.str());
  }
  if (kind_ == Kind::identity) return u;
  // u(0) is u_2.
  SpectralField out(state_dim);
  out(0) = 2.0 * u(0);
  out.tail(state_dim - 1) = u;
  return out;
}

ControlField ControlOperatorSpec::adjoint(const SpectralField& v) const {
  if (kind_ == Kind::identity) return v;
  if (v.size() < 2) throw StructuralError("C*: state needs at least 2 modes");
  // (C*v)_2 = 2 v_1 + v_2, (C*v)_n = v_n for n >= 3.
  ControlField out = v.tail(v.size() - 1);
  out(0) += 2.0 * v(0);
  return out;
}

Eigen::MatrixXd ControlOperatorSpec::matrix(int state_dim) const {
  const int k = control_dim(state_dim);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(state_dim, k);
  for (int col = 0; col < k; ++col) {
    c.col(col) = apply(ControlField::Unit(k, col), state_dim);
  }
  return c;
}

double ControlOperatorSpec::norm(int /*state_dim*/) const {
  if (kind_ == Kind::identity) return 1.0;
  // C^T C = I + 4 e_1 e_1^T on the control side, so ||C|| = sqrt(5).
  return std::sqrt(5.0);
}

QWienerSpec::QWienerSpec(std::vector<double> mode_variances)
    : variances_(std::move(mode_variances)), trace_(0.0) {
  if (variances_.empty()) throw StructuralError("Q-Wiener: at least one noise mode required");
  for (double v : variances_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw StructuralError("Q-Wiener: mode variances must be positive and finite");
    }
    trace_ += v;
  }
}

QWienerSpec QWienerSpec::inverse_square(int modes, double scale) {
  std::vector<double> v(modes);
  for (int k = 1; k <= modes; ++k) v[k - 1] = scale / (static_cast<double>(k) * k);
  return QWienerSpec(std::move(v));
}

ScalarMap ScalarMap::custom(Function fn, std::string descriptor) {
  if (!fn) throw StructuralError("custom nonlinearity needs a callable");
  return ScalarMap(Family::bounded_custom, std::move(fn), std::move(descriptor));
}

double ScalarMap::evaluate(Nonlinearity role, double sigma, double v) const {
  switch (family_) {
    case Family::zero:
      return 0.0;
    case Family::bounded_custom:
      return fn_(sigma, v);
    case Family::example:
      break;
  }
  switch (role) {
    case Nonlinearity::f:
      return sigma * v / (2.0 * (1.0 + v * v));
    case Nonlinearity::g:
      return v / ((1.0 + std::exp(sigma)) * (1.0 + v * v));
    case Nonlinearity::zeta:
      // Continuous extension: |2 s^2 cos(v/s)| <= 2 s^2 -> 0.
      if (sigma == 0.0) return 0.0;
      return 2.0 * sigma * sigma * std::cos(v / sigma);
  }
  return 0.0;
}

const ScalarMap& NonlinearitySpec::get(Nonlinearity which) const {
  switch (which) {
    case Nonlinearity::f:
      return f;
    case Nonlinearity::g:
      return g;
    case Nonlinearity::zeta:
      break;
  }
  return zeta;
}

double PowerWeight::operator()(double sigma) const {
  if (power == 0.0) return coefficient;
  return coefficient * std::pow(sigma, power);
}

double PowerWeight::l1_norm(double horizon) const {
  return std::abs(coefficient) * std::pow(horizon, power + 1.0) / (power + 1.0);
}

GrowthEnvelope GrowthEnvelope::stated() {
  GrowthEnvelope e;
  e.tau_f = {0.25, 2.0};
  e.tau_g = {0.25, 0.0};
  e.tau_zeta = {1.0, 2.0};
  e.omega_f = e.omega_g = e.omega_zeta = {0.0, 1.0};
  return e;
}

GrowthEnvelope GrowthEnvelope::example_safe(int state_dim) {
  GrowthEnvelope e = stated();
  e.tau_zeta = {4.0, 4.0};
  e.omega_zeta = {static_cast<double>(state_dim), 0.0};
  return e;
}

SpectralModel::SpectralModel(std::vector<double> eigenvalues, MemoryKernel kernel,
                             ControlOperatorSpec control, QWienerSpec noise,
                             NonlinearitySpec nonlinearity, double horizon,
                             std::string basis_label)
    : eigenvalues_(std::move(eigenvalues)),
      kernel_(kernel),
      control_(control),
      noise_(std::move(noise)),
      nonlinearity_(std::move(nonlinearity)),
      horizon_(horizon),
      basis_label_(std::move(basis_label)) {
  if (eigenvalues_.empty()) throw StructuralError("model: at least one mode required");
  if (control_.kind() == ControlOperatorSpec::Kind::example && eigenvalues_.size() < 2) {
    throw StructuralError("model: the mixing control operator needs N >= 2");
  }
  for (std::size_t n = 0; n < eigenvalues_.size(); ++n) {
    if (!(eigenvalues_[n] < 0.0) || !std::isfinite(eigenvalues_[n])) {
      throw StructuralError("model: eigenvalue " + std::to_string(n + 1) + " must be negative");
    }
    if (n > 0 && eigenvalues_[n] > eigenvalues_[n - 1]) {
      throw StructuralError("model: eigenvalues must be non-increasing");
    }
  }
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw StructuralError("model: horizon must be positive");
  }
  if (noise_.modes() != dim()) {
    throw StructuralError("model: noise modes must equal state modes (diagonal identification)");
  }
}

SpectralModel SpectralModel::with_nonlinearity(NonlinearitySpec nonlinearity) const {
  SpectralModel copy = *this;
  copy.nonlinearity_ = std::move(nonlinearity);
  return copy;
}

SpectralModel SpectralModel::with_noise(QWienerSpec noise) const {
  return SpectralModel(eigenvalues_, kernel_, control_, std::move(noise), nonlinearity_, horizon_,
                       basis_label_);
}

std::vector<double> dirichlet_laplacian_eigenvalues(int modes) {
  std::vector<double> a(modes);
  for (int n = 1; n <= modes; ++n) a[n - 1] = -static_cast<double>(n) * n;
  return a;
}

SpectralModel example_model(int modes, double horizon, MemoryKernel kernel) {
  return SpectralModel(dirichlet_laplacian_eigenvalues(modes), kernel,
                       ControlOperatorSpec(ControlOperatorSpec::Kind::example),
                       QWienerSpec::inverse_square(modes), NonlinearitySpec::example(),
                       horizon, "sqrt(2/pi) sin(n x)");
}

SpectralField apply_A(const SpectralModel& model, const SpectralField& v) {
  if (v.size() != model.dim()) throw StructuralError("apply_A: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> a(model.eigenvalues().data(), model.dim());
  return a.cwiseProduct(v);
}

SpectralField apply_C(const ControlOperatorSpec& spec, const ControlField& u, int state_dim) {
  return spec.apply(u, state_dim);
}

SpectralField eval_nonlinearity(const NonlinearitySpec& spec, Nonlinearity which, double sigma,
                                const SpectralField& v) {
  const ScalarMap& map = spec.get(which);
  SpectralField out(v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) out(n) = map.evaluate(which, sigma, v(n));
  return out;
}

}  // namespace amctl
