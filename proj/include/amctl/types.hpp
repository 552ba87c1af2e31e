#pragma once

#include <Eigen/Dense>

#include "amctl/errors.hpp"

namespace amctl {

// Coefficients of a state in the truncated eigenbasis.
using SpectralField = Eigen::VectorXd;
// Coefficients of a control value.
using ControlField = Eigen::VectorXd;
// Column j holds a field at grid node j.
using FieldHistory = Eigen::MatrixXd;

// Selects the OpenMP kernel or the serial reference it is tested against.
enum class Execution { serial, parallel };

// Uniform grid sigma_j = j * c / m on [0, c].
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double step() const { return step_; }
  double node(int j) const { return j == steps_ ? horizon_ : j * step_; }
  int nearest_node(double t) const;

  // Composite trapezoid weight of node i for an integral over [0, sigma_{j_end}].
  double trapezoid_weight(int i, int j_end) const {
    if (j_end == 0) return 0.0;
    return (i == 0 || i == j_end) ? 0.5 * step_ : step_;
  }

  bool operator==(const TimeGrid& other) const {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

 private:
  double horizon_;
  int steps_;
  double step_;
};

}  // namespace amctl
