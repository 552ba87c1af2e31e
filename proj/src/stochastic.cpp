#include "amctl/stochastic.hpp"

#include <cmath>
#include <ostream>

#include "amctl/csv.hpp"
#include "amctl/philox.hpp"

namespace amctl {

QWienerPath::QWienerPath(TimeGrid grid, Eigen::MatrixXd increments, std::uint64_t seed,
                         std::uint64_t stream)
    : grid_(grid), increments_(std::move(increments)), seed_(seed), stream_(stream) {
  if (increments_.cols() != grid_.steps()) {
    throw StructuralError("Q-Wiener path: one increment column per grid step required");
  }
}

SpectralField QWienerPath::value(int node) const {
  if (node < 0 || node > grid_.steps()) throw StructuralError("Q-Wiener path: node out of range");
  SpectralField w = SpectralField::Zero(modes());
  for (int i = 0; i < node; ++i) w += increments_.col(i);
  return w;
}

Eigen::MatrixXd QWienerPath::cumulative() const {
  Eigen::MatrixXd w(modes(), grid_.steps() + 1);
  w.col(0).setZero();
  for (int i = 0; i < grid_.steps(); ++i) w.col(i + 1) = w.col(i) + increments_.col(i);
  return w;
}

QWienerPath sample_path(const QWienerSpec& noise, const TimeGrid& grid, std::uint64_t seed,
                        std::uint64_t stream) {
  const int modes = noise.modes();
  Eigen::MatrixXd dw(modes, grid.steps());
  for (int k = 0; k < modes; ++k) {
    const double scale = std::sqrt(noise.mode_variances()[k] * grid.step());
    for (int i = 0; i < grid.steps(); ++i) {
      dw(k, i) = scale * philox_normal(seed, stream, static_cast<std::uint32_t>(k),
                                       static_cast<std::uint32_t>(i));
    }
  }
  return QWienerPath(grid, std::move(dw), seed, stream);
}

QWienerPath zero_path(int modes, const TimeGrid& grid) {
  return QWienerPath(grid, Eigen::MatrixXd::Zero(modes, grid.steps()), 0, 0);
}

namespace {

void check_history(const ResolventTable& table, const FieldHistory& integrand, const char* who) {
  if (integrand.rows() != table.modes() || integrand.cols() != table.grid().steps() + 1) {
    throw StructuralError(std::string(who) + ": integrand must be modes x (steps + 1)");
  }
}

void check_path(const ResolventTable& table, const QWienerPath& path) {
  if (path.modes() != table.modes()) {
    throw StructuralError("ito_convolution: noise modes (" + std::to_string(path.modes()) +
                          ") must equal state modes (" + std::to_string(table.modes()) + ")");
  }
  if (!(path.grid() == table.grid())) {
    throw StructuralError("ito_convolution: path and table grids differ");
  }
}

void check_node(const ResolventTable& table, int j_end) {
  if (j_end < 0 || j_end > table.grid().steps()) {
    throw StructuralError("convolution: end node out of range");
  }
}

}  // namespace

SpectralField ito_convolution(const ResolventTable& table, const FieldHistory& integrand,
                              const QWienerPath& path, int j_end) {
  check_history(table, integrand, "ito_convolution");
  check_path(table, path);
  check_node(table, j_end);
  SpectralField out = SpectralField::Zero(table.modes());
  for (int i = 0; i < j_end; ++i) {
    out += table.at(j_end - i)
               .cwiseProduct(integrand.col(i))
               .cwiseProduct(path.increments().col(i));
  }
  return out;
}

FieldHistory ito_convolution_all(const ResolventTable& table, const FieldHistory& integrand,
                                 const QWienerPath& path) {
  check_history(table, integrand, "ito_convolution");
  check_path(table, path);
  const int m = table.grid().steps();
  const int modes = table.modes();
  FieldHistory out(modes, m + 1);
  std::vector<double> weighted(m);
  std::vector<double> r(m + 1);
  for (int n = 0; n < modes; ++n) {
    for (int i = 0; i < m; ++i) weighted[i] = integrand(n, i) * path.increments()(n, i);
    for (int j = 0; j <= m; ++j) r[j] = table.value(n, j);
    for (int j = 0; j <= m; ++j) {
      double acc = 0.0;
      for (int i = 0; i < j; ++i) acc += r[j - i] * weighted[i];
      out(n, j) = acc;
    }
  }
  return out;
}

SpectralField det_convolution(const ResolventTable& table, const FieldHistory& integrand,
                              int j_end) {
  check_history(table, integrand, "det_convolution");
  check_node(table, j_end);
  SpectralField out = SpectralField::Zero(table.modes());
  const TimeGrid& grid = table.grid();
  for (int i = 0; i <= j_end; ++i) {
    out += grid.trapezoid_weight(i, j_end) * table.at(j_end - i).cwiseProduct(integrand.col(i));
  }
  return out;
}

FieldHistory det_convolution_all(const ResolventTable& table, const FieldHistory& integrand) {
  check_history(table, integrand, "det_convolution");
  const int m = table.grid().steps();
  const double h = table.grid().step();
  const int modes = table.modes();
  FieldHistory out(modes, m + 1);
  std::vector<double> r(m + 1);
  std::vector<double> f(m + 1);
  for (int n = 0; n < modes; ++n) {
    for (int j = 0; j <= m; ++j) {
      r[j] = table.value(n, j);
      f[j] = integrand(n, j);
    }
    out(n, 0) = 0.0;
    for (int j = 1; j <= m; ++j) {
      double acc = 0.5 * (r[j] * f[0] + r[0] * f[j]);
      for (int i = 1; i < j; ++i) acc += r[j - i] * f[i];
      out(n, j) = h * acc;
    }
  }
  return out;
}

void write_path_csv(std::ostream& out, const QWienerPath& path) {
  CsvWriter csv(out);
  csv.cell("step");
  for (int k = 0; k < path.modes(); ++k) csv.cell("dW_" + std::to_string(k + 1));
  csv.end_row();
  for (int i = 0; i < path.grid().steps(); ++i) {
    csv.cell(i + 1);
    for (int k = 0; k < path.modes(); ++k) csv.cell(path.increments()(k, i));
    csv.end_row();
  }
}

}  // namespace amctl
