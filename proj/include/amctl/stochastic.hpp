#pragma once

#include <cstdint>
#include <iosfwd>

#include "amctl/resolvent.hpp"

namespace amctl {

// Sampled Q-Wiener increments, one row per noise mode. Column i holds the
// increment over [sigma_i, sigma_{i+1}], distributed N(0, lambda_k * step).
class QWienerPath {
 public:
  QWienerPath(TimeGrid grid, Eigen::MatrixXd increments, std::uint64_t seed,
              std::uint64_t stream);

  const TimeGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& increments() const { return increments_; }
  int modes() const { return static_cast<int>(increments_.rows()); }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // W_k(sigma_j) = sum_{i < j} dW_k(i), for every mode.
  SpectralField value(int node) const;
  // Full reconstruction, modes x (m + 1).
  Eigen::MatrixXd cumulative() const;

 private:
  TimeGrid grid_;
  Eigen::MatrixXd increments_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

// Draws a path from the counter-based generator. Identical (seed, stream)
// yields an identical path; streams index Monte Carlo paths.
QWienerPath sample_path(const QWienerSpec& noise, const TimeGrid& grid, std::uint64_t seed,
                        std::uint64_t stream = 0);

// All-zero increments: the noise-free limit.
QWienerPath zero_path(int modes, const TimeGrid& grid);

// Left-endpoint sum  sum_{i < j_end} R(sigma_{j_end} - sigma_i) G(sigma_i) dW(i),
// with the diagonal noise-to-state identification (noise mode n drives state mode n).
SpectralField ito_convolution(const ResolventTable& table, const FieldHistory& integrand,
                              const QWienerPath& path, int j_end);
// The same sum for every j_end = 0..m at once.
FieldHistory ito_convolution_all(const ResolventTable& table, const FieldHistory& integrand,
                                 const QWienerPath& path);

// Trapezoid rule for  int_0^{sigma_{j_end}} R(sigma_{j_end} - s) F(s) ds.
SpectralField det_convolution(const ResolventTable& table, const FieldHistory& integrand,
                              int j_end);
FieldHistory det_convolution_all(const ResolventTable& table, const FieldHistory& integrand);

void write_path_csv(std::ostream& out, const QWienerPath& path);

}  // namespace amctl
