#pragma once

#include "vspinn/mlp.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace vspinn {

/// (1/N_b) sum_j ||d u(x_b^j)/d theta||^2: averaged trace of the boundary
/// kernel K_uu, one reverse pass per point. points are flat, input_dim many
/// coordinates per point.
double trace_kuu(const MlpConfig& config, const MlpParams& params,
                 std::span<const double> points);

/// (1/N_r) sum_i ||d u_xx(x_r^i)/d theta||^2 for 1D input, u_xx taken from
/// the order-2 jet along coordinate 0. The b2 contribution is exactly zero.
double trace_krr(const MlpConfig& config, const MlpParams& params,
                 std::span<const double> points);

/// Infinite-width limit of the per-point K_uu trace for the one-hidden-layer
/// cubic_relu network with N(0,1) parameters: 21x^6 + 63x^4 + 63x^2 + 21.
double closed_form_kuu_limit(double x);

/// Averaged convergence rate Tr(K_uu)/N_b + Tr(K_rr)/N_r.
double avg_rate(const MlpConfig& config, const MlpParams& params,
                std::span<const double> boundary_points, std::span<const double> interior_points);

/// Least-squares fit of log(value) against log(N); all values must be > 0.
std::pair<double, double> loglog_slope(std::span<const std::pair<double, double>> pairs);
/// Same fit plus a ~95% half-width for the slope (2 x standard error).
struct SlopeFit {
  double slope = 0, intercept = 0, half_width = 0;
};
SlopeFit loglog_slope_fit(std::span<const std::pair<double, double>> pairs);

/// Full kernel matrices, exposed only for small point sets (O(n^2) memory
/// guard at 256 points).
Eigen::MatrixXd kuu_matrix(const MlpConfig& config, const MlpParams& params,
                           std::span<const double> points);
Eigen::MatrixXd krr_matrix(const MlpConfig& config, const MlpParams& params,
                           std::span<const double> points);
Eigen::MatrixXd kru_matrix(const MlpConfig& config, const MlpParams& params,
                           std::span<const double> interior_points,
                           std::span<const double> boundary_points);

struct NtkRow {
  double N = 1;
  double kuu = 0, kuu_se = 0;
  double krr = 0, krr_se = 0;
  std::vector<double> kuu_points, krr_points;  // per-point contributions (seed means)
};

struct NtkReport {
  int width = 0, n_seeds = 0, n_boundary = 0, n_interior = 0;
  std::uint64_t seed = 0;
  std::vector<NtkRow> rows;
  SlopeFit kuu_fit, krr_fit;

  void write_csv(std::ostream& out) const;     // N,trace_kuu,trace_krr rows
  void write_report(std::ostream& out) const;  // structured text report
};

/// Measures averaged traces at initialization across scales: for each N,
/// boundary points are uniform on {0, N} and interior points uniform on
/// (0, N); traces are averaged over n_seeds independent initializations of
/// the given architecture and the log-log slopes are fitted.
NtkReport measure_ntk(const MlpConfig& architecture, std::span<const double> scales,
                      int n_boundary, int n_interior, int n_seeds, std::uint64_t seed);

}  // namespace vspinn
