#include "vspinn/ntk.hpp"

#include "vspinn/rng.hpp"
#include "vspinn/tape.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace vspinn {

namespace {

/// Squared parameter-gradient norm of one scalar output per point, summed
/// over parameter leaves only.
double grad_norm_sq(const Tape& tape, std::uint32_t seed_id, std::uint32_t n_params,
                    AlignedDoubles& scratch) {
  tape.backward_into(seed_id, scratch);
  double acc = 0.0;
  for (std::uint32_t i = 0; i < n_params; ++i) acc += scratch[i] * scratch[i];
  return acc;
}

std::vector<double> per_point_kuu(const MlpConfig& config, const MlpParams& params,
                                  std::span<const double> points) {
  const int dim = config.input_dim;
  const int P = static_cast<int>(points.size()) / dim;
  if (P == 0) throw std::invalid_argument("trace_kuu: empty point set");
  Tape tape;
  AlignedDoubles adj;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    tape.reset();
    const LiftedMlp net = lift_params(tape, config, params);
    const auto u = forward(tape, net, points.subspan(static_cast<std::size_t>(p) * dim,
                                                     static_cast<std::size_t>(dim)));
    out.push_back(grad_norm_sq(tape, u[0].id, net.n_params, adj));
  }
  return out;
}

std::vector<double> per_point_krr(const MlpConfig& config, const MlpParams& params,
                                  std::span<const double> points) {
  const int dim = config.input_dim;
  const int P = static_cast<int>(points.size()) / dim;
  if (P == 0) throw std::invalid_argument("trace_krr: empty point set");
  Tape tape;
  AlignedDoubles adj;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    tape.reset();
    const LiftedMlp net = lift_params(tape, config, params);
    const auto jets = forward_jet(tape, net, points.subspan(static_cast<std::size_t>(p) * dim,
                                                            static_cast<std::size_t>(dim)),
                                  0);
    out.push_back(grad_norm_sq(tape, jets[0].d2.id, net.n_params, adj));
  }
  return out;
}

double mean(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

}  // namespace

double trace_kuu(const MlpConfig& config, const MlpParams& params,
                 std::span<const double> points) {
  return mean(per_point_kuu(config, params, points));
}

double trace_krr(const MlpConfig& config, const MlpParams& params,
                 std::span<const double> points) {
  return mean(per_point_krr(config, params, points));
}

double closed_form_kuu_limit(double x) {
  const double x2 = x * x;
  return 21.0 * x2 * x2 * x2 + 63.0 * x2 * x2 + 63.0 * x2 + 21.0;
}

double avg_rate(const MlpConfig& config, const MlpParams& params,
                std::span<const double> boundary_points, std::span<const double> interior_points) {
  return trace_kuu(config, params, boundary_points) +
         trace_krr(config, params, interior_points);
}

SlopeFit loglog_slope_fit(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("loglog_slope: need at least 2 pairs");
  const auto n = static_cast<double>(pairs.size());
  double sx = 0, sy = 0;
  for (const auto& [N, value] : pairs) {
    if (!(N > 0.0) || !(value > 0.0)) {
      throw std::invalid_argument("loglog_slope: values must be positive");
    }
    sx += std::log(N);
    sy += std::log(value);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [N, value] : pairs) {
    const double dx = std::log(N) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(value) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: scales are all equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (pairs.size() > 2) {
    double ss_res = 0;
    for (const auto& [N, value] : pairs) {
      const double r = std::log(value) - (fit.intercept + fit.slope * std::log(N));
      ss_res += r * r;
    }
    const double se = std::sqrt(ss_res / (n - 2.0) / sxx);
    fit.half_width = 2.0 * se;
  }
  return fit;
}

std::pair<double, double> loglog_slope(std::span<const std::pair<double, double>> pairs) {
  const SlopeFit fit = loglog_slope_fit(pairs);
  return {fit.slope, fit.intercept};
}

// ---- kernel matrices -------------------------------------------------------------

namespace {

constexpr int kMatrixPointCap = 256;

/// Stacks per-point parameter gradients of a scalar (value or u_xx) as
/// columns of an n_params x P matrix.
Eigen::MatrixXd gradient_stack(const MlpConfig& config, const MlpParams& params,
                               std::span<const double> points, bool second_derivative) {
  const int dim = config.input_dim;
  const int P = static_cast<int>(points.size()) / dim;
  if (P == 0) throw std::invalid_argument("kernel matrix: empty point set");
  if (P > kMatrixPointCap) {
    throw std::invalid_argument("kernel matrix: point set exceeds the 256-point memory guard");
  }
  Eigen::MatrixXd G(params.n_params(), P);
  Tape tape;
  AlignedDoubles adj;
  for (int p = 0; p < P; ++p) {
    tape.reset();
    const LiftedMlp net = lift_params(tape, config, params);
    const auto pt = points.subspan(static_cast<std::size_t>(p) * dim,
                                   static_cast<std::size_t>(dim));
    std::uint32_t seed_id;
    if (second_derivative) {
      seed_id = forward_jet(tape, net, pt, 0)[0].d2.id;
    } else {
      seed_id = forward(tape, net, pt)[0].id;
    }
    tape.backward_into(seed_id, adj);
    for (std::uint32_t i = 0; i < net.n_params; ++i) G(i, p) = adj[i];
  }
  return G;
}

}  // namespace

Eigen::MatrixXd kuu_matrix(const MlpConfig& config, const MlpParams& params,
                           std::span<const double> points) {
  const Eigen::MatrixXd G = gradient_stack(config, params, points, false);
  return G.transpose() * G;
}

Eigen::MatrixXd krr_matrix(const MlpConfig& config, const MlpParams& params,
                           std::span<const double> points) {
  const Eigen::MatrixXd G = gradient_stack(config, params, points, true);
  return G.transpose() * G;
}

Eigen::MatrixXd kru_matrix(const MlpConfig& config, const MlpParams& params,
                           std::span<const double> interior_points,
                           std::span<const double> boundary_points) {
  const Eigen::MatrixXd Gr = gradient_stack(config, params, interior_points, true);
  const Eigen::MatrixXd Gu = gradient_stack(config, params, boundary_points, false);
  return Gr.transpose() * Gu;
}

// ---- measurement driver ------------------------------------------------------------

NtkReport measure_ntk(const MlpConfig& architecture, std::span<const double> scales,
                      int n_boundary, int n_interior, int n_seeds, std::uint64_t seed) {
  if (n_boundary < 1 || n_interior < 1 || n_seeds < 1) {
    throw std::invalid_argument("measure_ntk: counts must be >= 1");
  }
  NtkReport report;
  report.width = architecture.hidden.front();
  report.n_seeds = n_seeds;
  report.n_boundary = n_boundary;
  report.n_interior = n_interior;
  report.seed = seed;

  for (std::size_t si = 0; si < scales.size(); ++si) {
    const double N = scales[si];
    Rng rng(Rng::derive(seed, 0x71C, si));
    std::vector<double> bpts(static_cast<std::size_t>(n_boundary));
    for (auto& x : bpts) x = (rng.uniform01() < 0.5) ? 0.0 : N;
    std::vector<double> ipts(static_cast<std::size_t>(n_interior));
    for (auto& x : ipts) x = rng.uniform(0.0, N);

    NtkRow row;
    row.N = N;
    row.kuu_points.assign(bpts.size(), 0.0);
    row.krr_points.assign(ipts.size(), 0.0);
    std::vector<double> kuu_seeds, krr_seeds;
    for (int s = 0; s < n_seeds; ++s) {
      MlpConfig config = architecture;
      config.seed = Rng::derive(seed, 0x5EED, si * 1000 + static_cast<std::uint64_t>(s));
      const MlpParams params = init_params(config);
      const auto kuu_pts = per_point_kuu(config, params, bpts);
      const auto krr_pts = per_point_krr(config, params, ipts);
      for (std::size_t p = 0; p < kuu_pts.size(); ++p) row.kuu_points[p] += kuu_pts[p] / n_seeds;
      for (std::size_t p = 0; p < krr_pts.size(); ++p) row.krr_points[p] += krr_pts[p] / n_seeds;
      kuu_seeds.push_back(mean(kuu_pts));
      krr_seeds.push_back(mean(krr_pts));
    }
    row.kuu = mean(kuu_seeds);
    row.krr = mean(krr_seeds);
    auto stderr_of = [&](const std::vector<double>& xs, double m) {
      if (xs.size() < 2) return 0.0;
      double ss = 0;
      for (double x : xs) ss += (x - m) * (x - m);
      return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                       static_cast<double>(xs.size()));
    };
    row.kuu_se = stderr_of(kuu_seeds, row.kuu);
    row.krr_se = stderr_of(krr_seeds, row.krr);
    report.rows.push_back(std::move(row));
  }

  if (report.rows.size() >= 2) {
    std::vector<std::pair<double, double>> kuu_pairs, krr_pairs;
    for (const auto& row : report.rows) {
      kuu_pairs.emplace_back(row.N, row.kuu);
      krr_pairs.emplace_back(row.N, row.krr);
    }
    report.kuu_fit = loglog_slope_fit(kuu_pairs);
    report.krr_fit = loglog_slope_fit(krr_pairs);
  }
  return report;
}

void NtkReport::write_csv(std::ostream& out) const {
  out << "N,trace_kuu,trace_krr\n";
  char buf[40];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.N);
    out << buf;
    std::snprintf(buf, sizeof buf, "%.17g", row.kuu);
    out << "," << buf;
    std::snprintf(buf, sizeof buf, "%.17g", row.krr);
    out << "," << buf << "\n";
  }
}

void NtkReport::write_report(std::ostream& out) const {
  out << "NTK trace report\n";
  out << "width " << width << ", seeds " << n_seeds << ", boundary points " << n_boundary
      << ", interior points " << n_interior << ", base seed " << seed << "\n\n";
  for (const auto& row : rows) {
    out << "N = " << row.N << ": Tr(K_uu)/N_b = " << row.kuu << " (se " << row.kuu_se
        << "), Tr(K_rr)/N_r = " << row.krr << " (se " << row.krr_se << ")\n";
  }
  out << "\nlog-log slope Tr(K_uu)/N_b: " << kuu_fit.slope << " +- " << kuu_fit.half_width
      << " (intercept " << kuu_fit.intercept << ")\n";
  out << "log-log slope Tr(K_rr)/N_r: " << krr_fit.slope << " +- " << krr_fit.half_width
      << " (intercept " << krr_fit.intercept << ")\n";
}

}  // namespace vspinn
