#include "vspinn/reference.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vspinn {

std::size_t ReferenceGrid::n_points() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.size();
  return n;
}

void ReferenceGrid::validate() const {
  if (axes.empty()) throw std::invalid_argument("reference grid: no axes");
  for (const auto& axis : axes) {
    if (axis.empty()) throw std::invalid_argument("reference grid: empty axis");
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (!(axis[i] > axis[i - 1])) {
        throw std::invalid_argument("reference grid: axis not strictly increasing");
      }
    }
  }
  if (fields.empty()) throw std::invalid_argument("reference grid: no fields");
  for (const auto& f : fields) {
    if (f.size() != n_points()) {
      throw std::invalid_argument("reference grid: field size does not match axes");
    }
  }
}

std::vector<double> ReferenceGrid::flat_points() const {
  const int d = dim();
  std::vector<std::size_t> lens(d);
  for (int i = 0; i < d; ++i) lens[i] = axes[i].size();
  std::vector<double> pts;
  pts.reserve(n_points() * d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t p = 0; p < n_points(); ++p) {
    for (int i = 0; i < d; ++i) pts.push_back(axes[i][idx[i]]);
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] < lens[i]) break;
      idx[i] = 0;
    }
  }
  return pts;
}

ReferenceGrid allen_cahn_reference(int nx, int nt) {
  if (nx < 256 || nt < 1000) {
    throw std::invalid_argument("allen_cahn_reference: resolution floor is nx>=256, nt>=1000");
  }
  constexpr double kEps = 1e-4;
  const double h = 2.0 / nx;
  const double dt = 1.0 / nt;
  const double alpha = dt * kEps / (h * h);

  // Second-order IMEX (Crank-Nicolson diffusion, Adams-Bashforth-2 reaction):
  //   (I - a/2 D) u^{n+1} = (I + a/2 D) u^n + dt (3/2 f(u^n) - 1/2 f(u^{n-1})),
  // with D the periodic second-difference stencil and f(u) = 5u - 5u^3.
  // The cyclic tridiagonal solve uses Sherman-Morrison over a Thomas sweep.
  const int n = nx;
  const double off = -0.5 * alpha;
  const double diag = 1.0 + alpha;
  const double gamma = -diag;
  std::vector<double> d(n, diag);
  d[0] = diag - gamma;
  d[n - 1] = diag - off * off / gamma;

  // Thomas forward coefficients are constant per run; precompute them.
  std::vector<double> cp(n);  // modified super-diagonal
  {
    cp[0] = off / d[0];
    for (int i = 1; i < n; ++i) cp[i] = off / (d[i] - off * cp[i - 1]);
  }
  auto thomas = [&](std::vector<double>& rhs) {
    rhs[0] /= d[0];
    for (int i = 1; i < n; ++i) rhs[i] = (rhs[i] - off * rhs[i - 1]) / (d[i] - off * cp[i - 1]);
    for (int i = n - 2; i >= 0; --i) rhs[i] -= cp[i] * rhs[i + 1];
  };

  // Correction vector z solves T' z = w with w = (gamma, 0, ..., off).
  std::vector<double> z(n, 0.0);
  z[0] = gamma;
  z[n - 1] = off;
  thomas(z);
  const double denom = 1.0 + z[0] + (off / gamma) * z[n - 1];
  auto solve_cyclic = [&](std::vector<double>& rhs) {
    thomas(rhs);
    const double correction = (rhs[0] + (off / gamma) * rhs[n - 1]) / denom;
    for (int i = 0; i < n; ++i) rhs[i] -= correction * z[i];
  };

  std::vector<double> u(n), f_prev(n), rhs(n);
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + i * h;
    u[i] = x * x * std::cos(M_PI * x);
  }
  auto reaction = [](double v) { return 5.0 * v - 5.0 * v * v * v; };
  auto cn_rhs_diffusion = [&](const std::vector<double>& v, int i) {
    const double left = v[(i + n - 1) % n], right = v[(i + 1) % n];
    return v[i] + 0.5 * alpha * (left - 2.0 * v[i] + right);
  };

  const int save_every = std::max(1, nt / 100);
  ReferenceGrid grid;
  grid.provenance = "allen_cahn IMEX nx=" + std::to_string(nx) + " nt=" + std::to_string(nt);
  grid.axes.resize(2);
  for (int i = 0; i <= nx; ++i) grid.axes[0].push_back(-1.0 + i * h);
  grid.fields.resize(1);

  std::vector<std::vector<double>> slices;
  auto save_slice = [&](double t) {
    grid.axes[1].push_back(t);
    slices.emplace_back(u.begin(), u.end());
    slices.back().push_back(u[0]);  // duplicated periodic node x = +1
  };
  save_slice(0.0);

  for (int step = 1; step <= nt; ++step) {
    if (step == 1) {
      // bootstrap with one IMEX Euler step (Crank-Nicolson diffusion)
      for (int i = 0; i < n; ++i) {
        f_prev[i] = reaction(u[i]);
        rhs[i] = cn_rhs_diffusion(u, i) + dt * f_prev[i];
      }
    } else {
      for (int i = 0; i < n; ++i) rhs[i] = cn_rhs_diffusion(u, i);
      for (int i = 0; i < n; ++i) {
        const double f_now = reaction(u[i]);
        rhs[i] += dt * (1.5 * f_now - 0.5 * f_prev[i]);
        f_prev[i] = f_now;
      }
    }
    solve_cyclic(rhs);
    u = rhs;
    if (step % save_every == 0 || step == nt) save_slice(step * dt);
  }

  // Re-pack slices into row-major (x-major) order.
  const std::size_t n_x = grid.axes[0].size();
  const std::size_t n_t = grid.axes[1].size();
  grid.fields[0].resize(n_x * n_t);
  for (std::size_t i = 0; i < n_x; ++i) {
    for (std::size_t j = 0; j < n_t; ++j) grid.fields[0][i * n_t + j] = slices[j][i];
  }
  grid.validate();
  return grid;
}

void save_reference(const std::string& path, const ReferenceGrid& grid) {
  grid.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open grid file for writing: " + path);
  char buf[40];
  for (const auto& axis : grid.axes) out << axis.size() << ",";
  out << grid.fields.size() << "\n";
  for (const auto& axis : grid.axes) {
    for (std::size_t i = 0; i < axis.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", axis[i]);
      out << buf << (i + 1 == axis.size() ? "" : ",");
    }
    out << "\n";
  }
  const std::size_t last_len = grid.axes.back().size();
  for (const auto& field : grid.fields) {
    for (std::size_t i = 0; i < field.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", field[i]);
      out << buf << ((i + 1) % last_len == 0 ? "\n" : ",");
    }
  }
}

namespace {

std::vector<double> parse_csv_row(const std::string& line) {
  std::vector<double> out;
  std::istringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    out.push_back(v);
  }
  return out;
}

}  // namespace

ReferenceGrid load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("grid file is empty: " + path);
  const auto header = parse_csv_row(line);
  if (header.size() < 2) throw std::runtime_error("grid header needs axis sizes + field count");
  ReferenceGrid grid;
  grid.provenance = path;
  const int n_axes = static_cast<int>(header.size()) - 1;
  const int n_fields = static_cast<int>(header.back());
  if (n_fields < 1) throw std::runtime_error("grid header: field count must be >= 1");
  std::size_t expected = 1;
  for (int i = 0; i < n_axes; ++i) {
    const auto size = static_cast<std::size_t>(header[static_cast<std::size_t>(i)]);
    if (size == 0) throw std::runtime_error("grid header: zero axis size");
    if (!std::getline(in, line)) throw std::runtime_error("grid file truncated in axes");
    auto axis = parse_csv_row(line);
    if (axis.size() != size) {
      throw std::runtime_error("grid axis row has " + std::to_string(axis.size()) +
                               " values, header says " + std::to_string(size));
    }
    expected *= size;
    grid.axes.push_back(std::move(axis));
  }
  for (int f = 0; f < n_fields; ++f) {
    std::vector<double> field;
    field.reserve(expected);
    while (field.size() < expected && std::getline(in, line)) {
      const auto row = parse_csv_row(line);
      field.insert(field.end(), row.begin(), row.end());
    }
    if (field.size() != expected) {
      throw std::runtime_error("grid field " + std::to_string(f) + " has " +
                               std::to_string(field.size()) + " values, expected " +
                               std::to_string(expected));
    }
    grid.fields.push_back(std::move(field));
  }
  grid.validate();
  return grid;
}

}  // namespace vspinn
