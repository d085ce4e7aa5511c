#include "vspinn/problems.hpp"

#include <cmath>

namespace vspinn {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> divide_coords(std::span<const double> pt, const ScaleMap& scale) {
  std::vector<double> out(pt.size());
  for (std::size_t i = 0; i < pt.size(); ++i) out[i] = pt[i] / scale.factors[i];
  return out;
}

double face_coordinate(const ProblemSpec& spec, const Locus& locus) {
  return locus.at_upper ? spec.scaled_hi(locus.axis) : spec.scaled_lo(locus.axis);
}

/// Builds original-derivative FieldJets for one point from any source of
/// scaled-coordinate jets; factor N^k is applied per the chain rule
/// D^k u = N^k D^k v.
template <typename ValueFn, typename D1Fn, typename D2Fn>
std::vector<FieldJets> build_field_jets(const ProblemSpec& spec, ValueFn value, D1Fn d1, D2Fn d2) {
  std::vector<FieldJets> fields(spec.n_outputs);
  const int dim = spec.dim();
  for (int c = 0; c < spec.n_outputs; ++c) {
    FieldJets& f = fields[c];
    f.u = value(c);
    f.d1.resize(dim);
    f.d2.resize(dim);
    int jet_idx = 0;
    for (int i = 0; i < dim; ++i) {
      if (spec.deriv_order[i] < 1) continue;
      const double N = spec.scale.factor(i);
      Var g1 = d1(c, jet_idx);
      f.d1[i] = (N == 1.0) ? g1 : g1 * N;
      if (spec.deriv_order[i] >= 2) {
        Var g2 = d2(c, jet_idx);
        f.d2[i] = (N == 1.0) ? g2 : g2 * (N * N);
      }
      ++jet_idx;
    }
  }
  return fields;
}

}  // namespace

std::optional<Circle> ProblemSpec::scaled_hole() const {
  if (!geometry.hole) return std::nullopt;
  const Circle& h = *geometry.hole;
  const double fx = scale.factor(0), fy = scale.factor(1);
  // Scaling must be isotropic where a circular hole exists.
  return Circle{h.cx * fx, h.cy * fy, h.r * fx};
}

bool ProblemSpec::contains_scaled(std::span<const double> pt) const {
  for (int i = 0; i < dim(); ++i) {
    if (!(pt[i] > scaled_lo(i) && pt[i] < scaled_hi(i))) return false;
  }
  if (auto h = scaled_hole()) {
    const double dx = pt[0] - h->cx, dy = pt[1] - h->cy;
    if (dx * dx + dy * dy <= h->r * h->r) return false;
  }
  return true;
}

bool ProblemSpec::contains_scaled_closed(std::span<const double> pt, double tol) const {
  for (int i = 0; i < dim(); ++i) {
    const double span = scaled_hi(i) - scaled_lo(i);
    if (pt[i] < scaled_lo(i) - tol * span || pt[i] > scaled_hi(i) + tol * span) return false;
  }
  if (auto h = scaled_hole()) {
    const double dx = pt[0] - h->cx, dy = pt[1] - h->cy;
    if (std::sqrt(dx * dx + dy * dy) < h->r * (1.0 - tol)) return false;
  }
  return true;
}

std::vector<double> ProblemSpec::to_original(std::span<const double> scaled_pt) const {
  return divide_coords(scaled_pt, scale);
}

std::vector<double> ProblemSpec::to_scaled(std::span<const double> original_pt) const {
  std::vector<double> out(original_pt.size());
  for (std::size_t i = 0; i < original_pt.size(); ++i) {
    out[i] = original_pt[i] * scale.factors[i];
  }
  return out;
}

std::vector<int> ProblemSpec::jet_dirs() const {
  std::vector<int> dirs;
  for (int i = 0; i < dim(); ++i) {
    if (deriv_order[i] >= 1) dirs.push_back(i);
  }
  return dirs;
}

bool on_locus(const ProblemSpec& spec, const Locus& locus, std::span<const double> scaled_pt,
              double tol) {
  if (static_cast<int>(scaled_pt.size()) != spec.dim()) return false;
  if (locus.kind == Locus::Kind::Cylinder) {
    auto h = spec.scaled_hole();
    if (!h) return false;
    const double dx = scaled_pt[0] - h->cx, dy = scaled_pt[1] - h->cy;
    return std::abs(std::sqrt(dx * dx + dy * dy) - h->r) <= tol * std::max(1.0, h->r);
  }
  const double face = face_coordinate(spec, locus);
  const double span = spec.scaled_hi(locus.axis) - spec.scaled_lo(locus.axis);
  if (std::abs(scaled_pt[locus.axis] - face) > tol * std::max(1.0, span)) return false;
  for (int i = 0; i < spec.dim(); ++i) {
    if (i == locus.axis) continue;
    const double si = spec.scaled_hi(i) - spec.scaled_lo(i);
    if (scaled_pt[i] < spec.scaled_lo(i) - tol * si || scaled_pt[i] > spec.scaled_hi(i) + tol * si) {
      return false;
    }
  }
  return true;
}

// ---- catalog -------------------------------------------------------------------

namespace {

ProblemSpec make_wave1d() {
  ProblemSpec spec;
  spec.name = "wave1d";
  spec.geometry.lo = {0.0, 0.0};  // (x, t)
  spec.geometry.hi = {1.0, 1.0};
  spec.n_outputs = 1;
  spec.deriv_order = {2, 2};
  spec.scale = {{1.0, 1.0}};
  spec.scalable = {true, true};
  spec.residual = [](Tape&, const std::vector<double>&, const std::vector<FieldJets>& u) {
    return std::vector<Var>{u[0].d2[1] - u[0].d2[0]};
  };

  ConstraintSpec left{"u(0,t)=0", ConstraintKind::Dirichlet,
                      Locus{Locus::Kind::Face, 0, false}, {}, 0, -1, nullptr};
  ConstraintSpec right{"u(1,t)=0", ConstraintKind::Dirichlet,
                       Locus{Locus::Kind::Face, 0, true}, {}, 0, -1, nullptr};
  ConstraintSpec initial{"u(x,0)=0", ConstraintKind::Dirichlet,
                         Locus{Locus::Kind::Face, 1, false}, {}, 0, -1, nullptr};
  ConstraintSpec velocity{"u_t(x,0)=g", ConstraintKind::CoordinateDerivative,
                          Locus{Locus::Kind::Face, 1, false}, {}, 0, 1,
                          [](const std::vector<double>& x) {
                            return 2.0 * kPi * std::sin(2.0 * kPi * x[0]) +
                                   10.0 * kPi * std::sin(10.0 * kPi * x[0]);
                          }};
  spec.constraints = {left, right, initial, velocity};

  spec.exact = [](const std::vector<double>& x) {
    return std::vector<double>{std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]) +
                               std::sin(10 * kPi * x[0]) * std::sin(10 * kPi * x[1])};
  };
  spec.exact_jets = [](const std::vector<double>& x) {
    const double s2x = std::sin(2 * kPi * x[0]), c2x = std::cos(2 * kPi * x[0]);
    const double s2t = std::sin(2 * kPi * x[1]), c2t = std::cos(2 * kPi * x[1]);
    const double s10x = std::sin(10 * kPi * x[0]), c10x = std::cos(10 * kPi * x[0]);
    const double s10t = std::sin(10 * kPi * x[1]), c10t = std::cos(10 * kPi * x[1]);
    ExactJets jets;
    jets.u = {s2x * s2t + s10x * s10t};
    jets.d1 = {{2 * kPi * c2x * s2t + 10 * kPi * c10x * s10t,
                2 * kPi * s2x * c2t + 10 * kPi * s10x * c10t}};
    const double pi2 = kPi * kPi;
    jets.d2 = {{-4 * pi2 * s2x * s2t - 100 * pi2 * s10x * s10t,
                -4 * pi2 * s2x * s2t - 100 * pi2 * s10x * s10t}};
    return jets;
  };
  return spec;
}

ProblemSpec make_allen_cahn() {
  ProblemSpec spec;
  spec.name = "allen_cahn";
  spec.geometry.lo = {-1.0, 0.0};  // (x, t)
  spec.geometry.hi = {1.0, 1.0};
  spec.n_outputs = 1;
  spec.deriv_order = {2, 1};
  spec.scale = {{1.0, 1.0}};
  spec.scalable = {true, false};  // spatial-only scaling
  spec.residual = [](Tape&, const std::vector<double>&, const std::vector<FieldJets>& u) {
    Var cubic = pow_int(u[0].u, 3);
    return std::vector<Var>{u[0].d1[1] - 1e-4 * u[0].d2[0] + 5.0 * cubic - 5.0 * u[0].u};
  };

  ConstraintSpec initial{"u(x,0)=x^2 cos(pi x)", ConstraintKind::Dirichlet,
                         Locus{Locus::Kind::Face, 1, false}, {}, 0, -1,
                         [](const std::vector<double>& x) {
                           return x[0] * x[0] * std::cos(kPi * x[0]);
                         }};
  ConstraintSpec periodic{"u(-1,t)=u(1,t)", ConstraintKind::PeriodicPair,
                          Locus{Locus::Kind::Face, 0, false},
                          Locus{Locus::Kind::Face, 0, true}, 0, -1, nullptr};
  ConstraintSpec periodic_dx{"u_x(-1,t)=u_x(1,t)", ConstraintKind::PeriodicDerivativePair,
                             Locus{Locus::Kind::Face, 0, false},
                             Locus{Locus::Kind::Face, 0, true}, 0, 0, nullptr};
  spec.constraints = {initial, periodic, periodic_dx};
  return spec;
}

ProblemSpec make_boundary_layer(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("boundary_layer: epsilon must be positive");
  ProblemSpec spec;
  spec.name = "boundary_layer";
  spec.geometry.lo = {0.0};
  spec.geometry.hi = {1.0};
  spec.n_outputs = 1;
  spec.deriv_order = {2};
  spec.scale = {{1.0}};
  spec.scalable = {true};
  spec.residual = [epsilon](Tape&, const std::vector<double>&, const std::vector<FieldJets>& u) {
    return std::vector<Var>{epsilon * u[0].d2[0] + u[0].d1[0] + 1.0};
  };
  ConstraintSpec left{"u(0)=0", ConstraintKind::Dirichlet, Locus{Locus::Kind::Face, 0, false},
                      {}, 0, -1, nullptr};
  ConstraintSpec right{"u(1)=0", ConstraintKind::Dirichlet, Locus{Locus::Kind::Face, 0, true},
                       {}, 0, -1, nullptr};
  spec.constraints = {left, right};

  const double amp = 1.0 / (1.0 - std::exp(-1.0 / epsilon));
  spec.exact = [amp, epsilon](const std::vector<double>& x) {
    return std::vector<double>{amp - x[0] - amp * std::exp(-x[0] / epsilon)};
  };
  spec.exact_jets = [amp, epsilon](const std::vector<double>& x) {
    const double e = std::exp(-x[0] / epsilon);
    ExactJets jets;
    jets.u = {amp - x[0] - amp * e};
    jets.d1 = {{-1.0 + (amp / epsilon) * e}};
    jets.d2 = {{-(amp / (epsilon * epsilon)) * e}};
    return jets;
  };
  return spec;
}

ProblemSpec make_poisson(std::function<double(double)> f, ExactFn exact, const char* name) {
  ProblemSpec spec;
  spec.name = name;
  spec.geometry.lo = {0.0};
  spec.geometry.hi = {1.0};
  spec.n_outputs = 1;
  spec.deriv_order = {2};
  spec.scale = {{1.0}};
  spec.scalable = {true};
  // -u_xx = f  =>  residual r = u_xx + f(x)
  spec.residual = [f](Tape& tape, const std::vector<double>& x, const std::vector<FieldJets>& u) {
    return std::vector<Var>{u[0].d2[0] + tape.constant(f(x[0]))};
  };
  ConstraintSpec left{"u(0)=0", ConstraintKind::Dirichlet, Locus{Locus::Kind::Face, 0, false},
                      {}, 0, -1, nullptr};
  ConstraintSpec right{"u(1)=0", ConstraintKind::Dirichlet, Locus{Locus::Kind::Face, 0, true},
                       {}, 0, -1, nullptr};
  spec.constraints = {left, right};
  spec.exact = std::move(exact);
  return spec;
}

ProblemSpec make_poisson_sin() {
  ProblemSpec spec = make_poisson(
      [](double x) { return kPi * kPi * std::sin(kPi * x); },
      [](const std::vector<double>& x) { return std::vector<double>{std::sin(kPi * x[0])}; },
      "poisson_sin");
  spec.exact_jets = [](const std::vector<double>& x) {
    ExactJets jets;
    jets.u = {std::sin(kPi * x[0])};
    jets.d1 = {{kPi * std::cos(kPi * x[0])}};
    jets.d2 = {{-kPi * kPi * std::sin(kPi * x[0])}};
    return jets;
  };
  return spec;
}

ProblemSpec make_navier_stokes() {
  constexpr double kMu = 0.02, kRho = 1.0;
  ProblemSpec spec;
  spec.name = "navier_stokes";
  spec.geometry.lo = {0.0, 0.0};
  spec.geometry.hi = {1.1, 0.41};
  spec.geometry.hole = Circle{0.2, 0.2, 0.05};
  spec.n_outputs = 3;  // (u, v, p)
  spec.deriv_order = {2, 2};
  spec.scale = {{1.0, 1.0}};
  spec.scalable = {true, true};
  spec.residual = [](Tape&, const std::vector<double>&, const std::vector<FieldJets>& f) {
    const FieldJets& u = f[0];
    const FieldJets& v = f[1];
    const FieldJets& p = f[2];
    Var mass = u.d1[0] + v.d1[1];
    Var mom_x = u.u * u.d1[0] + v.u * u.d1[1] + (1.0 / kRho) * p.d1[0] -
                (kMu / kRho) * (u.d2[0] + u.d2[1]);
    Var mom_y = u.u * v.d1[0] + v.u * v.d1[1] + (1.0 / kRho) * p.d1[1] -
                (kMu / kRho) * (v.d2[0] + v.d2[1]);
    return std::vector<Var>{mass, mom_x, mom_y};
  };

  auto inlet_u = [](const std::vector<double>& x) {
    return 4.0 * (0.41 - x[1]) * x[1] / (0.41 * 0.41);
  };
  std::vector<ConstraintSpec> cs;
  cs.push_back({"inlet u", ConstraintKind::ComponentDirichlet, Locus{Locus::Kind::Face, 0, false},
                {}, 0, -1, inlet_u});
  cs.push_back({"inlet v=0", ConstraintKind::ComponentDirichlet,
                Locus{Locus::Kind::Face, 0, false}, {}, 1, -1, nullptr});
  cs.push_back({"outlet p=0", ConstraintKind::ComponentDirichlet,
                Locus{Locus::Kind::Face, 0, true}, {}, 2, -1, nullptr});
  cs.push_back({"wall y=0 u", ConstraintKind::ComponentDirichlet,
                Locus{Locus::Kind::Face, 1, false}, {}, 0, -1, nullptr});
  cs.push_back({"wall y=0 v", ConstraintKind::ComponentDirichlet,
                Locus{Locus::Kind::Face, 1, false}, {}, 1, -1, nullptr});
  cs.push_back({"wall y=0.41 u", ConstraintKind::ComponentDirichlet,
                Locus{Locus::Kind::Face, 1, true}, {}, 0, -1, nullptr});
  cs.push_back({"wall y=0.41 v", ConstraintKind::ComponentDirichlet,
                Locus{Locus::Kind::Face, 1, true}, {}, 1, -1, nullptr});
  cs.push_back({"cylinder u", ConstraintKind::ComponentDirichlet,
                Locus{Locus::Kind::Cylinder}, {}, 0, -1, nullptr});
  cs.push_back({"cylinder v", ConstraintKind::ComponentDirichlet,
                Locus{Locus::Kind::Cylinder}, {}, 1, -1, nullptr});
  spec.constraints = std::move(cs);
  return spec;
}

}  // namespace

ProblemSpec make_problem(const std::string& name, const ProblemParams& params) {
  if (name == "wave1d") return make_wave1d();
  if (name == "allen_cahn") return make_allen_cahn();
  if (name == "boundary_layer") return make_boundary_layer(params.epsilon);
  if (name == "poisson_sin") return make_poisson_sin();
  if (name == "poisson_generic") {
    if (!params.poisson_f) throw std::invalid_argument("poisson_generic requires a forcing f");
    return make_poisson(params.poisson_f, params.poisson_exact, "poisson_generic");
  }
  if (name == "navier_stokes") return make_navier_stokes();
  throw std::invalid_argument("unknown problem: " + name);
}

std::pair<double, double> default_weights(const std::string& name, double N) {
  if (name == "wave1d") return {1.0 / (N * N * N * N), 2.0};
  if (name == "allen_cahn") return {0.3, 2.0};
  if (name == "boundary_layer") return {1.0, 20.0};
  if (name == "navier_stokes") return {1.0 / (N * N), 2.0};
  return {1.0, 1.0};
}

ProblemSpec scale_problem(const ProblemSpec& spec, double N, std::pair<double, double> weights) {
  if (N < 1.0) throw std::invalid_argument("scale_problem: N must be >= 1");
  ProblemSpec out = spec;
  for (int i = 0; i < spec.dim(); ++i) {
    if (spec.scalable[i]) out.scale.factors[i] *= N;
  }
  out.scale_value = spec.scale_value * N;
  out.lambda_res = weights.first;
  out.lambda_data = weights.second;
  return out;
}

ProblemSpec scale_problem(const ProblemSpec& spec, double N) {
  return scale_problem(spec, N, default_weights(spec.name, spec.scale_value * N));
}

// ---- residual / constraint evaluation -------------------------------------------

std::vector<Var> residual_from_batch(Tape& tape, const ProblemSpec& spec, const BatchJets& batch,
                                     int p, std::span<const double> scaled_pt) {
  auto fields = build_field_jets(
      spec, [&](int c) { return batch.value(c, p); },
      [&](int c, int j) { return batch.d1(c, j, p); },
      [&](int c, int j) { return batch.d2(c, j, p); });
  return spec.residual(tape, spec.to_original(scaled_pt), fields);
}

std::vector<Var> residual_at(Tape& tape, const ProblemSpec& spec, const LiftedMlp& net,
                             std::span<const double> scaled_pt) {
  if (!spec.contains_scaled(scaled_pt)) {
    throw std::invalid_argument("residual_at: point outside scaled domain");
  }
  const auto dirs = spec.jet_dirs();
  BatchJets batch = forward_batch(tape, net, scaled_pt.data(), 1, dirs);
  return residual_from_batch(tape, spec, batch, 0, scaled_pt);
}

std::vector<Var> residual_from_values(Tape& tape, const ProblemSpec& spec,
                                      std::span<const double> scaled_pt,
                                      const std::vector<PlainFieldJets>& v_jets) {
  const auto dirs = spec.jet_dirs();
  auto fields = build_field_jets(
      spec, [&](int c) { return tape.constant(v_jets[c].u); },
      [&](int c, int j) { return tape.constant(v_jets[c].d1[dirs[j]]); },
      [&](int c, int j) { return tape.constant(v_jets[c].d2[dirs[j]]); });
  return spec.residual(tape, spec.to_original(scaled_pt), fields);
}

std::vector<double> periodic_partner(const ProblemSpec& spec, const ConstraintSpec& c,
                                     std::span<const double> scaled_pt) {
  std::vector<double> partner(scaled_pt.begin(), scaled_pt.end());
  partner[c.locus2.axis] = face_coordinate(spec, c.locus2);
  return partner;
}

namespace {

double constraint_target(const ProblemSpec& spec, const ConstraintSpec& c,
                         std::span<const double> scaled_pt) {
  if (!c.target) return 0.0;
  const auto x = spec.to_original(scaled_pt);
  double g = c.target(x);
  if (c.kind == ConstraintKind::CoordinateDerivative) {
    // Scaled condition v_s = g(x/N)/N per the chain rule.
    g /= spec.scale.factor(c.deriv_coord);
  }
  return g;
}

}  // namespace

Var constraint_at(Tape& tape, const ProblemSpec& spec, const LiftedMlp& net,
                  const ConstraintSpec& c, std::span<const double> scaled_pt) {
  if (!on_locus(spec, c.locus, scaled_pt)) {
    throw std::invalid_argument("constraint_at: point off locus '" + c.name + "'");
  }
  switch (c.kind) {
    case ConstraintKind::Dirichlet:
    case ConstraintKind::ComponentDirichlet: {
      BatchJets batch = forward_batch(tape, net, scaled_pt.data(), 1, {});
      return batch.value(c.output_component, 0) - constraint_target(spec, c, scaled_pt);
    }
    case ConstraintKind::CoordinateDerivative: {
      const int dirs[1] = {c.deriv_coord};
      BatchJets batch = forward_batch(tape, net, scaled_pt.data(), 1, dirs);
      return batch.d1(c.output_component, 0, 0) - constraint_target(spec, c, scaled_pt);
    }
    case ConstraintKind::PeriodicPair: {
      const auto partner = periodic_partner(spec, c, scaled_pt);
      BatchJets a = forward_batch(tape, net, scaled_pt.data(), 1, {});
      BatchJets b = forward_batch(tape, net, partner.data(), 1, {});
      return a.value(c.output_component, 0) - b.value(c.output_component, 0);
    }
    case ConstraintKind::PeriodicDerivativePair: {
      const auto partner = periodic_partner(spec, c, scaled_pt);
      const int dirs[1] = {c.deriv_coord};
      BatchJets a = forward_batch(tape, net, scaled_pt.data(), 1, dirs);
      BatchJets b = forward_batch(tape, net, partner.data(), 1, dirs);
      return a.d1(c.output_component, 0, 0) - b.d1(c.output_component, 0, 0);
    }
  }
  throw std::logic_error("unknown constraint kind");
}

Var constraint_from_values(Tape& tape, const ProblemSpec& spec, const ConstraintSpec& c,
                           std::span<const double> scaled_pt,
                           const std::vector<PlainFieldJets>& at_pt,
                           const std::vector<PlainFieldJets>& at_partner) {
  const int comp = c.output_component;
  switch (c.kind) {
    case ConstraintKind::Dirichlet:
    case ConstraintKind::ComponentDirichlet:
      return tape.constant(at_pt[comp].u) - constraint_target(spec, c, scaled_pt);
    case ConstraintKind::CoordinateDerivative:
      return tape.constant(at_pt[comp].d1[c.deriv_coord]) - constraint_target(spec, c, scaled_pt);
    case ConstraintKind::PeriodicPair:
      return tape.constant(at_pt[comp].u) - tape.constant(at_partner[comp].u);
    case ConstraintKind::PeriodicDerivativePair:
      return tape.constant(at_pt[comp].d1[c.deriv_coord]) -
             tape.constant(at_partner[comp].d1[c.deriv_coord]);
  }
  throw std::logic_error("unknown constraint kind");
}

std::vector<double> exact_solution(const ProblemSpec& spec, std::span<const double> original_pt) {
  if (!spec.exact) throw NoExactSolution(spec.name);
  return spec.exact(std::vector<double>(original_pt.begin(), original_pt.end()));
}

}  // namespace vspinn
