#pragma once

#include "vspinn/jet.hpp"
#include "vspinn/mlp.hpp"
#include "vspinn/tape.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vspinn {

struct Circle {
  double cx = 0, cy = 0, r = 0;
};

/// Axis-aligned box in original (unscaled) coordinates, with an optional
/// circular hole (the cylinder benchmark).
struct Geometry {
  std::vector<double> lo, hi;
  std::optional<Circle> hole;
  int dim() const { return static_cast<int>(lo.size()); }
};

/// Per-coordinate scale factors: x_scaled = factor * x_original.
struct ScaleMap {
  std::vector<double> factors;
  double factor(int i) const { return factors[static_cast<std::size_t>(i)]; }
  bool is_identity() const {
    for (double f : factors) {
      if (f != 1.0) return false;
    }
    return true;
  }
};

enum class ConstraintKind : std::uint8_t {
  Dirichlet,
  CoordinateDerivative,
  PeriodicPair,
  PeriodicDerivativePair,
  ComponentDirichlet,
};

/// A boundary segment: one face of the box, or the cylinder circle.
struct Locus {
  enum class Kind : std::uint8_t { Face, Cylinder };
  Kind kind = Kind::Face;
  int axis = 0;
  bool at_upper = false;
};

struct ConstraintSpec {
  std::string name;
  ConstraintKind kind = ConstraintKind::Dirichlet;
  Locus locus;
  Locus locus2;  // partner face for periodic kinds
  int output_component = 0;
  int deriv_coord = -1;  // for derivative kinds
  /// Target g in ORIGINAL coordinates; null means identically zero.
  std::function<double(const std::vector<double>&)> target;
};

/// Jets of one output component at a point, with scale factors already
/// applied so the entries are ORIGINAL-coordinate derivatives. Entries are
/// only populated up to the problem's per-coordinate derivative order.
struct FieldJets {
  Var u;
  std::vector<Var> d1, d2;  // indexed by coordinate
};

using ResidualFn = std::function<std::vector<Var>(
    Tape&, const std::vector<double>& x_original, const std::vector<FieldJets>& u)>;

using ExactFn = std::function<std::vector<double>(const std::vector<double>&)>;
/// Analytic value + first/second derivatives of the exact solution in
/// original coordinates; used by oracle-style tests.
struct ExactJets {
  std::vector<double> u;
  std::vector<std::vector<double>> d1, d2;  // [output][coordinate]
};
using ExactJetsFn = std::function<ExactJets(const std::vector<double>&)>;

/// Signals exact_solution() on a problem without a closed form.
struct NoExactSolution : std::runtime_error {
  explicit NoExactSolution(const std::string& problem)
      : std::runtime_error("problem '" + problem + "' has no exact solution") {}
};

struct ProblemSpec {
  std::string name;
  Geometry geometry;  // original coordinates
  int n_outputs = 1;
  std::vector<int> deriv_order;  // per coordinate: 0, 1 or 2
  ResidualFn residual;
  std::vector<ConstraintSpec> constraints;
  double lambda_res = 1.0;
  double lambda_data = 1.0;
  ScaleMap scale;               // all ones before scale_problem
  std::vector<bool> scalable;   // coordinates transformed by scale_problem
  double scale_value = 1.0;     // cumulative N applied to scalable coords
  ExactFn exact;                // null when no closed form exists
  ExactJetsFn exact_jets;       // null when no closed form exists

  int dim() const { return geometry.dim(); }
  bool has_exact() const { return static_cast<bool>(exact); }

  double scaled_lo(int i) const { return geometry.lo[i] * scale.factor(i); }
  double scaled_hi(int i) const { return geometry.hi[i] * scale.factor(i); }
  std::optional<Circle> scaled_hole() const;
  /// Strict interior of the scaled domain (outside any hole).
  bool contains_scaled(std::span<const double> pt) const;
  /// Inside or on the boundary of the scaled box, outside the open hole.
  bool contains_scaled_closed(std::span<const double> pt, double tol = 1e-9) const;
  std::vector<double> to_original(std::span<const double> scaled_pt) const;
  std::vector<double> to_scaled(std::span<const double> original_pt) const;
  /// Directions the residual differentiates along (deriv_order >= 1).
  std::vector<int> jet_dirs() const;
};

struct ProblemParams {
  double epsilon = 1e-6;                    // boundary_layer
  std::function<double(double)> poisson_f;  // poisson_generic forcing
  ExactFn poisson_exact;                    // optional reference for poisson_generic
};

/// Catalog: wave1d, allen_cahn, boundary_layer, poisson_sin, poisson_generic,
/// navier_stokes. Returns the unscaled problem (ScaleMap all ones) with the
/// constraints of the corresponding experiment.
ProblemSpec make_problem(const std::string& name, const ProblemParams& params = {});

std::pair<double, double> default_weights(const std::string& name, double N);

/// Variable-scaling transform: multiplies scalable coordinates by N, rewrites
/// k-th derivatives with factor N^k, composes constraint targets with x/N and
/// installs the loss weights (lambda_res, lambda_data).
ProblemSpec scale_problem(const ProblemSpec& spec, double N, std::pair<double, double> weights);
/// Same, with the problem's default weights at the resulting cumulative N.
ProblemSpec scale_problem(const ProblemSpec& spec, double N);

/// PDE residual at a scaled interior point, built from network jets.
std::vector<Var> residual_at(Tape& tape, const ProblemSpec& spec, const LiftedMlp& net,
                             std::span<const double> scaled_pt);

/// Residual from an already-evaluated batch (point index p of batch).
std::vector<Var> residual_from_batch(Tape& tape, const ProblemSpec& spec, const BatchJets& batch,
                                     int p, std::span<const double> scaled_pt);

/// Network-free hook: jets of each output supplied as plain numbers, exactly
/// as a network evaluated at the scaled point would produce them.
struct PlainFieldJets {
  double u = 0;
  std::vector<double> d1, d2;  // per coordinate, scaled-coordinate derivatives
};
std::vector<Var> residual_from_values(Tape& tape, const ProblemSpec& spec,
                                      std::span<const double> scaled_pt,
                                      const std::vector<PlainFieldJets>& v_jets);

/// Scaled point on the partner locus of a periodic constraint.
std::vector<double> periodic_partner(const ProblemSpec& spec, const ConstraintSpec& c,
                                     std::span<const double> scaled_pt);

/// Constraint mismatch at a scaled boundary point on c's locus.
Var constraint_at(Tape& tape, const ProblemSpec& spec, const LiftedMlp& net,
                  const ConstraintSpec& c, std::span<const double> scaled_pt);

/// Mismatch from plain field values: value (and first derivatives when the
/// constraint needs them) of each output at the scaled point, plus the same
/// at the periodic partner where applicable.
Var constraint_from_values(Tape& tape, const ProblemSpec& spec, const ConstraintSpec& c,
                           std::span<const double> scaled_pt,
                           const std::vector<PlainFieldJets>& at_pt,
                           const std::vector<PlainFieldJets>& at_partner);

/// Exact solution in ORIGINAL coordinates; throws NoExactSolution when the
/// problem has none (Allen-Cahn, Navier-Stokes).
std::vector<double> exact_solution(const ProblemSpec& spec, std::span<const double> original_pt);

/// True if the scaled point lies on the constraint's locus within tol.
bool on_locus(const ProblemSpec& spec, const Locus& locus, std::span<const double> scaled_pt,
              double tol = 1e-9);

}  // namespace vspinn
