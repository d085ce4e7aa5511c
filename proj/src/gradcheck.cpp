#include "vspinn/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace vspinn {

namespace {

double evaluate(const ScalarBuilder& build, std::span<const double> point) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (double x : point) leaves.push_back(tape.lift(LeafKind::Parameter, x));
  Var out = build(tape, leaves);
  const double value = tape.value(out);
  if (!std::isfinite(value)) throw std::runtime_error("check_gradient: non-finite value");
  return value;
}

}  // namespace

double check_gradient(const ScalarBuilder& build, std::span<const double> point, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_gradient: h must be positive");

  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (double x : point) leaves.push_back(tape.lift(LeafKind::Parameter, x));
  Var out = build(tape, leaves);
  if (!std::isfinite(tape.value(out))) {
    throw std::runtime_error("check_gradient: non-finite value");
  }
  Gradients grads = backward(tape, out);

  std::vector<double> probe(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double fp = evaluate(build, probe);
    probe[i] = saved - h;
    const double fm = evaluate(build, probe);
    probe[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    const double analytic = grads.at(leaves[i]);
    if (!std::isfinite(fd) || !std::isfinite(analytic)) {
      throw std::runtime_error("check_gradient: non-finite gradient");
    }
    const double rel = std::abs(analytic - fd) / std::max(std::abs(analytic), 1e-12);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace vspinn
