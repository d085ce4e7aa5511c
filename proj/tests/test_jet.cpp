#include "vspinn/jet.hpp"

#include "vspinn/gradcheck.hpp"
#include "vspinn/mlp.hpp"
#include "vspinn/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace vspinn;

namespace {

Jet2 seed_x(Tape& tape, double x) {
  return {tape.lift(LeafKind::Input, x), tape.constant(1.0), tape.constant(0.0)};
}

void check_jet(Tape& tape, const Jet2& jet, double v, double d1, double d2, double tol = 1e-12) {
  CHECK(tape.value(jet.v) == doctest::Approx(v).epsilon(tol));
  CHECK(tape.value(jet.d1) == doctest::Approx(d1).epsilon(tol));
  CHECK(tape.value(jet.d2) == doctest::Approx(d2).epsilon(tol));
}

}  // namespace

TEST_SUITE("jet") {

TEST_CASE("x^2 jet at x=3") {
  Tape tape;
  Jet2 x = seed_x(tape, 3.0);
  Jet2 y = x * x;
  check_jet(tape, y, 9.0, 6.0, 2.0);
}

TEST_CASE("tanh jet at x=0") {
  Tape tape;
  Jet2 y = tanh(seed_x(tape, 0.0));
  check_jet(tape, y, 0.0, 1.0, 0.0);
}

TEST_CASE("cubic_relu jet branches") {
  Tape tape;
  Jet2 pos = cubic_relu(seed_x(tape, 2.0));
  check_jet(tape, pos, 8.0, 12.0, 12.0);
  Jet2 neg = cubic_relu(seed_x(tape, -1.0));
  check_jet(tape, neg, 0.0, 0.0, 0.0);
  Jet2 zero = cubic_relu(seed_x(tape, 0.0));
  check_jet(tape, zero, 0.0, 0.0, 0.0);
}

TEST_CASE("constant jets have zero derivatives through compositions") {
  Tape tape;
  Jet2 c = const_jet(tape, 1.7);
  Jet2 y = tanh(c * c + 0.5) * 2.0;
  CHECK(tape.value(y.d1) == 0.0);
  CHECK(tape.value(y.d2) == 0.0);
}

TEST_CASE("division jet matches analytic quotient derivatives") {
  // f(x) = (x^2 + 1) / (2x - 1) at x = 2: f = 5/3, f' = 2/9, f'' = 10/27
  Tape tape;
  Jet2 x = seed_x(tape, 2.0);
  Jet2 f = (x * x + 1.0) / (x * 2.0 - 1.0);
  check_jet(tape, f, 5.0 / 3.0, 2.0 / 9.0, 10.0 / 27.0, 1e-10);
}

TEST_CASE("pow_int jet") {
  Tape tape;
  Jet2 x = seed_x(tape, 2.0);
  Jet2 y = pow_int(x, 4);
  check_jet(tape, y, 16.0, 32.0, 48.0);
  Jet2 inv = pow_int(x, -1);
  check_jet(tape, inv, 0.5, -0.25, 0.25);
}

TEST_CASE("cubic_relu jets equal x^3 jets for positive input, zero for negative") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-3.0, 3.0);
    Tape tape;
    Jet2 relu = cubic_relu(seed_x(tape, x));
    if (x > 0) {
      Jet2 cube = pow_int(seed_x(tape, x), 3);
      CHECK(tape.value(relu.v) == doctest::Approx(tape.value(cube.v)));
      CHECK(tape.value(relu.d1) == doctest::Approx(tape.value(cube.d1)));
      CHECK(tape.value(relu.d2) == doctest::Approx(tape.value(cube.d2)));
    } else {
      CHECK(tape.value(relu.v) == 0.0);
      CHECK(tape.value(relu.d1) == 0.0);
      CHECK(tape.value(relu.d2) == 0.0);
    }
  }
}

TEST_CASE("network jets match finite differences of the forward value") {
  // 100 random seeded networks and points: d1 within 1e-6, d2 within 1e-4
  // relative. d1 uses Richardson-extrapolated central differences (base
  // h = 1e-4) to keep the oracle's truncation below the tolerance; cubic
  // nets use one hidden layer and points away from activation kinks, where
  // finite differences of a piecewise function are meaningless.
  const double h = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(1000 + static_cast<std::uint64_t>(trial));
    const bool cubic = (trial % 2 != 0);
    MlpConfig config;
    config.input_dim = 2;
    config.output_dim = 1;
    config.hidden = cubic ? std::vector<int>{16} : std::vector<int>{8, 8};
    config.activation = cubic ? ActKind::CubicRelu : ActKind::Tanh;
    config.seed = 77 + static_cast<std::uint64_t>(trial);
    const MlpParams params = init_params(config);
    const int dir = trial % 2 == 0 ? 0 : 1;
    std::vector<double> x;
    for (int attempt = 0; attempt < 100; ++attempt) {
      x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      if (!cubic) break;
      const Eigen::VectorXd pre =
          params.weights[0] * Eigen::Map<const Eigen::Vector2d>(x.data()) + params.biases[0];
      if (pre.array().abs().minCoeff() > 1e-2) break;
    }

    const auto jets = forward_jet_plain(config, params, x, dir);

    auto eval = [&](double delta) {
      auto xx = x;
      xx[static_cast<std::size_t>(dir)] += delta;
      return forward_plain(config, params, xx)[0];
    };
    auto central = [&](double step) { return (eval(step) - eval(-step)) / (2 * step); };
    const double f0 = eval(0.0);
    const double fd1 = (4.0 * central(h / 2) - central(h)) / 3.0;
    const double fd2 = (eval(h) - 2 * f0 + eval(-h)) / (h * h);

    CHECK(jets[0].v == doctest::Approx(f0));
    CHECK(std::abs(jets[0].d1 - fd1) / std::max({std::abs(jets[0].d1), std::abs(fd1), 1.0}) <
          1e-6);
    CHECK(std::abs(jets[0].d2 - fd2) / std::max({std::abs(jets[0].d2), std::abs(fd2), 1.0}) <
          1e-4);
  }
}

TEST_CASE("tape jets agree with plain jets") {
  for (int trial = 0; trial < 10; ++trial) {
    MlpConfig config;
    config.input_dim = 2;
    config.output_dim = 2;
    config.hidden = {6, 5};
    config.activation = trial % 2 == 0 ? ActKind::Tanh : ActKind::CubicRelu;
    config.seed = 3000 + static_cast<std::uint64_t>(trial);
    const MlpParams params = init_params(config);
    Rng rng(config.seed);
    std::vector<double> x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

    Tape tape;
    const LiftedMlp net = lift_params(tape, config, params);
    const auto on_tape = forward_jet(tape, net, x, 1);
    const auto plain = forward_jet_plain(config, params, x, 1);
    for (int c = 0; c < 2; ++c) {
      CHECK(tape.value(on_tape[static_cast<std::size_t>(c)].v) ==
            doctest::Approx(plain[static_cast<std::size_t>(c)].v).epsilon(1e-12));
      CHECK(tape.value(on_tape[static_cast<std::size_t>(c)].d1) ==
            doctest::Approx(plain[static_cast<std::size_t>(c)].d1).epsilon(1e-12));
      CHECK(tape.value(on_tape[static_cast<std::size_t>(c)].d2) ==
            doctest::Approx(plain[static_cast<std::size_t>(c)].d2).epsilon(1e-12));
    }
  }
}

TEST_CASE("parameter gradient of (u_xx)^2 matches finite differences") {
  MlpConfig config;
  config.input_dim = 1;
  config.output_dim = 1;
  config.hidden = {6, 6};
  config.seed = 11;
  const MlpParams params = init_params(config);
  const Eigen::VectorXd flat = params.flatten();
  std::vector<double> point(flat.data(), flat.data() + flat.size());

  // check_gradient lifts plain scalar leaves; the builder must keep the
  // computation connected to them, so assemble the 1D jet forward by hand
  // from the lifted leaves (flatten order: column-major W then b per layer).
  ScalarBuilder builder = [&](Tape& tape, std::span<const Var> leaves) -> Var {
    const auto sizes = config.layer_sizes();
    std::size_t off = 0;
    std::vector<std::vector<Var>> W;
    std::vector<std::vector<Var>> b;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const int rows = sizes[l + 1], cols = sizes[l];
      std::vector<Var> Wl(static_cast<std::size_t>(rows) * cols);
      for (int cc = 0; cc < cols; ++cc) {
        for (int r = 0; r < rows; ++r) Wl[static_cast<std::size_t>(cc) * rows + r] = leaves[off++];
      }
      std::vector<Var> bl(static_cast<std::size_t>(rows));
      for (int r = 0; r < rows; ++r) bl[static_cast<std::size_t>(r)] = leaves[off++];
      W.push_back(std::move(Wl));
      b.push_back(std::move(bl));
    }
    std::vector<Jet2> act = {Jet2{tape.constant(0.37), tape.constant(1.0), tape.constant(0.0)}};
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const int rows = sizes[l + 1], cols = sizes[l];
      std::vector<Jet2> next;
      for (int r = 0; r < rows; ++r) {
        Jet2 z = {b[l][static_cast<std::size_t>(r)], tape.constant(0.0), tape.constant(0.0)};
        for (int cc = 0; cc < cols; ++cc) {
          Var w = W[l][static_cast<std::size_t>(cc) * rows + r];
          const Jet2& a = act[static_cast<std::size_t>(cc)];
          z = Jet2{z.v + w * a.v, z.d1 + w * a.d1, z.d2 + w * a.d2};
        }
        next.push_back(l + 2 < sizes.size() ? tanh(z) : z);
      }
      act = std::move(next);
    }
    Var uxx = act[0].d2;
    return uxx * uxx;
  };

  const double err = check_gradient(builder, point, 1e-4);
  CHECK(err < 1e-5);
}

}  // TEST_SUITE
