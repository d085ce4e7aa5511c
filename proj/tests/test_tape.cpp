#include "vspinn/tape.hpp"

#include "vspinn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

using namespace vspinn;

TEST_SUITE("tape") {

TEST_CASE("lift round-trips the value and ids are distinct") {
  Tape tape;
  Var a = tape.lift(LeafKind::Parameter, 3.5);
  Var b = tape.lift(LeafKind::Input, -1.25);
  CHECK(tape.value(a) == 3.5);
  CHECK(tape.value(b) == -1.25);
  CHECK(a.id != b.id);
  CHECK(tape.leaf_count() == 2);
}

TEST_CASE("lift on a closed tape is rejected") {
  Tape tape;
  tape.lift(LeafKind::Parameter, 1.0);
  tape.close();
  CHECK_THROWS_AS(tape.lift(LeafKind::Parameter, 2.0), std::logic_error);
  tape.reset();
  CHECK_NOTHROW(tape.lift(LeafKind::Parameter, 2.0));
}

TEST_CASE("arithmetic between tapes is rejected") {
  Tape t1, t2;
  Var a = t1.lift(LeafKind::Parameter, 1.0);
  Var b = t2.lift(LeafKind::Parameter, 2.0);
  CHECK_THROWS_AS(a + b, std::invalid_argument);
  CHECK_THROWS_AS(a * b, std::invalid_argument);
}

TEST_CASE("division by zero value is a degenerate-input error") {
  Tape tape;
  Var a = tape.lift(LeafKind::Parameter, 1.0);
  Var z = tape.constant(0.0);
  CHECK_THROWS_AS(a / z, std::domain_error);
}

TEST_CASE("backward of w*x gives x for the parameter") {
  Tape tape;
  Var w = tape.lift(LeafKind::Parameter, 0.7);
  Var x = tape.lift(LeafKind::Input, 2.0);
  Var y = w * x;
  Gradients g = backward(tape, y);
  CHECK(g.at(w) == doctest::Approx(2.0));
  CHECK(g.at(x) == doctest::Approx(0.7));
}

TEST_CASE("backward of a constant zeroes every leaf gradient") {
  Tape tape;
  Var w = tape.lift(LeafKind::Parameter, 0.7);
  Var u = tape.lift(LeafKind::Parameter, -4.0);
  Var c = tape.constant(5.0);
  Var y = c * 2.0;
  Gradients g = backward(tape, y);
  CHECK(g.at(w) == 0.0);
  CHECK(g.at(u) == 0.0);
}

TEST_CASE("backward seed must live on the tape") {
  Tape tape;
  tape.lift(LeafKind::Parameter, 1.0);
  Tape other;
  Var foreign = other.lift(LeafKind::Parameter, 1.0);
  CHECK_THROWS_AS(backward(tape, foreign), std::invalid_argument);
}

TEST_CASE("backward is linear in the seed") {
  // grad(a*f + b*g) == a*grad(f) + b*grad(g) up to roundoff.
  Rng rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    Tape tape;
    Var x = tape.lift(LeafKind::Parameter, rng.uniform(-2, 2));
    Var y = tape.lift(LeafKind::Parameter, rng.uniform(-2, 2));
    Var f = tanh(x * y) + pow_int(x, 3);
    Var g = exp(y * 0.3) * sin(x);
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
    Var combo = a * f + b * g;
    Gradients gc = backward(tape, combo);
    Gradients gf = backward(tape, f);
    Gradients gg = backward(tape, g);
    for (Var leaf : {x, y}) {
      CHECK(gc.at(leaf) ==
            doctest::Approx(a * gf.at(leaf) + b * gg.at(leaf)).epsilon(1e-12));
    }
  }
}

TEST_CASE("replay reproduces node values bit-for-bit") {
  Rng rng(17);
  Tape tape;
  std::vector<Var> leaves;
  for (int i = 0; i < 8; ++i) leaves.push_back(tape.lift(LeafKind::Parameter, rng.normal()));
  Var acc = leaves[0];
  for (int i = 1; i < 8; ++i) {
    acc = tanh(acc * leaves[static_cast<std::size_t>(i)]) + sin(acc) * 0.25;
  }
  std::vector<double> before(tape.num_values());
  for (std::uint32_t i = 0; i < tape.num_values(); ++i) before[i] = tape.value_at(i);
  tape.replay();
  for (std::uint32_t i = 0; i < tape.num_values(); ++i) {
    // bit-identical, not approximately equal
    const double after = tape.value_at(i);
    CHECK(std::memcmp(&before[i], &after, sizeof(double)) == 0);
  }
}

TEST_CASE("sum node adds terms in fixed order") {
  Tape tape;
  std::vector<Var> terms;
  for (int i = 1; i <= 5; ++i) terms.push_back(tape.constant(i * 0.1));
  Var s = tape.sum(terms);
  CHECK(tape.value(s) == doctest::Approx(1.5));
}

TEST_CASE("cubic_relu scalar op and derivatives") {
  Tape tape;
  Var x = tape.lift(LeafKind::Parameter, 2.0);
  Var y = cubic_relu(x);
  CHECK(tape.value(y) == doctest::Approx(8.0));
  Gradients g = backward(tape, y);
  CHECK(g.at(x) == doctest::Approx(12.0));

  Tape tneg;
  Var xn = tneg.lift(LeafKind::Parameter, -1.0);
  Var yn = cubic_relu(xn);
  CHECK(tneg.value(yn) == 0.0);
  CHECK(backward(tneg, yn).at(xn) == 0.0);
}

}  // TEST_SUITE
