#pragma once

#include "vspinn/tape.hpp"

namespace vspinn {

/// Order-2 directional jet of a quantity with respect to one input
/// coordinate: (value, d/ds, d2/ds2). Each component is a tape variable, so
/// a reverse pass over any scalar built from jets yields parameter
/// gradients of that scalar (reverse-over-forward).
struct Jet2 {
  Var v, d1, d2;
};

/// Jet of a quantity that does not depend on the differentiation coordinate.
inline Jet2 const_jet(Tape& tape, double value) {
  return {tape.constant(value), tape.constant(0.0), tape.constant(0.0)};
}

/// Seeds a jet from explicit component values (leaves the caller controls).
inline Jet2 seed_jet(Var v, Var d1, Var d2) { return {v, d1, d2}; }

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  // Leibniz: (ab)'' = a''b + 2a'b' + ab''
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1,
          a.d2 * b.v + 2.0 * (a.d1 * b.d1) + a.v * b.d2};
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  Var q = a.v / b.v;
  Var q1 = (a.d1 - q * b.d1) / b.v;
  Var q2 = (a.d2 - 2.0 * (q1 * b.d1) - q * b.d2) / b.v;
  return {q, q1, q2};
}
inline Jet2 operator+(const Jet2& a, double c) { return {a.v + c, a.d1, a.d2}; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Jet2 operator*(const Jet2& a, double c) { return {a.v * c, a.d1 * c, a.d2 * c}; }
inline Jet2 operator*(double c, const Jet2& a) { return a * c; }
inline Jet2 operator-(const Jet2& a) { return a * -1.0; }

inline Jet2 pow_int(const Jet2& a, int k) {
  Tape& tape = *a.v.tape;
  if (k == 0) return const_jet(tape, 1.0);
  if (k == 1) return a;
  Var u = pow_int(a.v, k);
  Var c1 = static_cast<double>(k) * pow_int(a.v, k - 1);
  Var c2 = static_cast<double>(k) * static_cast<double>(k - 1) * pow_int(a.v, k - 2);
  return {u, c1 * a.d1, c2 * (a.d1 * a.d1) + c1 * a.d2};
}

/// Unary activation applied to a jet; one fused tape node carries the exact
/// chain rule (and its reverse rule, which involves sigma''').
inline Jet2 apply_act(ActKind kind, const Jet2& a) {
  Var out[3];
  a.v.tape->record_act_jet(kind, a.v, a.d1, a.d2, out);
  return {out[0], out[1], out[2]};
}

inline Jet2 tanh(const Jet2& a) { return apply_act(ActKind::Tanh, a); }
inline Jet2 sin(const Jet2& a) { return apply_act(ActKind::Sin, a); }
inline Jet2 cos(const Jet2& a) { return apply_act(ActKind::Cos, a); }
inline Jet2 exp(const Jet2& a) { return apply_act(ActKind::Exp, a); }
inline Jet2 cubic_relu(const Jet2& a) { return apply_act(ActKind::CubicRelu, a); }

}  // namespace vspinn
