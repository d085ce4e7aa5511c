#include "vspinn/tape.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace vspinn {

namespace {

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

void require_same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw std::invalid_argument("tape mismatch: vars belong to different tapes");
  }
}

}  // namespace

double ipow(double base, int k) {
  if (k < 0) return 1.0 / ipow(base, -k);
  double r = 1.0;
  double b = base;
  while (k > 0) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}

ActDerivs act_derivs(ActKind kind, double g) {
  switch (kind) {
    case ActKind::Tanh: {
      const double t = std::tanh(g);
      const double sech2 = 1.0 - t * t;
      return {t, sech2, -2.0 * t * sech2, -2.0 * sech2 * (1.0 - 3.0 * t * t)};
    }
    case ActKind::Sin:
      return {std::sin(g), std::cos(g), -std::sin(g), -std::cos(g)};
    case ActKind::Cos:
      return {std::cos(g), -std::sin(g), -std::cos(g), std::sin(g)};
    case ActKind::Exp: {
      const double e = std::exp(g);
      return {e, e, e, e};
    }
    case ActKind::CubicRelu:
      if (g > 0.0) return {g * g * g, 3.0 * g * g, 6.0 * g, 6.0};
      return {0.0, 0.0, 0.0, 0.0};
  }
  throw std::logic_error("unknown activation kind");
}

// ---- Gradients --------------------------------------------------------------

double Gradients::at(Var leaf) const {
  if (leaf.tape != tape_) throw std::invalid_argument("gradient query: var from another tape");
  return at_id(leaf.id);
}

double Gradients::at_id(std::uint32_t leaf_id) const {
  if (!tape_->is_leaf(leaf_id)) throw std::invalid_argument("gradient query: id is not a leaf");
  return adj_[leaf_id];
}

// ---- Tape basics ------------------------------------------------------------

void Tape::reset() {
  nodes_.clear();
  vals_.clear();
  extra_.clear();
  leaf_ranges_.clear();
  leaf_count_ = 0;
  open_ = true;
}

void Tape::require_open() const {
  if (!open_) throw std::logic_error("tape is closed for recording");
}

double Tape::value(Var v) const {
  if (v.tape != this) throw std::invalid_argument("value query: var from another tape");
  return vals_[v.id];
}

bool Tape::is_leaf(std::uint32_t id) const {
  for (const auto& [begin, end] : leaf_ranges_) {
    if (id >= begin && id < end) return true;
  }
  return false;
}

std::uint32_t Tape::push_values(std::uint32_t n) {
  const std::uint32_t base = static_cast<std::uint32_t>(vals_.size());
  vals_.resize(vals_.size() + n);
  return base;
}

Var Tape::lift(LeafKind kind, double value) {
  require_open();
  const std::uint32_t id = push_values(1);
  vals_[id] = value;
  Node node;
  node.op = Op::LeafScalar;
  node.aux = static_cast<std::uint8_t>(kind);
  node.out = id;
  nodes_.push_back(node);
  leaf_ranges_.emplace_back(id, id + 1);
  ++leaf_count_;
  return {this, id};
}

Var Tape::constant(double value) {
  require_open();
  const std::uint32_t id = push_values(1);
  vals_[id] = value;
  Node node;
  node.op = Op::Const;
  node.out = id;
  node.ca = value;
  nodes_.push_back(node);
  return {this, id};
}

std::uint32_t Tape::lift_block(LeafKind kind, const double* data, std::uint32_t n) {
  require_open();
  const std::uint32_t base = push_values(n);
  std::copy(data, data + n, vals_.begin() + base);
  Node node;
  node.op = Op::LeafBlock;
  node.aux = static_cast<std::uint8_t>(kind);
  node.out = base;
  node.n = n;
  nodes_.push_back(node);
  leaf_ranges_.emplace_back(base, base + n);
  leaf_count_ += n;
  return base;
}

std::uint32_t Tape::input_jet_block(const double* pts, std::uint32_t dim, std::uint32_t P,
                                    std::span<const int> dirs) {
  require_open();
  const std::uint32_t K = 1 + 2 * static_cast<std::uint32_t>(dirs.size());
  const std::uint32_t n = dim * K * P;
  const std::uint32_t base = push_values(n);

  Node node;
  node.op = Op::InputJetBlock;
  node.out = base;
  node.n = n;
  node.a = static_cast<std::uint32_t>(extra_.size());
  extra_.push_back(dim);
  extra_.push_back(P);
  extra_.push_back(K);
  for (int d : dirs) extra_.push_back(static_cast<std::uint32_t>(d));
  nodes_.push_back(node);

  // Value columns carry the coordinates and are input leaves.
  for (std::uint32_t p = 0; p < P; ++p) {
    for (std::uint32_t i = 0; i < dim; ++i) vals_[base + p * dim + i] = pts[p * dim + i];
  }
  leaf_ranges_.emplace_back(base, base + dim * P);
  leaf_count_ += dim * P;
  // Seed lanes: d1 lane of direction j is the constant unit vector e_dir.
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const std::uint32_t d1_base = base + (1 + 2 * static_cast<std::uint32_t>(j)) * P * dim;
    const std::uint32_t d2_base = base + (2 + 2 * static_cast<std::uint32_t>(j)) * P * dim;
    for (std::uint32_t p = 0; p < P; ++p) {
      for (std::uint32_t i = 0; i < dim; ++i) {
        vals_[d1_base + p * dim + i] = (static_cast<int>(i) == dirs[j]) ? 1.0 : 0.0;
        vals_[d2_base + p * dim + i] = 0.0;
      }
    }
  }
  return base;
}

std::uint32_t Tape::dense_jets(std::uint32_t w_base, std::uint32_t b_base, std::uint32_t a_base,
                               std::uint32_t rows, std::uint32_t inner, std::uint32_t P,
                               std::uint32_t K, double scale) {
  require_open();
  const std::uint32_t ncols = K * P;
  const std::uint32_t base = push_values(rows * ncols);
  Node node;
  node.op = Op::DenseJets;
  node.out = base;
  node.n = rows * ncols;
  node.ca = scale;
  node.a = static_cast<std::uint32_t>(extra_.size());
  extra_.push_back(w_base);
  extra_.push_back(b_base);
  extra_.push_back(a_base);
  extra_.push_back(rows);
  extra_.push_back(inner);
  extra_.push_back(P);
  extra_.push_back(K);
  nodes_.push_back(node);
  eval_node(nodes_.back());
  return base;
}

std::uint32_t Tape::act_jets(ActKind kind, std::uint32_t g_base, std::uint32_t rows,
                             std::uint32_t P, std::uint32_t K) {
  require_open();
  const std::uint32_t base = push_values(rows * K * P);
  Node node;
  node.op = Op::ActJets;
  node.aux = static_cast<std::uint8_t>(kind);
  node.out = base;
  node.n = rows * K * P;
  node.a = static_cast<std::uint32_t>(extra_.size());
  extra_.push_back(g_base);
  extra_.push_back(rows);
  extra_.push_back(P);
  extra_.push_back(K);
  nodes_.push_back(node);
  eval_node(nodes_.back());
  return base;
}

Var Tape::sum(std::span<const Var> terms) {
  require_open();
  if (terms.empty()) return constant(0.0);
  for (const Var& t : terms) {
    if (t.tape != this) throw std::invalid_argument("sum: var from another tape");
  }
  Node node;
  node.op = Op::SumList;
  node.a = static_cast<std::uint32_t>(extra_.size());
  node.b = static_cast<std::uint32_t>(terms.size());
  for (const Var& t : terms) extra_.push_back(t.id);
  const std::uint32_t id = push_values(1);
  node.out = id;
  nodes_.push_back(node);
  eval_node(nodes_.back());
  return {this, id};
}

Var Tape::record_binary(Op op, Var a, Var b) {
  require_same_tape(a, b);
  require_open();
  if (op == Op::Div && vals_[b.id] == 0.0) {
    throw std::domain_error("division by zero value on tape");
  }
  const std::uint32_t id = push_values(1);
  Node node;
  node.op = op;
  node.a = a.id;
  node.b = b.id;
  node.out = id;
  nodes_.push_back(node);
  eval_node(nodes_.back());
  return {this, id};
}

Var Tape::record_unary_const(Op op, Var a, double c) {
  if (a.tape != this) throw std::invalid_argument("tape mismatch");
  require_open();
  const std::uint32_t id = push_values(1);
  Node node;
  node.op = op;
  node.a = a.id;
  node.ca = c;
  node.out = id;
  nodes_.push_back(node);
  eval_node(nodes_.back());
  return {this, id};
}

Var Tape::record_act(ActKind kind, Var a) {
  if (a.tape != this) throw std::invalid_argument("tape mismatch");
  require_open();
  const std::uint32_t id = push_values(1);
  Node node;
  node.op = Op::Act;
  node.aux = static_cast<std::uint8_t>(kind);
  node.a = a.id;
  node.out = id;
  nodes_.push_back(node);
  eval_node(nodes_.back());
  return {this, id};
}

Var Tape::record_act_jet(ActKind kind, Var g, Var g1, Var g2, Var out[3]) {
  require_same_tape(g, g1);
  require_same_tape(g, g2);
  require_open();
  const std::uint32_t base = push_values(3);
  Node node;
  node.op = Op::ActJet;
  node.aux = static_cast<std::uint8_t>(kind);
  node.a = g.id;
  node.b = g1.id;
  node.c = g2.id;
  node.out = base;
  node.n = 3;
  nodes_.push_back(node);
  eval_node(nodes_.back());
  out[0] = {this, base};
  out[1] = {this, base + 1};
  out[2] = {this, base + 2};
  return out[0];
}

// ---- forward evaluation ------------------------------------------------------

void Tape::eval_node(const Node& node) {
  double* v = vals_.data();
  switch (node.op) {
    case Op::LeafScalar:
    case Op::LeafBlock:
      break;  // values are externally supplied
    case Op::Const:
      v[node.out] = node.ca;
      break;
    case Op::Add:
      v[node.out] = v[node.a] + v[node.b];
      break;
    case Op::Sub:
      v[node.out] = v[node.a] - v[node.b];
      break;
    case Op::Mul:
      v[node.out] = v[node.a] * v[node.b];
      break;
    case Op::Div:
      v[node.out] = v[node.a] / v[node.b];
      break;
    case Op::AddConst:
      v[node.out] = v[node.a] + node.ca;
      break;
    case Op::MulConst:
      v[node.out] = v[node.a] * node.ca;
      break;
    case Op::PowInt:
      v[node.out] = ipow(v[node.a], static_cast<int>(node.ca));
      break;
    case Op::Act:
      v[node.out] = act_derivs(static_cast<ActKind>(node.aux), v[node.a]).s;
      break;
    case Op::ActJet: {
      const ActDerivs d = act_derivs(static_cast<ActKind>(node.aux), v[node.a]);
      const double g1 = v[node.b];
      const double g2 = v[node.c];
      v[node.out] = d.s;
      v[node.out + 1] = d.s1 * g1;
      v[node.out + 2] = d.s2 * g1 * g1 + d.s1 * g2;
      break;
    }
    case Op::SumList: {
      double acc = 0.0;
      const std::uint32_t* ids = extra_.data() + node.a;
      for (std::uint32_t i = 0; i < node.b; ++i) acc += v[ids[i]];
      v[node.out] = acc;
      break;
    }
    case Op::InputJetBlock:
      break;  // leaves + constants, written at record time; replay keeps them
    case Op::DenseJets: {
      const std::uint32_t* e = extra_.data() + node.a;
      const std::uint32_t w_base = e[0], b_base = e[1], a_base = e[2];
      const std::uint32_t rows = e[3], inner = e[4], P = e[5], K = e[6];
      ConstMatMap W(v + w_base, rows, inner);
      ConstMatMap A(v + a_base, inner, K * P);
      MatMap Z(v + node.out, rows, K * P);
      Z.noalias() = node.ca * (W * A);
      if (b_base != kNoId) {
        ConstVecMap bias(v + b_base, rows);
        Z.leftCols(P).colwise() += bias;
      }
      break;
    }
    case Op::ActJets: {
      const std::uint32_t* e = extra_.data() + node.a;
      const std::uint32_t g_base = e[0], rows = e[1], P = e[2], K = e[3];
      const ActKind kind = static_cast<ActKind>(node.aux);
      const std::uint32_t lane = rows * P;
      const double* g = v + g_base;
      double* z = v + node.out;
      const std::uint32_t ndirs = (K - 1) / 2;
      for (std::uint32_t i = 0; i < lane; ++i) {
        const ActDerivs d = act_derivs(kind, g[i]);
        z[i] = d.s;
        for (std::uint32_t j = 0; j < ndirs; ++j) {
          const std::uint32_t o1 = (1 + 2 * j) * lane + i;
          const std::uint32_t o2 = (2 + 2 * j) * lane + i;
          const double g1 = g[o1];
          const double g2 = g[o2];
          z[o1] = d.s1 * g1;
          z[o2] = d.s2 * g1 * g1 + d.s1 * g2;
        }
      }
      break;
    }
  }
}

void Tape::replay() {
  for (const Node& node : nodes_) eval_node(node);
}

// ---- reverse pass -------------------------------------------------------------

void Tape::backward_into(std::uint32_t seed_id, AlignedDoubles& adj) const {
  if (seed_id >= vals_.size()) throw std::invalid_argument("backward: seed not on tape");
  adj.assign(vals_.size(), 0.0);
  adj[seed_id] = 1.0;
  const double* v = vals_.data();
  double* a = adj.data();

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& node = *it;
    switch (node.op) {
      case Op::LeafScalar:
      case Op::LeafBlock:
      case Op::Const:
      case Op::InputJetBlock:
        break;
      case Op::Add: {
        const double z = a[node.out];
        if (z != 0.0) {
          a[node.a] += z;
          a[node.b] += z;
        }
        break;
      }
      case Op::Sub: {
        const double z = a[node.out];
        if (z != 0.0) {
          a[node.a] += z;
          a[node.b] -= z;
        }
        break;
      }
      case Op::Mul: {
        const double z = a[node.out];
        if (z != 0.0) {
          a[node.a] += z * v[node.b];
          a[node.b] += z * v[node.a];
        }
        break;
      }
      case Op::Div: {
        const double z = a[node.out];
        if (z != 0.0) {
          a[node.a] += z / v[node.b];
          a[node.b] -= z * v[node.out] / v[node.b];
        }
        break;
      }
      case Op::AddConst:
        a[node.a] += a[node.out];
        break;
      case Op::MulConst:
        a[node.a] += a[node.out] * node.ca;
        break;
      case Op::PowInt: {
        const double z = a[node.out];
        if (z != 0.0) {
          const int k = static_cast<int>(node.ca);
          if (k != 0) a[node.a] += z * k * ipow(v[node.a], k - 1);
        }
        break;
      }
      case Op::Act: {
        const double z = a[node.out];
        if (z != 0.0) {
          a[node.a] += z * act_derivs(static_cast<ActKind>(node.aux), v[node.a]).s1;
        }
        break;
      }
      case Op::ActJet: {
        const double zv = a[node.out];
        const double z1 = a[node.out + 1];
        const double z2 = a[node.out + 2];
        if (zv != 0.0 || z1 != 0.0 || z2 != 0.0) {
          const ActDerivs d = act_derivs(static_cast<ActKind>(node.aux), v[node.a]);
          const double g1 = v[node.b];
          const double g2 = v[node.c];
          a[node.a] += zv * d.s1 + z1 * d.s2 * g1 + z2 * (d.s3 * g1 * g1 + d.s2 * g2);
          a[node.b] += z1 * d.s1 + z2 * 2.0 * d.s2 * g1;
          a[node.c] += z2 * d.s1;
        }
        break;
      }
      case Op::SumList: {
        const double z = a[node.out];
        if (z != 0.0) {
          const std::uint32_t* ids = extra_.data() + node.a;
          for (std::uint32_t i = 0; i < node.b; ++i) a[ids[i]] += z;
        }
        break;
      }
      case Op::DenseJets: {
        const std::uint32_t* e = extra_.data() + node.a;
        const std::uint32_t w_base = e[0], b_base = e[1], a_base = e[2];
        const std::uint32_t rows = e[3], inner = e[4], P = e[5], K = e[6];
        ConstMatMap Zbar(a + node.out, rows, K * P);
        ConstMatMap W(v + w_base, rows, inner);
        ConstMatMap A(v + a_base, inner, K * P);
        MatMap Abar(a + a_base, inner, K * P);
        MatMap Wbar(a + w_base, rows, inner);
        Abar.noalias() += node.ca * (W.transpose() * Zbar);
        Wbar.noalias() += node.ca * (Zbar * A.transpose());
        if (b_base != kNoId) {
          VecMap bbar(a + b_base, rows);
          bbar += Zbar.leftCols(P).rowwise().sum();
        }
        break;
      }
      case Op::ActJets: {
        const std::uint32_t* e = extra_.data() + node.a;
        const std::uint32_t g_base = e[0], rows = e[1], P = e[2], K = e[3];
        const ActKind kind = static_cast<ActKind>(node.aux);
        const std::uint32_t lane = rows * P;
        const double* g = v + g_base;
        double* gbar = a + g_base;
        const double* zbar = a + node.out;
        const std::uint32_t ndirs = (K - 1) / 2;
        for (std::uint32_t i = 0; i < lane; ++i) {
          const ActDerivs d = act_derivs(kind, g[i]);
          double acc = zbar[i] * d.s1;
          for (std::uint32_t j = 0; j < ndirs; ++j) {
            const std::uint32_t o1 = (1 + 2 * j) * lane + i;
            const std::uint32_t o2 = (2 + 2 * j) * lane + i;
            const double g1 = g[o1];
            const double g2 = g[o2];
            const double z1 = zbar[o1];
            const double z2 = zbar[o2];
            acc += z1 * d.s2 * g1 + z2 * (d.s3 * g1 * g1 + d.s2 * g2);
            gbar[o1] += z1 * d.s1 + z2 * 2.0 * d.s2 * g1;
            gbar[o2] += z2 * d.s1;
          }
          gbar[i] += acc;
        }
        break;
      }
    }
  }
}

Gradients backward(const Tape& tape, Var seed) {
  if (seed.tape != &tape) throw std::invalid_argument("backward: seed not on this tape");
  AlignedDoubles adj;
  tape.backward_into(seed.id, adj);
  return Gradients(&tape, std::move(adj));
}

// ---- Var operators -------------------------------------------------------------

Var operator+(Var a, Var b) { return a.tape->record_binary(Op::Add, a, b); }
Var operator-(Var a, Var b) { return a.tape->record_binary(Op::Sub, a, b); }
Var operator*(Var a, Var b) { return a.tape->record_binary(Op::Mul, a, b); }
Var operator/(Var a, Var b) { return a.tape->record_binary(Op::Div, a, b); }
Var operator+(Var a, double c) { return a.tape->record_unary_const(Op::AddConst, a, c); }
Var operator+(double c, Var a) { return a + c; }
Var operator-(Var a, double c) { return a + (-c); }
Var operator-(double c, Var a) { return (a * -1.0) + c; }
Var operator*(Var a, double c) { return a.tape->record_unary_const(Op::MulConst, a, c); }
Var operator*(double c, Var a) { return a * c; }
Var operator/(Var a, double c) { return a * (1.0 / c); }
Var operator-(Var a) { return a * -1.0; }

Var pow_int(Var a, int k) {
  return a.tape->record_unary_const(Op::PowInt, a, static_cast<double>(k));
}
Var tanh(Var a) { return a.tape->record_act(ActKind::Tanh, a); }
Var sin(Var a) { return a.tape->record_act(ActKind::Sin, a); }
Var cos(Var a) { return a.tape->record_act(ActKind::Cos, a); }
Var exp(Var a) { return a.tape->record_act(ActKind::Exp, a); }
Var cubic_relu(Var a) { return a.tape->record_act(ActKind::CubicRelu, a); }
Var apply_act(ActKind kind, Var a) { return a.tape->record_act(kind, a); }

}  // namespace vspinn
