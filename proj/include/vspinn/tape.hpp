#pragma once

#include <cstdint>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace vspinn {

/// 64-byte-aligned storage for tape values and adjoints. Keeping the buffer
/// alignment fixed makes the vectorized kernels bit-reproducible across
/// runs (heap addresses otherwise vary, and lane peeling with them).
template <typename T, std::size_t Alignment>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Alignment>&) {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(Alignment)));
  }
  void deallocate(T* p, std::size_t) noexcept {
    ::operator delete(p, std::align_val_t(Alignment));
  }
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };
  bool operator==(const AlignedAllocator&) const { return true; }
  bool operator!=(const AlignedAllocator&) const { return false; }
};

using AlignedDoubles = std::vector<double, AlignedAllocator<double, 64>>;

class Tape;

/// Handle to one scalar value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;
};

enum class LeafKind : std::uint8_t { Parameter, Input };

/// Unary activations with exact derivative rules up to third order (the
/// reverse pass over second-derivative jets needs sigma''').
enum class ActKind : std::uint8_t { Tanh, Sin, Cos, Exp, CubicRelu };

/// sigma, sigma', sigma'', sigma''' at g. cubic_relu = max{0,x}^3 uses the
/// weak-derivative convention: all derivatives are 0 at x <= 0, including
/// exactly at x = 0.
struct ActDerivs {
  double s, s1, s2, s3;
};
ActDerivs act_derivs(ActKind kind, double g);

enum class Op : std::uint8_t {
  LeafScalar,
  Const,
  Add,
  Sub,
  Mul,
  Div,
  AddConst,   // a + ca
  MulConst,   // a * ca
  PowInt,     // a ^ (int)ca
  Act,        // unary activation, kind in aux
  ActJet,     // fused jet activation: (g, g1, g2) -> (v, d1, d2)
  SumList,    // sum of listed ids, fixed order
  LeafBlock,  // contiguous block of leaves
  InputJetBlock,  // point coordinates as input leaves + constant seed lanes
  DenseJets,  // Z = scale * W * A (+ bias on value-lane columns)
  ActJets,    // elementwise jet activation over a lane block
};

struct Node {
  Op op = Op::Const;
  std::uint8_t aux = 0;           // ActKind / LeafKind payload
  std::uint32_t a = 0, b = 0, c = 0;  // scalar operands, or offset into extra
  std::uint32_t out = 0;          // first output id
  std::uint32_t n = 1;            // number of output ids
  double ca = 0.0;                // constant operand / scale / exponent
};

/// Result of a reverse pass: d(seed)/d(leaf) for every leaf of the tape
/// (leaves that do not influence the seed hold 0). Adjoints of interior
/// nodes are retained as well; leaf queries are validated.
class Gradients {
 public:
  Gradients(const Tape* tape, AlignedDoubles adjoints)
      : tape_(tape), adj_(std::move(adjoints)) {}

  /// Gradient with respect to a leaf Var. Throws if not a leaf of this tape.
  double at(Var leaf) const;
  double at_id(std::uint32_t leaf_id) const;
  /// Adjoints of all ids (leaf gradients live at leaf ids).
  const AlignedDoubles& adjoints() const { return adj_; }

 private:
  const Tape* tape_;
  AlignedDoubles adj_;
};

/// Append-only record of operations over scalar slots. Ids are dense and
/// strictly increasing; every node's inputs precede it, so one forward sweep
/// (replay) or one reverse sweep (backward) visits nodes in valid order.
/// Fused block nodes (DenseJets/ActJets) produce a contiguous range of ids:
/// a column-major rows x (K*P) matrix whose lanes are
///   [value, d1/dir0, d2/dir0, d1/dir1, d2/dir1, ...],
/// column index = lane * P + point.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Drops all recorded nodes but keeps allocated capacity; reopens the tape.
  void reset();
  void close() { open_ = false; }
  bool is_open() const { return open_; }

  std::size_t num_values() const { return vals_.size(); }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t leaf_count() const { return leaf_count_; }

  double value(Var v) const;
  double value_at(std::uint32_t id) const { return vals_[id]; }
  bool is_leaf(std::uint32_t id) const;

  Var lift(LeafKind kind, double value);
  Var constant(double value);

  /// Contiguous block of n leaves initialized from data; returns first id.
  std::uint32_t lift_block(LeafKind kind, const double* data, std::uint32_t n);

  /// Inputs for a batch of P points of dimension dim, plus constant jet seed
  /// lanes for each requested direction (d1 = unit vector, d2 = 0).
  /// pts layout: pts[p*dim + i]. The value columns are Input leaves.
  std::uint32_t input_jet_block(const double* pts, std::uint32_t dim, std::uint32_t P,
                                std::span<const int> dirs);

  /// Z[rows x K*P] = scale * W[rows x inner] * A[inner x K*P]; bias (if
  /// b_base != kNoId) is added to the P value-lane columns only.
  std::uint32_t dense_jets(std::uint32_t w_base, std::uint32_t b_base, std::uint32_t a_base,
                           std::uint32_t rows, std::uint32_t inner, std::uint32_t P,
                           std::uint32_t K, double scale);

  /// Elementwise jet activation over a rows x (K*P) block.
  std::uint32_t act_jets(ActKind kind, std::uint32_t g_base, std::uint32_t rows,
                         std::uint32_t P, std::uint32_t K);

  Var sum(std::span<const Var> terms);

  /// Recomputes every non-leaf value from the recorded nodes. With unchanged
  /// leaves the result is bit-identical to the original evaluation.
  void replay();

  static constexpr std::uint32_t kNoId = 0xFFFFFFFFu;

  // Scalar record operations (used by the Var operator overloads).
  Var record_binary(Op op, Var a, Var b);
  Var record_unary_const(Op op, Var a, double c);
  Var record_act(ActKind kind, Var a);
  Var record_act_jet(ActKind kind, Var g, Var g1, Var g2, Var out[3]);

  /// Reverse sweep from seed; adj is resized/zeroed and filled with
  /// d(seed)/d(id) for every id on the tape.
  void backward_into(std::uint32_t seed_id, AlignedDoubles& adj) const;

 private:
  friend class Gradients;

  std::uint32_t push_values(std::uint32_t n);
  void require_open() const;
  void eval_node(const Node& node);

  std::vector<Node> nodes_;
  AlignedDoubles vals_;
  std::vector<std::uint32_t> extra_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> leaf_ranges_;  // [begin, end)
  std::size_t leaf_count_ = 0;
  bool open_ = true;
};

/// Reverse pass over the tape: gradient of a scalar seed with respect to
/// every leaf. The seed must live on the given tape.
Gradients backward(const Tape& tape, Var seed);

// ---- scalar Var arithmetic -------------------------------------------------

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator-(Var a);

Var pow_int(Var a, int k);
Var tanh(Var a);
Var sin(Var a);
Var cos(Var a);
Var exp(Var a);
Var cubic_relu(Var a);
Var apply_act(ActKind kind, Var a);

/// Exact integer power by repeated multiplication (deterministic).
double ipow(double base, int k);

}  // namespace vspinn
