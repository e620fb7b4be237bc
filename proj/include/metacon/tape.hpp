#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace metacon {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class Tape;

// Handle to a matrix-valued node on a tape.
struct Var {
  Tape* tape = nullptr;
  int idx = -1;
  bool valid() const { return tape != nullptr && idx >= 0; }
};

// Reverse-mode automatic differentiation over dense double matrices.
// Each op records enough to push adjoints back to its inputs; backward()
// walks the tape once in reverse. Nodes that cannot reach a differentiable
// leaf are skipped entirely.
class Tape {
 public:
  Var leaf(Mat value, bool requires_grad);
  Var constant(Mat value) { return leaf(std::move(value), false); }
  Var scalar(double v) { return constant(Mat::Constant(1, 1, v)); }

  const Mat& value(Var v) const { return node(v.idx).value; }
  double scalar_value(Var v) const;

  // Gradient of the last backward() pass w.r.t. node v (zero if unreached).
  Mat grad(Var v) const;

  // elementwise, same shape
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var cmin(Var a, Var b);

  Var matmul(Var a, Var b);
  Var add_row(Var x, Var row);  // (n x k) + (1 x k), broadcast over rows
  Var mul_row(Var x, Var row);  // (n x k) ∘ (1 x k), broadcast over rows

  Var tanh(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var clamp(Var a, double lo, double hi);

  Var scale(Var a, double c);
  Var add_const(Var a, double c);
  Var neg(Var a) { return scale(a, -1.0); }

  Var sum(Var a);       // -> 1 x 1
  Var mean(Var a);      // -> 1 x 1
  Var row_sum(Var a);   // (n x k) -> (n x 1)

  Var concat_cols(Var a, Var b);
  Var concat_rows(Var a, Var b);
  Var slice_rows(Var a, int from, int n);
  Var tile_rows(Var a, int k);    // [X; X; ...] k copies
  Var repeat_rows(Var a, int k);  // each row repeated k consecutive times

  // Seeds d(loss)/d(loss) = 1 and accumulates adjoints; loss must be 1x1.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }
  void reserve(size_t n) { nodes_.reserve(n); }

 private:
  enum class Op : uint8_t {
    Leaf, Add, Sub, Mul, CMin, MatMul, AddRow, MulRow,
    Tanh, Sigmoid, Exp, Log, Clamp, Scale, AddConst,
    Sum, Mean, RowSum, ConcatCols, ConcatRows, SliceRows,
    TileRows, RepeatRows,
  };

  struct Node {
    Op op;
    bool needs_grad = false;
    int a = -1, b = -1;
    double c0 = 0.0, c1 = 0.0;  // op-specific constants
    int i0 = 0, i1 = 0;         // op-specific indices
    Mat value;
    Mat adjoint;  // sized lazily during backward
  };

  Node& node(int i) { return nodes_[static_cast<size_t>(i)]; }
  const Node& node(int i) const { return nodes_[static_cast<size_t>(i)]; }

  Var push(Node&& n);
  Var unary(Op op, Var a, double c0 = 0.0, double c1 = 0.0);
  Var binary(Op op, Var a, Var b);
  void accumulate(int target, const Mat& g);
  void check_same(const char* what, Var a, Var b) const;

  std::vector<Node> nodes_;
};

// Balanced vertical stack of row-compatible vars.
Var vstack(Tape& t, const std::vector<Var>& parts);

}  // namespace metacon
