#include "metacon/tape.hpp"

namespace metacon {

Var Tape::push(Node&& n) {
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Mat value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.needs_grad = requires_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

double Tape::scalar_value(Var v) const {
  const Mat& m = value(v);
  if (m.rows() != 1 || m.cols() != 1)
    throw std::runtime_error("scalar_value: node is not 1x1");
  return m(0, 0);
}

Mat Tape::grad(Var v) const {
  const Node& n = node(v.idx);
  if (n.adjoint.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.adjoint;
}

void Tape::check_same(const char* what, Var a, Var b) const {
  const Mat& x = value(a);
  const Mat& y = value(b);
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::runtime_error(std::string(what) + ": dimension mismatch (" +
                             std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()) + " vs " +
                             std::to_string(y.rows()) + "x" +
                             std::to_string(y.cols()) + ")");
}

Var Tape::unary(Op op, Var a, double c0, double c1) {
  Node n;
  n.op = op;
  n.a = a.idx;
  n.c0 = c0;
  n.c1 = c1;
  n.needs_grad = node(a.idx).needs_grad;
  const Mat& x = node(a.idx).value;
  switch (op) {
    case Op::Tanh: n.value = x.array().tanh().matrix(); break;
    case Op::Sigmoid: n.value = (1.0 / (1.0 + (-x.array()).exp())).matrix(); break;
    case Op::Exp: n.value = x.array().exp().matrix(); break;
    case Op::Log: n.value = x.array().log().matrix(); break;
    case Op::Clamp: n.value = x.array().max(c0).min(c1).matrix(); break;
    case Op::Scale: n.value = c0 * x; break;
    case Op::AddConst: n.value = (x.array() + c0).matrix(); break;
    case Op::Sum: n.value = Mat::Constant(1, 1, x.sum()); break;
    case Op::Mean: n.value = Mat::Constant(1, 1, x.mean()); break;
    case Op::RowSum: n.value = x.rowwise().sum(); break;
    default: throw std::runtime_error("unary: bad op");
  }
  return push(std::move(n));
}

Var Tape::binary(Op op, Var a, Var b) {
  Node n;
  n.op = op;
  n.a = a.idx;
  n.b = b.idx;
  n.needs_grad = node(a.idx).needs_grad || node(b.idx).needs_grad;
  const Mat& x = node(a.idx).value;
  const Mat& y = node(b.idx).value;
  switch (op) {
    case Op::Add: check_same("add", a, b); n.value = x + y; break;
    case Op::Sub: check_same("sub", a, b); n.value = x - y; break;
    case Op::Mul: check_same("mul", a, b); n.value = x.cwiseProduct(y); break;
    case Op::CMin: check_same("cmin", a, b); n.value = x.cwiseMin(y); break;
    case Op::MatMul:
      if (x.cols() != y.rows())
        throw std::runtime_error("matmul: dimension mismatch");
      n.value = x * y;
      break;
    case Op::AddRow:
      if (y.rows() != 1 || y.cols() != x.cols())
        throw std::runtime_error("add_row: dimension mismatch");
      n.value = x.rowwise() + y.row(0);
      break;
    case Op::MulRow:
      if (y.rows() != 1 || y.cols() != x.cols())
        throw std::runtime_error("mul_row: dimension mismatch");
      n.value = (x.array().rowwise() * y.row(0).array()).matrix();
      break;
    case Op::ConcatCols:
      if (x.rows() != y.rows())
        throw std::runtime_error("concat_cols: row mismatch");
      n.value.resize(x.rows(), x.cols() + y.cols());
      n.value << x, y;
      break;
    case Op::ConcatRows:
      if (x.cols() != y.cols())
        throw std::runtime_error("concat_rows: col mismatch");
      n.value.resize(x.rows() + y.rows(), x.cols());
      n.value << x, y;
      break;
    default: throw std::runtime_error("binary: bad op");
  }
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) { return binary(Op::Add, a, b); }
Var Tape::sub(Var a, Var b) { return binary(Op::Sub, a, b); }
Var Tape::mul(Var a, Var b) { return binary(Op::Mul, a, b); }
Var Tape::cmin(Var a, Var b) { return binary(Op::CMin, a, b); }
Var Tape::matmul(Var a, Var b) { return binary(Op::MatMul, a, b); }
Var Tape::add_row(Var x, Var row) { return binary(Op::AddRow, x, row); }
Var Tape::mul_row(Var x, Var row) { return binary(Op::MulRow, x, row); }
Var Tape::concat_cols(Var a, Var b) { return binary(Op::ConcatCols, a, b); }
Var Tape::concat_rows(Var a, Var b) { return binary(Op::ConcatRows, a, b); }

Var Tape::tanh(Var a) { return unary(Op::Tanh, a); }
Var Tape::sigmoid(Var a) { return unary(Op::Sigmoid, a); }
Var Tape::exp(Var a) { return unary(Op::Exp, a); }
Var Tape::log(Var a) { return unary(Op::Log, a); }
Var Tape::clamp(Var a, double lo, double hi) { return unary(Op::Clamp, a, lo, hi); }
Var Tape::scale(Var a, double c) { return unary(Op::Scale, a, c); }
Var Tape::add_const(Var a, double c) { return unary(Op::AddConst, a, c); }
Var Tape::sum(Var a) { return unary(Op::Sum, a); }
Var Tape::mean(Var a) { return unary(Op::Mean, a); }
Var Tape::row_sum(Var a) { return unary(Op::RowSum, a); }

Var Tape::slice_rows(Var a, int from, int n) {
  const Mat& x = value(a);
  if (from < 0 || n < 0 || from + n > x.rows())
    throw std::runtime_error("slice_rows: out of range");
  Node nn;
  nn.op = Op::SliceRows;
  nn.a = a.idx;
  nn.i0 = from;
  nn.i1 = n;
  nn.needs_grad = node(a.idx).needs_grad;
  nn.value = x.middleRows(from, n);
  return push(std::move(nn));
}

Var Tape::tile_rows(Var a, int k) {
  const Mat& x = value(a);
  Node n;
  n.op = Op::TileRows;
  n.a = a.idx;
  n.i0 = k;
  n.needs_grad = node(a.idx).needs_grad;
  n.value.resize(x.rows() * k, x.cols());
  for (int i = 0; i < k; ++i) n.value.middleRows(i * x.rows(), x.rows()) = x;
  return push(std::move(n));
}

Var Tape::repeat_rows(Var a, int k) {
  const Mat& x = value(a);
  Node n;
  n.op = Op::RepeatRows;
  n.a = a.idx;
  n.i0 = k;
  n.needs_grad = node(a.idx).needs_grad;
  n.value.resize(x.rows() * k, x.cols());
  for (int r = 0; r < x.rows(); ++r)
    for (int j = 0; j < k; ++j) n.value.row(r * k + j) = x.row(r);
  return push(std::move(n));
}

void Tape::accumulate(int target, const Mat& g) {
  Node& t = node(target);
  if (!t.needs_grad) return;
  if (t.adjoint.size() == 0)
    t.adjoint = g;
  else
    t.adjoint += g;
}

void Tape::backward(Var loss) {
  const Node& ln = node(loss.idx);
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    throw std::runtime_error("backward: loss is not a scalar");
  for (auto& n : nodes_) n.adjoint.resize(0, 0);
  node(loss.idx).adjoint = Mat::Constant(1, 1, 1.0);

  for (int i = loss.idx; i >= 0; --i) {
    Node& n = node(i);
    if (n.adjoint.size() == 0 || !n.needs_grad) continue;
    const Mat& g = n.adjoint;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Add:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::Sub:
        accumulate(n.a, g);
        accumulate(n.b, -g);
        break;
      case Op::Mul:
        accumulate(n.a, g.cwiseProduct(node(n.b).value));
        accumulate(n.b, g.cwiseProduct(node(n.a).value));
        break;
      case Op::CMin: {
        const Mat& x = node(n.a).value;
        const Mat& y = node(n.b).value;
        Mat take_a = (x.array() <= y.array()).cast<double>().matrix();
        accumulate(n.a, g.cwiseProduct(take_a));
        accumulate(n.b, g.cwiseProduct(Mat((1.0 - take_a.array()).matrix())));
        break;
      }
      case Op::MatMul:
        accumulate(n.a, g * node(n.b).value.transpose());
        accumulate(n.b, node(n.a).value.transpose() * g);
        break;
      case Op::AddRow:
        accumulate(n.a, g);
        accumulate(n.b, g.colwise().sum());
        break;
      case Op::MulRow: {
        const Mat& x = node(n.a).value;
        const Mat& row = node(n.b).value;
        accumulate(n.a, Mat((g.array().rowwise() * row.row(0).array()).matrix()));
        accumulate(n.b, g.cwiseProduct(x).colwise().sum());
        break;
      }
      case Op::Tanh:
        accumulate(n.a, Mat((g.array() * (1.0 - n.value.array().square())).matrix()));
        break;
      case Op::Sigmoid:
        accumulate(n.a, Mat((g.array() * n.value.array() * (1.0 - n.value.array())).matrix()));
        break;
      case Op::Exp:
        accumulate(n.a, g.cwiseProduct(n.value));
        break;
      case Op::Log:
        accumulate(n.a, Mat((g.array() / node(n.a).value.array()).matrix()));
        break;
      case Op::Clamp: {
        const Mat& x = node(n.a).value;
        Mat inside = ((x.array() > n.c0) && (x.array() < n.c1)).cast<double>().matrix();
        accumulate(n.a, g.cwiseProduct(inside));
        break;
      }
      case Op::Scale:
        accumulate(n.a, n.c0 * g);
        break;
      case Op::AddConst:
        accumulate(n.a, g);
        break;
      case Op::Sum: {
        const Mat& x = node(n.a).value;
        accumulate(n.a, Mat::Constant(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::Mean: {
        const Mat& x = node(n.a).value;
        accumulate(n.a, Mat::Constant(x.rows(), x.cols(),
                                      g(0, 0) / static_cast<double>(x.size())));
        break;
      }
      case Op::RowSum: {
        const Mat& x = node(n.a).value;
        accumulate(n.a, g.replicate(1, x.cols()));
        break;
      }
      case Op::ConcatCols: {
        const Mat& x = node(n.a).value;
        accumulate(n.a, g.leftCols(x.cols()));
        accumulate(n.b, g.rightCols(g.cols() - x.cols()));
        break;
      }
      case Op::ConcatRows: {
        const Mat& x = node(n.a).value;
        accumulate(n.a, g.topRows(x.rows()));
        accumulate(n.b, g.bottomRows(g.rows() - x.rows()));
        break;
      }
      case Op::SliceRows: {
        const Mat& x = node(n.a).value;
        Mat full = Mat::Zero(x.rows(), x.cols());
        full.middleRows(n.i0, n.i1) = g;
        accumulate(n.a, full);
        break;
      }
      case Op::TileRows: {
        const Mat& x = node(n.a).value;
        Mat acc = Mat::Zero(x.rows(), x.cols());
        for (int t = 0; t < n.i0; ++t) acc += g.middleRows(t * x.rows(), x.rows());
        accumulate(n.a, acc);
        break;
      }
      case Op::RepeatRows: {
        const Mat& x = node(n.a).value;
        Mat acc = Mat::Zero(x.rows(), x.cols());
        for (int r = 0; r < x.rows(); ++r)
          for (int j = 0; j < n.i0; ++j) acc.row(r) += g.row(r * n.i0 + j);
        accumulate(n.a, acc);
        break;
      }
    }
  }
}

Var vstack(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::runtime_error("vstack: empty");
  std::vector<Var> level = parts;
  while (level.size() > 1) {
    std::vector<Var> next;
    for (size_t i = 0; i + 1 < level.size(); i += 2)
      next.push_back(t.concat_rows(level[i], level[i + 1]));
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0];
}

}  // namespace metacon
