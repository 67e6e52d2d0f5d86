#include "gsx/autodiff.hpp"

#include <cmath>

namespace gsx::ad {

namespace {

bool g_finite_checks = true;

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_finite(const char* op, const Matrix& m) {
  if (g_finite_checks && !m.allFinite()) {
    throw NumericError(std::string(op) + ": produced a non-finite value");
  }
}

}  // namespace

void set_finite_checks(bool enabled) { g_finite_checks = enabled; }
bool finite_checks_enabled() { return g_finite_checks; }

Parameter& ParameterSet::add(const std::string& name, int rows, int cols) {
  return add(name, Matrix(Matrix::Zero(rows, cols)));
}

Parameter& ParameterSet::add(const std::string& name, Matrix init) {
  require(find(name) == nullptr, "ParameterSet: duplicate parameter name " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = std::move(init);
  p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
  items_.push_back(std::move(p));
  return *items_.back();
}

Parameter& ParameterSet::add_glorot(const std::string& name, int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix init(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) init(i, j) = rng.uniform(-bound, bound);
  }
  return add(name, std::move(init));
}

Parameter* ParameterSet::find(const std::string& name) {
  for (auto& p : items_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : items_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

void ParameterSet::zero_grads() {
  for (auto& p : items_) p->grad.setZero();
}

const Matrix& Tensor::value() const {
  require(valid(), "Tensor: used before assignment");
  return tape_->node(index_).value;
}

const Matrix& Tensor::grad() const {
  require(valid(), "Tensor: used before assignment");
  return tape_->node(index_).grad;
}

Tensor Tape::make_node(Matrix value, bool requires_grad, std::vector<int> inputs,
                       std::function<void(Tape&, int)> backprop) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backprop = std::move(backprop);
  (void)inputs;
  nodes_.push_back(std::move(node));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::constant(Matrix v) { return make_node(std::move(v), false, {}, nullptr); }

Tensor Tape::constant(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

Tensor Tape::variable(Matrix v) { return make_node(std::move(v), true, {}, nullptr); }

Tensor Tape::param(Parameter& p) {
  Tensor t = make_node(p.value, true, {}, nullptr);
  nodes_.back().bound = &p;
  return t;
}

void Tape::accumulate(int index, const Matrix& g) {
  Node& n = nodes_[index];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Tensor loss) {
  require(loss.valid() && loss.tape() == this, "backward: loss from a different tape");
  const Node& ln = nodes_[loss.index()];
  if (ln.value.rows() != 1 || ln.value.cols() != 1) {
    throw DataError("backward: loss must be 1x1, got " + shape_of(ln.value));
  }
  accumulate(loss.index(), Matrix::Ones(1, 1));
  if (!ln.requires_grad) return;  // constant loss: nothing reachable
  for (int i = loss.index(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;  // not reached
    if (n.backprop) n.backprop(*this, i);
    if (n.bound) n.bound->grad += n.grad;
  }
}

namespace {

struct OpCheck {
  const char* op;
  void same_shape(const Matrix& a, const Matrix& b) const {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw DataError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
    }
  }
  void same_tape(Tensor a, Tensor b) const {
    require(a.valid() && b.valid() && a.tape() == b.tape(),
            std::string(op) + ": tensors from different tapes");
  }
};

Tensor unary(const char* op, Tensor a, Matrix value,
             std::function<void(Tape&, int, int)> pull) {
  check_finite(op, value);
  Tape& tape = *a.tape();
  const bool rg = tape.node(a.index()).requires_grad;
  const int ai = a.index();
  return tape.make_node(std::move(value), rg, {ai},
                        rg ? std::function<void(Tape&, int)>(
                                 [ai, pull](Tape& t, int self) { pull(t, self, ai); })
                           : nullptr);
}

Tensor binary(const char* op, Tensor a, Tensor b, Matrix value,
              std::function<void(Tape&, int, int, int)> pull) {
  OpCheck{op}.same_tape(a, b);
  check_finite(op, value);
  Tape& tape = *a.tape();
  const bool rg = tape.node(a.index()).requires_grad || tape.node(b.index()).requires_grad;
  const int ai = a.index();
  const int bi = b.index();
  return tape.make_node(std::move(value), rg, {ai, bi},
                        rg ? std::function<void(Tape&, int)>(
                                 [ai, bi, pull](Tape& t, int self) { pull(t, self, ai, bi); })
                           : nullptr);
}

}  // namespace

Tensor matmul(Tensor a, Tensor b) {
  OpCheck c{"matmul"};
  c.same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw DataError("matmul: inner dims differ, " + shape_of(a.value()) + " * " +
                    shape_of(b.value()));
  }
  return binary("matmul", a, b, a.value() * b.value(), [](Tape& t, int self, int ai, int bi) {
    const Matrix& g = t.node(self).grad;
    t.accumulate(ai, g * t.node(bi).value.transpose());
    t.accumulate(bi, t.node(ai).value.transpose() * g);
  });
}

Tensor add(Tensor a, Tensor b) {
  OpCheck c{"add"};
  c.same_shape(a.value(), b.value());
  return binary("add", a, b, a.value() + b.value(), [](Tape& t, int self, int ai, int bi) {
    t.accumulate(ai, t.node(self).grad);
    t.accumulate(bi, t.node(self).grad);
  });
}

Tensor sub(Tensor a, Tensor b) {
  OpCheck c{"sub"};
  c.same_shape(a.value(), b.value());
  return binary("sub", a, b, a.value() - b.value(), [](Tape& t, int self, int ai, int bi) {
    t.accumulate(ai, t.node(self).grad);
    t.accumulate(bi, -t.node(self).grad);
  });
}

Tensor mul(Tensor a, Tensor b) {
  OpCheck c{"mul"};
  c.same_shape(a.value(), b.value());
  return binary("mul", a, b, a.value().cwiseProduct(b.value()),
                [](Tape& t, int self, int ai, int bi) {
                  const Matrix& g = t.node(self).grad;
                  t.accumulate(ai, g.cwiseProduct(t.node(bi).value));
                  t.accumulate(bi, g.cwiseProduct(t.node(ai).value));
                });
}

Tensor add_row(Tensor a, Tensor row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DataError("add_row: row is " + shape_of(row.value()) + ", expected 1x" +
                    std::to_string(a.cols()));
  }
  Matrix v = a.value();
  v.rowwise() += row.value().row(0);
  return binary("add_row", a, row, std::move(v), [](Tape& t, int self, int ai, int bi) {
    const Matrix& g = t.node(self).grad;
    t.accumulate(ai, g);
    t.accumulate(bi, g.colwise().sum());
  });
}

Tensor scale(Tensor a, double s) {
  return unary("scale", a, s * a.value(), [s](Tape& t, int self, int ai) {
    t.accumulate(ai, s * t.node(self).grad);
  });
}

Tensor smul(Tensor a, Tensor s) {
  if (s.rows() != 1 || s.cols() != 1) {
    throw DataError("smul: scalar operand is " + shape_of(s.value()) + ", expected 1x1");
  }
  return binary("smul", a, s, s.value()(0, 0) * a.value(),
                [](Tape& t, int self, int ai, int si) {
                  const Matrix& g = t.node(self).grad;
                  t.accumulate(ai, t.node(si).value(0, 0) * g);
                  Matrix gs(1, 1);
                  gs(0, 0) = g.cwiseProduct(t.node(ai).value).sum();
                  t.accumulate(si, gs);
                });
}

Tensor transpose(Tensor a) {
  return unary("transpose", a, a.value().transpose(), [](Tape& t, int self, int ai) {
    t.accumulate(ai, t.node(self).grad.transpose());
  });
}

Tensor sigmoid(Tensor a) {
  Matrix v = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return unary("sigmoid", a, std::move(v), [](Tape& t, int self, int ai) {
    const Matrix& y = t.node(self).value;
    t.accumulate(ai, t.node(self).grad.cwiseProduct(
                         y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Tensor log(Tensor a) {
  Matrix v = a.value().unaryExpr([](double x) { return std::log(std::max(x, kLogClamp)); });
  return unary("log", a, std::move(v), [](Tape& t, int self, int ai) {
    const Matrix& x = t.node(ai).value;
    Matrix dx = x.unaryExpr([](double xi) { return xi > kLogClamp ? 1.0 / xi : 0.0; });
    t.accumulate(ai, t.node(self).grad.cwiseProduct(dx));
  });
}

Tensor exp(Tensor a) {
  Matrix v = a.value().array().exp().matrix();
  return unary("exp", a, std::move(v), [](Tape& t, int self, int ai) {
    t.accumulate(ai, t.node(self).grad.cwiseProduct(t.node(self).value));
  });
}

Tensor relu(Tensor a) {
  Matrix v = a.value().cwiseMax(0.0);
  return unary("relu", a, std::move(v), [](Tape& t, int self, int ai) {
    const Matrix& x = t.node(ai).value;
    // derivative at exactly zero is zero
    Matrix mask = x.unaryExpr([](double xi) { return xi > 0.0 ? 1.0 : 0.0; });
    t.accumulate(ai, t.node(self).grad.cwiseProduct(mask));
  });
}

Tensor row_softmax(Tensor a) {
  Matrix v = a.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double mx = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - mx).exp();
    v.row(r) /= v.row(r).sum();
  }
  return unary("row_softmax", a, std::move(v), [](Tape& t, int self, int ai) {
    const Matrix& y = t.node(self).value;
    const Matrix& g = t.node(self).grad;
    Matrix dx(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double dot = g.row(r).dot(y.row(r));
      dx.row(r) = (g.row(r).array() - dot).matrix().cwiseProduct(y.row(r));
    }
    t.accumulate(ai, dx);
  });
}

Tensor mean(Tensor a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().mean();
  const double inv = 1.0 / static_cast<double>(a.value().size());
  return unary("mean", a, std::move(v), [inv](Tape& t, int self, int ai) {
    const double g = t.node(self).grad(0, 0);
    const Matrix& x = t.node(ai).value;
    t.accumulate(ai, Matrix::Constant(x.rows(), x.cols(), g * inv));
  });
}

Tensor sum(Tensor a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return unary("sum", a, std::move(v), [](Tape& t, int self, int ai) {
    const double g = t.node(self).grad(0, 0);
    const Matrix& x = t.node(ai).value;
    t.accumulate(ai, Matrix::Constant(x.rows(), x.cols(), g));
  });
}

Tensor gather_rows(Tensor a, const std::vector<int>& rows) {
  const Matrix& x = a.value();
  Matrix v(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < x.rows(), "gather_rows: row index out of range");
    v.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  }
  auto idx = rows;
  return unary("gather_rows", a, std::move(v), [idx](Tape& t, int self, int ai) {
    const Matrix& g = t.node(self).grad;
    Matrix dx = Matrix::Zero(t.node(ai).value.rows(), t.node(ai).value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      dx.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
    }
    t.accumulate(ai, dx);
  });
}

Tensor set_rows(Tensor a, const std::vector<int>& rows, Tensor replacement) {
  OpCheck c{"set_rows"};
  c.same_tape(a, replacement);
  if (replacement.rows() != static_cast<int>(rows.size()) ||
      replacement.cols() != a.cols()) {
    throw DataError("set_rows: replacement is " + shape_of(replacement.value()) + ", expected " +
                    std::to_string(rows.size()) + "x" + std::to_string(a.cols()));
  }
  Matrix v = a.value();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < v.rows(), "set_rows: row index out of range");
    v.row(rows[i]) = replacement.value().row(static_cast<Eigen::Index>(i));
  }
  auto idx = rows;
  return binary("set_rows", a, replacement, std::move(v),
                [idx](Tape& t, int self, int ai, int ri) {
                  Matrix ga = t.node(self).grad;
                  Matrix gr(idx.size(), ga.cols());
                  // Reverse order so that with repeated indices only the
                  // surviving (last) write receives the gradient.
                  for (std::size_t i = idx.size(); i-- > 0;) {
                    gr.row(static_cast<Eigen::Index>(i)) = ga.row(idx[i]);
                    ga.row(idx[i]).setZero();
                  }
                  t.accumulate(ai, ga);
                  t.accumulate(ri, gr);
                });
}

Tensor concat_cols(Tensor a, Tensor b) {
  if (a.rows() != b.rows()) {
    throw DataError("concat_cols: row counts differ, " + shape_of(a.value()) + " vs " +
                    shape_of(b.value()));
  }
  Matrix v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  const int ac = a.cols();
  return binary("concat_cols", a, b, std::move(v), [ac](Tape& t, int self, int ai, int bi) {
    const Matrix& g = t.node(self).grad;
    t.accumulate(ai, g.leftCols(ac));
    t.accumulate(bi, g.rightCols(g.cols() - ac));
  });
}

Tensor reshape(Tensor a, int rows, int cols) {
  if (rows * cols != a.rows() * a.cols()) {
    throw DataError("reshape: cannot reshape " + shape_of(a.value()) + " to " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
  const Matrix& x = a.value();
  const int old_cols = a.cols();
  Matrix v(rows, cols);
  for (int p = 0; p < rows * cols; ++p) {
    v(p / cols, p % cols) = x(p / old_cols, p % old_cols);
  }
  return unary("reshape", a, std::move(v), [old_cols, cols](Tape& t, int self, int ai) {
    const Matrix& g = t.node(self).grad;
    const Matrix& x = t.node(ai).value;
    Matrix dx(x.rows(), x.cols());
    const int total = static_cast<int>(x.size());
    for (int p = 0; p < total; ++p) {
      dx(p / old_cols, p % old_cols) = g(p / cols, p % cols);
    }
    t.accumulate(ai, dx);
  });
}

void adam_step(ParameterSet& params, AdamState& state, double lr) {
  require(lr > 0.0, "adam_step: learning rate must be positive");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), Matrix());
    state.v.assign(params.size(), Matrix());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i] = Matrix::Zero(params.at(i).value.rows(), params.at(i).value.cols());
      state.v[i] = Matrix::Zero(params.at(i).value.rows(), params.at(i).value.cols());
    }
    state.step = 0;
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params.at(i);
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * p.grad;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * p.grad.cwiseProduct(p.grad);
    const Matrix mhat = state.m[i] / c1;
    const Matrix vhat = state.v[i] / c2;
    p.value -= lr * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + state.epsilon).matrix());
  }
}

double grad_check(const std::function<Tensor(Tape&)>& build, ParameterSet& params, double eps,
                  const std::function<bool(const Parameter&, int, int)>& skip) {
  params.zero_grads();
  {
    Tape tape;
    Tensor loss = build(tape);
    tape.backward(loss);
  }
  std::vector<Matrix> analytic;
  for (std::size_t i = 0; i < params.size(); ++i) analytic.push_back(params.at(i).grad);

  double max_rel = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params.at(i);
    for (int r = 0; r < p.value.rows(); ++r) {
      for (int c = 0; c < p.value.cols(); ++c) {
        if (skip && skip(p, r, c)) continue;
        const double saved = p.value(r, c);
        p.value(r, c) = saved + eps;
        Tape tp;
        const double fp = build(tp).value()(0, 0);
        p.value(r, c) = saved - eps;
        Tape tm;
        const double fm = build(tm).value()(0, 0);
        p.value(r, c) = saved;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double a = analytic[i](r, c);
        const double rel = std::abs(numeric - a) / std::max({1e-6, std::abs(numeric), std::abs(a)});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  return max_rel;
}

Mlp Mlp::create(ParameterSet& params, const std::string& prefix, int in, int hidden, int out,
                Rng& rng) {
  Mlp mlp;
  mlp.w1 = &params.add_glorot(prefix + ".w1", in, hidden, rng);
  mlp.b1 = &params.add(prefix + ".b1", 1, hidden);
  mlp.w2 = &params.add_glorot(prefix + ".w2", hidden, out, rng);
  mlp.b2 = &params.add(prefix + ".b2", 1, out);
  return mlp;
}

Tensor Mlp::forward(Tape& tape, Tensor x) const {
  Tensor h = relu(add_row(matmul(x, tape.param(*w1)), tape.param(*b1)));
  return add_row(matmul(h, tape.param(*w2)), tape.param(*b2));
}

Matrix Mlp::forward_value(const Matrix& x) const {
  Matrix h = ((x * w1->value).rowwise() + b1->value.row(0)).cwiseMax(0.0);
  return (h * w2->value).rowwise() + b2->value.row(0);
}

}  // namespace gsx::ad
