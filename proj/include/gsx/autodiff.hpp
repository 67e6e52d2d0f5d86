#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gsx/rng.hpp"
#include "gsx/types.hpp"

namespace gsx::ad {

/// Inputs to log() below this are clamped (and carry zero gradient there).
inline constexpr double kLogClamp = 1e-12;

/// Named trainable array. Gradients accumulate across backward passes until
/// zero_grads() is called.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

class ParameterSet {
 public:
  Parameter& add(const std::string& name, int rows, int cols);
  Parameter& add(const std::string& name, Matrix init);
  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), the documented default init.
  Parameter& add_glorot(const std::string& name, int rows, int cols, Rng& rng);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  std::size_t size() const { return items_.size(); }
  Parameter& at(std::size_t i) { return *items_[i]; }
  const Parameter& at(std::size_t i) const { return *items_[i]; }
  void zero_grads();

 private:
  std::vector<std::unique_ptr<Parameter>> items_;
};

class Tape;

/// Handle into a tape node; cheap to copy, valid while the tape lives.
class Tensor {
 public:
  Tensor() = default;
  const Matrix& value() const;
  const Matrix& grad() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int index() const { return index_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, int index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  int index_ = -1;
};

/// Record of one forward pass. Nodes are appended in topological order;
/// backward() walks them once in reverse. A tape is confined to one logical
/// execution context.
class Tape {
 public:
  Tensor constant(Matrix v);
  Tensor constant(double v);
  /// Tape-local leaf that accumulates a gradient (for tests).
  Tensor variable(Matrix v);
  /// Leaf bound to an external parameter; backward() adds into p.grad.
  Tensor param(Parameter& p);

  /// Populates gradients of every node reachable from a scalar loss.
  void backward(Tensor loss);

  int size() const { return static_cast<int>(nodes_.size()); }

  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* bound = nullptr;
    std::function<void(Tape&, int)> backprop;
  };

  Node& node(int i) { return nodes_[i]; }
  const Node& node(int i) const { return nodes_[i]; }

  Tensor make_node(Matrix value, bool requires_grad, std::vector<int> inputs,
                   std::function<void(Tape&, int)> backprop);
  void accumulate(int index, const Matrix& g);

 private:
  std::vector<Node> nodes_;
};

/// Toggle the per-op finite check (on by default).
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

// Primitive op set. Shape mismatches throw DataError naming the op and the
// offending shapes; non-finite results throw NumericError naming the op.
Tensor matmul(Tensor a, Tensor b);
Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);       // elementwise
Tensor add_row(Tensor a, Tensor row); // adds a 1 x c row to every row of a
Tensor scale(Tensor a, double s);
Tensor smul(Tensor a, Tensor s);      // multiply by a 1 x 1 tensor
Tensor transpose(Tensor a);
Tensor sigmoid(Tensor a);
Tensor log(Tensor a);                 // log(max(x, kLogClamp))
Tensor exp(Tensor a);
Tensor relu(Tensor a);
Tensor row_softmax(Tensor a);
Tensor mean(Tensor a);                // 1 x 1
Tensor sum(Tensor a);                 // 1 x 1
Tensor gather_rows(Tensor a, const std::vector<int>& rows);
Tensor set_rows(Tensor a, const std::vector<int>& rows, Tensor replacement);
Tensor concat_cols(Tensor a, Tensor b);
Tensor reshape(Tensor a, int rows, int cols);  // row-major element order

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

/// Standard bias-corrected Adam update over params' accumulated grads.
void adam_step(ParameterSet& params, AdamState& state, double lr);

/// Central-difference check of backward() against the scalar produced by
/// `build`; returns the maximum relative error over all parameter
/// coordinates. `skip` may exclude coordinates (e.g. at relu boundaries).
double grad_check(const std::function<Tensor(Tape&)>& build, ParameterSet& params, double eps,
                  const std::function<bool(const Parameter&, int, int)>& skip = nullptr);

/// Two affine layers with a relu between; the building block for the vertex
/// embedder and the affinity head.
struct Mlp {
  Parameter* w1 = nullptr;
  Parameter* b1 = nullptr;
  Parameter* w2 = nullptr;
  Parameter* b2 = nullptr;

  static Mlp create(ParameterSet& params, const std::string& prefix, int in, int hidden, int out,
                    Rng& rng);
  Tensor forward(Tape& tape, Tensor x) const;
  Matrix forward_value(const Matrix& x) const;
};

}  // namespace gsx::ad
