#pragma once

#include "gsx/analytic_recovery.hpp"
#include "gsx/neural_sampling.hpp"

namespace gsx {

struct UnrolledConfig {
  int layers = 8;  // K
  int degree = 3;  // L (plus the l = 0 identity term)
  NormalizeMode shift_mode = NormalizeMode::kSymmetric;
};

/// Unrolled iterative recovery: K layers, each a trainable polynomial filter
/// x <- sum_l h^{<k>}_l shift^l x followed by resetting the measured rows.
/// Layer coefficients start at the identity filter (h_0 = 1, rest 0).
class UnrolledRecovery {
 public:
  explicit UnrolledRecovery(UnrolledConfig cfg, const std::string& name_prefix = "unroll");

  const UnrolledConfig& config() const { return cfg_; }
  int layers() const { return cfg_.layers; }
  int degree() const { return cfg_.degree; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

  double coefficient(int layer, int power) const;
  void set_coefficient(int layer, int power, double value);
  /// K x (L+1) coefficient table.
  Matrix coefficient_matrix() const;
  void set_coefficients(const Matrix& table);
  ad::Parameter& coefficient_param(int layer, int power);
  const ad::Parameter& coefficient_param(int layer, int power) const;

 private:
  UnrolledConfig cfg_;
  ad::ParameterSet params_;
  std::vector<ad::Parameter*> coeffs_;  // layer-major
};

/// Numeric forward pass; throws NumericError naming the layer on non-finite
/// intermediates. Columns of y are independent measurement vectors.
Matrix unrolled_forward(const UnrolledRecovery& model, const Graph& g, const SamplingPlan& plan,
                        const Matrix& y);
Vector unrolled_forward(const UnrolledRecovery& model, const Graph& g, const SamplingPlan& plan,
                        const Vector& y);

/// Tape version: `measured_rows` carries the reset values (y / a_M) and
/// whatever gradient path the caller wired into them.
ad::Tensor unrolled_forward_tape(ad::Tape& tape, UnrolledRecovery& model, const Matrix& shift,
                                 const std::vector<int>& indices, ad::Tensor measured_rows);

/// Per-layer coefficients that make the unrolled network reproduce
/// Algorithm-1 iterations of I - alpha h(shift)^T h(shift) exactly; the
/// returned table is layers x (2 deg(h) + 1).
Matrix algorithm1_layer_coefficients(const FilterSpec& h, double alpha, int layers);

struct JointTrainConfig {
  int epochs = 120;
  double learning_rate = 0.01;
  /// Loss weight on the vertex-selection term; decays linearly to zero.
  double loss_weight = 2.0;
  enum class Mode { kSupervised, kUnsupervised };
  Mode mode = Mode::kSupervised;
  std::uint64_t seed = 0;
  /// Greedy selection is re-derived every this many epochs.
  int refresh_every = 5;
  int negatives_per_vertex = 5;
  AffinityConfig affinity;
  UnrolledConfig unroll;
};

/// Recovery loss of Eq.-style joint training: sum of squared reconstruction
/// errors over the signal columns plus loss_weight times the negated
/// selection objective.
double recovery_loss(const UnrolledRecovery& model, const AffinityNet& net, const Graph& g,
                     const SignalMatrix& signals, int m, double loss_weight,
                     const std::vector<std::pair<int, int>>& negatives);

struct JointTrainResult {
  AffinityNet sampler;
  UnrolledRecovery recovery;
  std::vector<double> loss_trace;
  std::vector<double> recovery_trace;
  std::vector<double> objective_trace;
  SamplingPlan final_plan;
};

/// Trains sampler and recovery together. Supervised mode lets gradients
/// reach the sampler through the attention vector (the discrete index set is
/// re-derived on the refresh schedule, never differentiated); unsupervised
/// mode trains the sampler only through the selection objective.
JointTrainResult train_joint(const Graph& g, const SignalMatrix& signals, int m,
                             const JointTrainConfig& cfg);

}  // namespace gsx
