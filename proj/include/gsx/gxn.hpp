#pragma once

#include <memory>

#include "gsx/neural_recovery.hpp"
#include "gsx/neural_sampling.hpp"

namespace gsx {

enum class Reduction { kDirect, kFused, kKron };

/// Coarsens the graph structure over the kept vertices.
/// direct: A' = Psi A Psi^T. fused: S A S^T with S = row-softmax(Psi A).
/// kron: Schur complement of the Laplacian, converted back to an adjacency.
/// All outputs are symmetrized with a zero diagonal.
Graph downsample_graph(const Graph& g, const std::vector<int>& indices, Reduction method,
                       std::vector<std::string>* warnings = nullptr);

/// Row-softmax soft assignments S = softmax(Psi A) used by fused reduction.
Matrix fused_assignment(const Graph& g, const std::vector<int>& indices);

/// Lifts per-kept-vertex features back to the fine graph by running the
/// recovery network channel-wise; kept vertices keep their values exactly.
Matrix upsample_features(const Graph& fine, const SamplingPlan& plan, const Matrix& coarse,
                         UnrolledRecovery& up);

/// One feature-crossing layer over per-scale states: each scale adds the
/// gathered finer state and the upsampled coarser state, with the boundary
/// scales omitting the side they lack.
std::vector<Matrix> feature_crossing(const std::vector<Matrix>& states,
                                     const std::vector<Graph>& graphs,
                                     const std::vector<SamplingPlan>& plans,
                                     const std::vector<UnrolledRecovery*>& upsamplers,
                                     bool use_down = true, bool use_up = true);

/// -sum_{v in mask} z_v^T log softmax(logits_v).
double vertex_loss(const Matrix& logits, const std::vector<int>& labels,
                   const std::vector<int>& mask);
ad::Tensor vertex_loss_tape(ad::Tape& tape, ad::Tensor logits, const std::vector<int>& labels,
                            const std::vector<int>& mask, int classes);

/// Sorts vertices by the last feature channel (descending, ties by id),
/// keeps the top k rows (zero-padded) and flattens row-major.
Vector sort_readout(const Matrix& features, int k);
std::vector<int> sort_readout_order(const Matrix& features, int k);

struct GxnConfig {
  std::vector<double> keep_ratios{1.0, 0.9, 0.7};
  Reduction reduction = Reduction::kFused;
  int hidden = 128;
  AffinityConfig affinity{1, 16, NormalizeMode::kSymmetric};
  UnrolledConfig upsampler{3, 2, NormalizeMode::kSymmetric};
  enum class Crossing { kAll, kNone, kEarly, kLate };
  Crossing crossing = Crossing::kAll;
  bool cross_up = true;
  bool cross_down = true;
  int sort_k = 30;
  std::uint64_t seed = 0;
};

/// Multiscale graph network: per-scale graph-conv stacks joined by
/// feature-crossing layers, with graph generation by the sampling module and
/// upsampling by the recovery module.
class GxnModel {
 public:
  GxnModel(int input_dim, int classes, GxnConfig cfg);

  const GxnConfig& config() const { return cfg_; }
  int scales() const { return static_cast<int>(cfg_.keep_ratios.size()); }
  int classes() const { return classes_; }
  int input_dim() const { return input_dim_; }

  /// Fixed per-graph scale structure: selections (top-K by the first-term
  /// criterion), reduced graphs, conv shifts and downsampled input signals.
  struct Scales {
    std::vector<Graph> graphs;             // one per scale
    std::vector<SamplingPlan> plans;       // plans[e] picks scale e+1 from scale e
    std::vector<Matrix> conv_shifts;       // self-loop symmetric normalization
    std::vector<SignalMatrix> signals;     // inputs gathered down the chain
    std::vector<std::string> warnings;
  };
  Scales build_scales(const Graph& g, const SignalMatrix& signals);

  ad::Tensor forward_tape(ad::Tape& tape, const Scales& sc);
  Matrix forward(const Scales& sc);

  /// Graph-level logits: sort-readout of the per-vertex output feeding a
  /// linear head.
  ad::Tensor graph_logits_tape(ad::Tape& tape, const Scales& sc);
  Matrix graph_logits(const Scales& sc);

  /// Selection losses of every per-scale sampler (negated MI objectives).
  ad::Tensor selection_loss_tape(ad::Tape& tape, const Scales& sc, int negatives_per_vertex,
                                 Rng& rng);

  AffinityNet& sampler(int edge) { return *samplers_[edge]; }
  UnrolledRecovery& upsampler(int edge, int slot) { return *upsamplers_[edge][slot]; }
  ad::ParameterSet& core_params() { return params_; }
  std::vector<ad::ParameterSet*> parameter_sets();

 private:
  ad::Tensor conv(ad::Tape& tape, const Matrix& shift, ad::Tensor h, ad::Parameter& w,
                  ad::Parameter& b);
  ad::Tensor cross_tape(ad::Tape& tape, const Scales& sc, std::vector<ad::Tensor>& states,
                        int slot);
  ad::Tensor upsample_tape(ad::Tape& tape, const Scales& sc, int edge, int slot,
                           ad::Tensor coarse);

  GxnConfig cfg_;
  int input_dim_ = 0;
  int classes_ = 0;
  ad::ParameterSet params_;  // conv stack + heads
  std::vector<std::unique_ptr<AffinityNet>> samplers_;
  std::vector<std::vector<std::unique_ptr<UnrolledRecovery>>> upsamplers_;
};

struct GxnTrainConfig {
  int epochs = 150;
  double learning_rate = 0.01;
  double loss_weight = 2.0;  // decays linearly to zero
  int refresh_every = 10;
  int negatives_per_vertex = 3;
  std::uint64_t seed = 0;
};

struct GxnTrainReport {
  std::vector<double> loss_trace;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Vertex classification: masked cross-entropy plus the decaying selection
/// losses; accuracy measured on the unlabeled complement.
GxnTrainReport train_gxn_vertex(GxnModel& model, const Graph& g, const SignalMatrix& signals,
                                const std::vector<int>& labels,
                                const std::vector<int>& labeled_mask,
                                const GxnTrainConfig& cfg);

struct GraphSample {
  Graph graph;
  SignalMatrix signals;
  int label = 0;
};

/// Graph classification over a dataset split.
GxnTrainReport train_gxn_graph(GxnModel& model, const std::vector<GraphSample>& train_set,
                               const std::vector<GraphSample>& test_set,
                               const GxnTrainConfig& cfg);

struct GcnConfig {
  int hidden = 16;
  int epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

struct GcnResult {
  std::vector<int> predictions;
  Matrix scores;  // n x classes
  std::vector<double> loss_trace;
};

/// Standard two-layer graph convolutional classifier (self-loop symmetric
/// normalization, relu between, trained with Adam on masked cross-entropy).
GcnResult gcn_classifier(const Graph& g, const SignalMatrix& signals,
                         const std::vector<int>& labeled_mask, const std::vector<int>& labels,
                         int classes, const GcnConfig& cfg);

/// Self-loop symmetric normalization D~^{-1/2} (A + I) D~^{-1/2}.
Matrix gcn_shift(const Graph& g);

}  // namespace gsx
