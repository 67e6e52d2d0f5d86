#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gsx/autodiff.hpp"
#include "gsx/graph.hpp"

namespace gsx {

struct AffinityConfig {
  int radius = 1;      // neighborhood hop radius R
  int embed_dim = 32;  // d
  NormalizeMode shift_mode = NormalizeMode::kSymmetric;
};

struct SamplerTrainConfig {
  int epochs = 150;
  double learning_rate = 0.01;
  int negatives_per_vertex = 5;
  std::uint64_t seed = 0;
};

/// Per-graph precomputation shared by every sampler op: the signals and the
/// shift powers that weight hop-r neighbors.
struct SamplerContext {
  const Graph* graph = nullptr;
  SignalMatrix signals;
  std::vector<Matrix> shift_pows;
};

/// Affinity network T_w(s_v, q_{N_u}) = S_w(E_w(s_v), P_w(q_{N_u})):
/// a vertex embedder, per-hop neighborhood aggregation weights, and a scalar
/// affinity head. The score feeds both vertex selection and the attention
/// vector.
class AffinityNet {
 public:
  AffinityNet(int signal_dim, AffinityConfig cfg, std::uint64_t seed);

  const AffinityConfig& config() const { return cfg_; }
  int signal_dim() const { return signal_dim_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }
  ad::Parameter& hop_weight(int r) { return *hop_weights_[r]; }

  SamplerContext make_context(const Graph& g, const SignalMatrix& signals) const;

  /// E_w rows for every vertex.
  Matrix vertex_embeddings(const SignalMatrix& signals) const;
  /// P_w rows for every vertex: (1/(R+1)) sum_r sum_nu (shift^r)_{nu,u}
  /// W^(r) E_w(s_nu), batched over anchors.
  Matrix neighborhood_embeddings(const SamplerContext& ctx) const;
  /// T for row-aligned vertex/neighborhood embedding pairs.
  Vector affinity_values(const Matrix& e_rows, const Matrix& p_rows) const;

  struct TapeEmbeddings {
    ad::Tensor e;
    ad::Tensor p;
  };
  TapeEmbeddings embeddings_tape(ad::Tape& tape, const SamplerContext& ctx) const;
  ad::Tensor affinity_tape(ad::Tape& tape, ad::Tensor e_rows, ad::Tensor p_rows) const;
  /// Raw affinity T(v, N_v) for every vertex, as an n x 1 tensor.
  ad::Tensor self_affinity_tape(ad::Tape& tape, const SamplerContext& ctx) const;

 private:
  AffinityConfig cfg_;
  int signal_dim_;
  ad::ParameterSet params_;
  ad::Mlp e_w_;
  ad::Mlp s_w_;
  std::vector<ad::Parameter*> hop_weights_;
};

/// P_w(q_{N_u}) for a single anchor.
Vector neighborhood_embed(const AffinityNet& net, const Graph& g, const SignalMatrix& signals,
                          int u);

/// T_w(s_v, q_{N_u}).
double affinity(const AffinityNet& net, const Graph& g, const SignalMatrix& signals, int v,
                int u);

/// Numerically stable log sigma(t) and log(1 - sigma(t)).
double log_sigmoid(double t);
double log_one_minus_sigmoid(double t);

/// mean_{v in set} log sigma(T(v, N_v)) +
/// mean_{(v,u) in negatives} log(1 - sigma(T(v, N_u))). Always <= 0.
double mi_objective(const AffinityNet& net, const Graph& g, const SignalMatrix& signals,
                    const std::vector<int>& vertex_set,
                    const std::vector<std::pair<int, int>>& negatives);

/// Draws k negatives (v, u), u != v, for every v; resampled each epoch.
std::vector<std::pair<int, int>> sample_negatives(int n, int per_vertex, Rng& rng);

struct SamplerTrainResult {
  std::vector<double> objective_trace;
};

/// Adam ascent of the estimated divergence over all vertices.
SamplerTrainResult train_affinity(AffinityNet& net, const Graph& g, const SignalMatrix& signals,
                                  const SamplerTrainConfig& cfg);

/// C(M) with the frozen net: first term averaged over M, second over ordered
/// distinct pairs scaled by 1/|M|^2. Pair sums above `pair_sample_threshold`
/// are estimated by uniform pair sampling (seeded).
double criterion_score(const AffinityNet& net, const Graph& g, const SignalMatrix& signals,
                       const std::vector<int>& candidate_set, int pair_sample_threshold = 4096,
                       std::uint64_t seed = 0);

struct SelectionResult {
  SamplingPlan plan;
  std::vector<double> criterion_trace;
};

/// Greedy maximization of C: best singleton first, then best extension.
/// Ties go to the lowest vertex id; attention comes from attention_vector.
SelectionResult greedy_select(const AffinityNet& net, const Graph& g,
                              const SignalMatrix& signals, int m);

/// a_v = sigma(T_w(s_v, q_{N_v})).
Vector attention_vector(const AffinityNet& net, const Graph& g, const SignalMatrix& signals);

}  // namespace gsx
