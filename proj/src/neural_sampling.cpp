#include "gsx/neural_sampling.hpp"

#include <cmath>

namespace gsx {

AffinityNet::AffinityNet(int signal_dim, AffinityConfig cfg, std::uint64_t seed)
    : cfg_(cfg), signal_dim_(signal_dim) {
  require(cfg.radius >= 0, "AffinityNet: negative radius");
  require(cfg.embed_dim >= 1, "AffinityNet: embed dim must be positive");
  Rng rng(seed);
  const int d = cfg.embed_dim;
  e_w_ = ad::Mlp::create(params_, "e_w", signal_dim, d, d, rng);
  for (int r = 0; r <= cfg.radius; ++r) {
    hop_weights_.push_back(&params_.add_glorot("hop_w" + std::to_string(r), d, d, rng));
  }
  s_w_ = ad::Mlp::create(params_, "s_w", 2 * d, d, 1, rng);
}

SamplerContext AffinityNet::make_context(const Graph& g, const SignalMatrix& signals) const {
  require(signals.rows() == g.n, "AffinityNet: signal rows != vertex count");
  require(signals.cols() == signal_dim_, "AffinityNet: signal columns " +
                                             std::to_string(signals.cols()) + " != expected " +
                                             std::to_string(signal_dim_));
  SamplerContext ctx;
  ctx.graph = &g;
  ctx.signals = signals;
  ctx.shift_pows = shift_powers(normalize_adjacency(g, cfg_.shift_mode), cfg_.radius);
  return ctx;
}

Matrix AffinityNet::vertex_embeddings(const SignalMatrix& signals) const {
  return e_w_.forward_value(signals);
}

Matrix AffinityNet::neighborhood_embeddings(const SamplerContext& ctx) const {
  const Matrix e = vertex_embeddings(ctx.signals);
  Matrix p = Matrix::Zero(e.rows(), e.cols());
  // Row u of shift^r * E aggregates hop-r neighbors of u (the shift power is
  // zero beyond r hops), so the double sum collapses to dense products.
  for (int r = 0; r <= cfg_.radius; ++r) {
    p += (ctx.shift_pows[r] * e) * hop_weights_[r]->value.transpose();
  }
  return p / static_cast<double>(cfg_.radius + 1);
}

Vector AffinityNet::affinity_values(const Matrix& e_rows, const Matrix& p_rows) const {
  require(e_rows.rows() == p_rows.rows(), "affinity_values: row mismatch");
  Matrix joint(e_rows.rows(), e_rows.cols() + p_rows.cols());
  joint << e_rows, p_rows;
  return s_w_.forward_value(joint);
}

AffinityNet::TapeEmbeddings AffinityNet::embeddings_tape(ad::Tape& tape,
                                                         const SamplerContext& ctx) const {
  ad::Tensor e = e_w_.forward(tape, tape.constant(ctx.signals));
  ad::Tensor p;
  for (int r = 0; r <= cfg_.radius; ++r) {
    ad::Tensor term = ad::matmul(ad::matmul(tape.constant(ctx.shift_pows[r]), e),
                                 ad::transpose(tape.param(*hop_weights_[r])));
    p = r == 0 ? term : ad::add(p, term);
  }
  p = ad::scale(p, 1.0 / static_cast<double>(cfg_.radius + 1));
  return {e, p};
}

ad::Tensor AffinityNet::affinity_tape(ad::Tape& tape, ad::Tensor e_rows,
                                      ad::Tensor p_rows) const {
  return s_w_.forward(tape, ad::concat_cols(e_rows, p_rows));
}

ad::Tensor AffinityNet::self_affinity_tape(ad::Tape& tape, const SamplerContext& ctx) const {
  const TapeEmbeddings emb = embeddings_tape(tape, ctx);
  return affinity_tape(tape, emb.e, emb.p);
}

Vector neighborhood_embed(const AffinityNet& net, const Graph& g, const SignalMatrix& signals,
                          int u) {
  require(u >= 0 && u < g.n, "neighborhood_embed: vertex out of range");
  const SamplerContext ctx = net.make_context(g, signals);
  return net.neighborhood_embeddings(ctx).row(u);
}

double affinity(const AffinityNet& net, const Graph& g, const SignalMatrix& signals, int v,
                int u) {
  require(v >= 0 && v < g.n && u >= 0 && u < g.n, "affinity: vertex out of range");
  const SamplerContext ctx = net.make_context(g, signals);
  const Matrix e = net.vertex_embeddings(ctx.signals);
  const Matrix p = net.neighborhood_embeddings(ctx);
  return net.affinity_values(e.row(v), p.row(u))(0);
}

double log_sigmoid(double t) {
  // -softplus(-t), stable for large |t|
  return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

double log_one_minus_sigmoid(double t) { return log_sigmoid(-t); }

namespace {

struct FrozenScores {
  Matrix e;
  Matrix p;
};

FrozenScores frozen_embeddings(const AffinityNet& net, const SamplerContext& ctx) {
  return {net.vertex_embeddings(ctx.signals), net.neighborhood_embeddings(ctx)};
}

// log(1 - sigma(T(v, N_u))) for aligned pair lists, batched.
Vector pair_mismatch_logs(const AffinityNet& net, const FrozenScores& fs,
                          const std::vector<int>& vs, const std::vector<int>& us) {
  Matrix e_rows(vs.size(), fs.e.cols());
  Matrix p_rows(us.size(), fs.p.cols());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    e_rows.row(i) = fs.e.row(vs[i]);
    p_rows.row(i) = fs.p.row(us[i]);
  }
  const Vector t = net.affinity_values(e_rows, p_rows);
  Vector out(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) out(i) = log_one_minus_sigmoid(t(i));
  return out;
}

}  // namespace

double mi_objective(const AffinityNet& net, const Graph& g, const SignalMatrix& signals,
                    const std::vector<int>& vertex_set,
                    const std::vector<std::pair<int, int>>& negatives) {
  require(!vertex_set.empty(), "mi_objective: empty vertex set");
  const SamplerContext ctx = net.make_context(g, signals);
  const FrozenScores fs = frozen_embeddings(net, ctx);

  Matrix e_rows(vertex_set.size(), fs.e.cols());
  Matrix p_rows(vertex_set.size(), fs.p.cols());
  for (std::size_t i = 0; i < vertex_set.size(); ++i) {
    e_rows.row(i) = fs.e.row(vertex_set[i]);
    p_rows.row(i) = fs.p.row(vertex_set[i]);
  }
  const Vector t_pos = net.affinity_values(e_rows, p_rows);
  double value = 0.0;
  for (Eigen::Index i = 0; i < t_pos.size(); ++i) value += log_sigmoid(t_pos(i));
  value /= static_cast<double>(t_pos.size());

  if (!negatives.empty()) {
    std::vector<int> vs, us;
    for (const auto& [v, u] : negatives) {
      require(v != u, "mi_objective: negative pair with v == u");
      vs.push_back(v);
      us.push_back(u);
    }
    const Vector logs = pair_mismatch_logs(net, fs, vs, us);
    value += logs.mean();
  }
  return value;
}

std::vector<std::pair<int, int>> sample_negatives(int n, int per_vertex, Rng& rng) {
  std::vector<std::pair<int, int>> out;
  if (n < 2) return out;
  for (int v = 0; v < n; ++v) {
    for (int k = 0; k < per_vertex; ++k) {
      int u = static_cast<int>(rng.uniform_index(n - 1));
      if (u >= v) ++u;  // skip v itself
      out.emplace_back(v, u);
    }
  }
  return out;
}

SamplerTrainResult train_affinity(AffinityNet& net, const Graph& g, const SignalMatrix& signals,
                                  const SamplerTrainConfig& cfg) {
  require(cfg.epochs >= 1, "train_affinity: epochs must be positive");
  require(cfg.negatives_per_vertex >= 0, "train_affinity: negative count must be >= 0");
  const SamplerContext ctx = net.make_context(g, signals);
  Rng rng(cfg.seed);
  ad::AdamState adam;
  SamplerTrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto negatives = sample_negatives(g.n, cfg.negatives_per_vertex, rng);
    net.params().zero_grads();
    ad::Tape tape;
    const AffinityNet::TapeEmbeddings emb = net.embeddings_tape(tape, ctx);
    ad::Tensor t_pos = net.affinity_tape(tape, emb.e, emb.p);
    ad::Tensor objective = ad::mean(ad::log(ad::sigmoid(t_pos)));
    if (!negatives.empty()) {
      std::vector<int> vs, us;
      for (const auto& [v, u] : negatives) {
        vs.push_back(v);
        us.push_back(u);
      }
      ad::Tensor t_neg = net.affinity_tape(tape, ad::gather_rows(emb.e, vs),
                                           ad::gather_rows(emb.p, us));
      ad::Tensor ones = tape.constant(Matrix(Matrix::Ones(t_neg.rows(), 1)));
      objective = ad::add(objective, ad::mean(ad::log(ad::sub(ones, ad::sigmoid(t_neg)))));
    }
    result.objective_trace.push_back(objective.value()(0, 0));
    tape.backward(ad::scale(objective, -1.0));
    ad::adam_step(net.params(), adam, cfg.learning_rate);
  }
  return result;
}

namespace {

// C(M) from precomputed per-vertex and per-pair log terms. Shared by the
// public score and the greedy loop so both walk identical numbers.
double criterion_from_tables(const Vector& pos_logs,
                             const std::function<double(int, int)>& neg_log,
                             const std::vector<int>& set) {
  const double m = static_cast<double>(set.size());
  double first = 0.0;
  for (int v : set) first += pos_logs(v);
  first /= m;
  double second = 0.0;
  for (int v : set) {
    for (int u : set) {
      if (v != u) second += neg_log(v, u);
    }
  }
  return first + second / (m * m);
}

}  // namespace

double criterion_score(const AffinityNet& net, const Graph& g, const SignalMatrix& signals,
                       const std::vector<int>& candidate_set, int pair_sample_threshold,
                       std::uint64_t seed) {
  require(!candidate_set.empty(), "criterion_score: empty candidate set");
  const SamplerContext ctx = net.make_context(g, signals);
  const FrozenScores fs = frozen_embeddings(net, ctx);

  Matrix e_rows(candidate_set.size(), fs.e.cols());
  Matrix p_rows(candidate_set.size(), fs.p.cols());
  for (std::size_t i = 0; i < candidate_set.size(); ++i) {
    e_rows.row(i) = fs.e.row(candidate_set[i]);
    p_rows.row(i) = fs.p.row(candidate_set[i]);
  }
  const Vector t_pos = net.affinity_values(e_rows, p_rows);
  const double m = static_cast<double>(candidate_set.size());
  double first = 0.0;
  for (Eigen::Index i = 0; i < t_pos.size(); ++i) first += log_sigmoid(t_pos(i));
  first /= m;

  const std::size_t pair_count = candidate_set.size() * (candidate_set.size() - 1);
  if (pair_count == 0) return first;

  if (pair_count <= static_cast<std::size_t>(pair_sample_threshold)) {
    std::vector<int> vs, us;
    for (int v : candidate_set) {
      for (int u : candidate_set) {
        if (v != u) {
          vs.push_back(v);
          us.push_back(u);
        }
      }
    }
    const Vector logs = pair_mismatch_logs(net, fs, vs, us);
    return first + logs.sum() / (m * m);
  }

  // Monte-Carlo estimate of the pair sum: sample ordered pairs uniformly.
  Rng rng(seed);
  std::vector<int> vs, us;
  for (int s = 0; s < pair_sample_threshold; ++s) {
    const int i = static_cast<int>(rng.uniform_index(candidate_set.size()));
    int j = static_cast<int>(rng.uniform_index(candidate_set.size() - 1));
    if (j >= i) ++j;
    vs.push_back(candidate_set[i]);
    us.push_back(candidate_set[j]);
  }
  const Vector logs = pair_mismatch_logs(net, fs, vs, us);
  return first + logs.mean() * static_cast<double>(pair_count) / (m * m);
}

SelectionResult greedy_select(const AffinityNet& net, const Graph& g,
                              const SignalMatrix& signals, int m) {
  require(m >= 1 && m <= g.n, "greedy_select: budget " + std::to_string(m) +
                                  " outside 1.." + std::to_string(g.n));
  const SamplerContext ctx = net.make_context(g, signals);
  const FrozenScores fs = frozen_embeddings(net, ctx);
  const int n = g.n;

  const Vector t_pos = net.affinity_values(fs.e, fs.p);
  Vector pos_logs(n);
  for (int v = 0; v < n; ++v) pos_logs(v) = log_sigmoid(t_pos(v));

  std::vector<int> all(n);
  for (int v = 0; v < n; ++v) all[v] = v;

  SelectionResult result;
  std::vector<bool> taken(n, false);
  double sum_pos = 0.0;
  double sum_pairs = 0.0;
  // extra(v) = sum over selected u of neg(v,u) + neg(u,v)
  Vector extra = Vector::Zero(n);

  for (int step = 0; step < m; ++step) {
    const double k = static_cast<double>(step + 1);
    int best = -1;
    double best_score = 0.0;
    for (int v = 0; v < n; ++v) {
      if (taken[v]) continue;
      const double score =
          (sum_pos + pos_logs(v)) / k + (sum_pairs + extra(v)) / (k * k);
      if (best < 0 || score > best_score) {
        best = v;
        best_score = score;
      }
    }
    taken[best] = true;
    sum_pos += pos_logs(best);
    sum_pairs += extra(best);
    result.plan.indices.push_back(best);
    result.criterion_trace.push_back(best_score);

    if (step + 1 < m) {
      // fold the new member's cross terms into every candidate's bonus
      const Vector towards = pair_mismatch_logs(net, fs, all, std::vector<int>(n, best));
      const Vector from = pair_mismatch_logs(net, fs, std::vector<int>(n, best), all);
      extra += towards + from;
    }
  }
  result.plan.attention = attention_vector(net, g, signals);
  return result;
}

Vector attention_vector(const AffinityNet& net, const Graph& g, const SignalMatrix& signals) {
  const SamplerContext ctx = net.make_context(g, signals);
  const FrozenScores fs = frozen_embeddings(net, ctx);
  const Vector t = net.affinity_values(fs.e, fs.p);
  Vector a(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) a(i) = 1.0 / (1.0 + std::exp(-t(i)));
  return a;
}

}  // namespace gsx
