#include "gsx/gxn.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsx/numerics.hpp"

namespace gsx {

namespace {

Matrix submatrix(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

Matrix gather(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

Graph adjacency_to_graph(Matrix a) {
  // round-off guard: downsampled weights must stay non-negative with a
  // zero diagonal and exact symmetry
  a = 0.5 * (a + a.transpose()).eval();
  a = a.cwiseMax(0.0);
  a.diagonal().setZero();
  Graph g;
  g.n = static_cast<int>(a.rows());
  g.adjacency = std::move(a);
  return g;
}

}  // namespace

Matrix fused_assignment(const Graph& g, const std::vector<int>& indices) {
  Matrix rows(indices.size(), g.n);
  for (std::size_t i = 0; i < indices.size(); ++i) rows.row(i) = g.adjacency.row(indices[i]);
  Matrix soft(rows.rows(), rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double mx = rows.row(r).maxCoeff();
    soft.row(r) = (rows.row(r).array() - mx).exp();
    soft.row(r) /= soft.row(r).sum();
  }
  return soft;
}

Graph downsample_graph(const Graph& g, const std::vector<int>& indices, Reduction method,
                       std::vector<std::string>* warnings) {
  require(!indices.empty(), "downsample_graph: empty selection");
  {
    std::vector<int> check = indices;
    std::sort(check.begin(), check.end());
    require(std::adjacent_find(check.begin(), check.end()) == check.end(),
            "downsample_graph: duplicate indices");
    require(check.front() >= 0 && check.back() < g.n,
            "downsample_graph: index out of range");
  }

  if (method == Reduction::kDirect) {
    return adjacency_to_graph(submatrix(g.adjacency, indices, indices));
  }

  if (method == Reduction::kFused) {
    const Matrix soft = fused_assignment(g, indices);
    return adjacency_to_graph(soft * g.adjacency * soft.transpose());
  }

  // Kron reduction on the Laplacian
  const Matrix l = laplacian(g);
  std::vector<int> complement;
  std::vector<bool> kept(g.n, false);
  for (int idx : indices) kept[idx] = true;
  for (int v = 0; v < g.n; ++v) {
    if (!kept[v]) complement.push_back(v);
  }
  const Matrix l_ss = submatrix(l, indices, indices);
  if (complement.empty()) return adjacency_to_graph(Matrix(-l_ss));

  const Matrix l_su = submatrix(l, indices, complement);
  const Matrix l_uu = submatrix(l, complement, complement);
  Matrix solved;  // L_UU^{-1} L_US
  bool ok = false;
  Eigen::LLT<Matrix> llt(l_uu);
  if (llt.info() == Eigen::Success) {
    const double min_pivot = Matrix(llt.matrixL()).diagonal().minCoeff();
    if (min_pivot > 1e-7 * std::sqrt(std::max(l_uu.diagonal().maxCoeff(), 1e-30))) {
      solved = llt.solve(l_su.transpose());
      ok = true;
    }
  }
  if (!ok) {
    // disconnected unselected component: L_UU is singular
    const EigenDecomposition d = sym_eigen(l_uu);
    Vector inv = Vector::Zero(d.eigenvalues.size());
    for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
      if (d.eigenvalues(i) > 1e-10) inv(i) = 1.0 / d.eigenvalues(i);
    }
    solved = d.eigenvectors * (inv.asDiagonal() * (d.eigenvectors.transpose() * l_su.transpose()));
    if (warnings) {
      warnings->push_back("kron reduction: singular L_UU, used pseudo-solve");
    }
  }
  const Matrix l_reduced = l_ss - l_su * solved;
  Matrix a = -l_reduced;
  a.diagonal().setZero();
  return adjacency_to_graph(std::move(a));
}

Matrix upsample_features(const Graph& fine, const SamplingPlan& plan, const Matrix& coarse,
                         UnrolledRecovery& up) {
  require(coarse.rows() == plan.size(), "upsample_features: coarse rows " +
                                            std::to_string(coarse.rows()) + " != plan size " +
                                            std::to_string(plan.size()));
  // Feature values act as the underlying signal at the kept vertices: the
  // measurement weighting and the reset division cancel, so kept rows come
  // through exactly.
  Matrix y(plan.size(), coarse.cols());
  for (int i = 0; i < plan.size(); ++i) {
    y.row(i) = plan.attention(plan.indices[i]) * coarse.row(i);
  }
  return unrolled_forward(up, fine, plan, y);
}

std::vector<Matrix> feature_crossing(const std::vector<Matrix>& states,
                                     const std::vector<Graph>& graphs,
                                     const std::vector<SamplingPlan>& plans,
                                     const std::vector<UnrolledRecovery*>& upsamplers,
                                     bool use_down, bool use_up) {
  const int s_count = static_cast<int>(states.size());
  require(static_cast<int>(graphs.size()) == s_count,
          "feature_crossing: graphs/states length mismatch");
  require(static_cast<int>(plans.size()) == s_count - 1,
          "feature_crossing: need one plan per scale boundary");
  std::vector<Matrix> next(states.size());
  for (int s = 0; s < s_count; ++s) {
    Matrix fused = states[s];
    if (s >= 1 && use_down) fused += gather(states[s - 1], plans[s - 1].indices);
    if (s + 1 < s_count && use_up) {
      fused += upsample_features(graphs[s], plans[s], states[s + 1], *upsamplers[s]);
    }
    next[s] = std::move(fused);
  }
  return next;
}

double vertex_loss(const Matrix& logits, const std::vector<int>& labels,
                   const std::vector<int>& mask) {
  require(!mask.empty(), "vertex_loss: empty mask");
  require(static_cast<Eigen::Index>(labels.size()) == logits.rows(),
          "vertex_loss: labels length != logit rows");
  double loss = 0.0;
  for (int v : mask) {
    require(v >= 0 && v < logits.rows(), "vertex_loss: mask index out of range");
    const auto row = logits.row(v);
    const double mx = row.maxCoeff();
    const double logz = mx + std::log((row.array() - mx).exp().sum());
    loss += logz - row(labels[v]);
  }
  return loss;
}

ad::Tensor vertex_loss_tape(ad::Tape& tape, ad::Tensor logits, const std::vector<int>& labels,
                            const std::vector<int>& mask, int classes) {
  require(!mask.empty(), "vertex_loss: empty mask");
  Matrix onehot = Matrix::Zero(mask.size(), classes);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    require(labels[mask[i]] >= 0 && labels[mask[i]] < classes,
            "vertex_loss: label out of range");
    onehot(i, labels[mask[i]]) = 1.0;
  }
  ad::Tensor picked = ad::gather_rows(logits, mask);
  ad::Tensor logp = ad::log(ad::row_softmax(picked));
  return ad::scale(ad::sum(ad::mul(logp, tape.constant(onehot))), -1.0);
}

std::vector<int> sort_readout_order(const Matrix& features, int k) {
  require(k >= 1, "sort_readout: k must be positive");
  require(features.cols() >= 1, "sort_readout: no feature channels");
  const int n = static_cast<int>(features.rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const int last = static_cast<int>(features.cols()) - 1;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (features(a, last) != features(b, last)) return features(a, last) > features(b, last);
    return a < b;
  });
  order.resize(std::min(n, k));
  return order;
}

Vector sort_readout(const Matrix& features, int k) {
  const std::vector<int> order = sort_readout_order(features, k);
  const int c = static_cast<int>(features.cols());
  Vector out = Vector::Zero(static_cast<Eigen::Index>(k) * c);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int j = 0; j < c; ++j) out(static_cast<int>(i) * c + j) = features(order[i], j);
  }
  return out;
}

Matrix gcn_shift(const Graph& g) {
  Matrix a = g.adjacency + Matrix::Identity(g.n, g.n);
  Vector inv_sqrt = a.rowwise().sum().cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

GxnModel::GxnModel(int input_dim, int classes, GxnConfig cfg)
    : cfg_(std::move(cfg)), input_dim_(input_dim), classes_(classes) {
  require(!cfg_.keep_ratios.empty() && cfg_.keep_ratios.front() == 1.0,
          "GxnModel: keep_ratios must start at 1.0");
  for (std::size_t i = 0; i < cfg_.keep_ratios.size(); ++i) {
    require(cfg_.keep_ratios[i] > 0.0 && cfg_.keep_ratios[i] <= 1.0,
            "GxnModel: keep ratio outside (0,1]");
    require(i == 0 || cfg_.keep_ratios[i] <= cfg_.keep_ratios[i - 1],
            "GxnModel: keep ratios must be nonincreasing");
  }
  Rng rng(cfg_.seed);
  const int h = cfg_.hidden;
  params_.add_glorot("in.w", input_dim_, h, rng);
  params_.add("in.b", 1, h);
  const int s_count = scales();
  for (int s = 0; s < s_count; ++s) {
    for (int k = 0; k < 2; ++k) {
      params_.add_glorot("conv" + std::to_string(s) + "_" + std::to_string(k) + ".w", h, h, rng);
      params_.add("conv" + std::to_string(s) + "_" + std::to_string(k) + ".b", 1, h);
    }
  }
  params_.add_glorot("out.w", h, classes_, rng);
  params_.add("out.b", 1, classes_);
  params_.add_glorot("graph_head.w", cfg_.sort_k * classes_, classes_, rng);
  params_.add("graph_head.b", 1, classes_);

  for (int e = 0; e + 1 < s_count; ++e) {
    samplers_.push_back(std::make_unique<AffinityNet>(
        input_dim_, cfg_.affinity, derive_seed(cfg_.seed, 1000 + e)));
    std::vector<std::unique_ptr<UnrolledRecovery>> slots;
    for (int slot = 0; slot < 3; ++slot) {
      slots.push_back(std::make_unique<UnrolledRecovery>(
          cfg_.upsampler, "up" + std::to_string(e) + "_" + std::to_string(slot)));
    }
    upsamplers_.push_back(std::move(slots));
  }
}

std::vector<ad::ParameterSet*> GxnModel::parameter_sets() {
  std::vector<ad::ParameterSet*> sets{&params_};
  for (auto& s : samplers_) sets.push_back(&s->params());
  for (auto& edge : upsamplers_) {
    for (auto& up : edge) sets.push_back(&up->params());
  }
  return sets;
}

GxnModel::Scales GxnModel::build_scales(const Graph& g, const SignalMatrix& signals) {
  require(signals.rows() == g.n, "build_scales: signal rows != vertex count");
  require(signals.cols() == input_dim_, "build_scales: signal columns != input dim");
  Scales sc;
  sc.graphs.push_back(g);
  sc.conv_shifts.push_back(gcn_shift(g));
  sc.signals.push_back(signals);
  const int n0 = g.n;
  for (int e = 0; e + 1 < scales(); ++e) {
    const Graph& fine = sc.graphs[e];
    int keep = static_cast<int>(std::lround(cfg_.keep_ratios[e + 1] * n0));
    keep = std::max(1, std::min(keep, fine.n));

    // simplified criterion: per-vertex first term only, so top-K by score
    AffinityNet& net = *samplers_[e];
    const SamplerContext ctx = net.make_context(fine, sc.signals[e]);
    const Matrix evs = net.vertex_embeddings(ctx.signals);
    const Matrix pvs = net.neighborhood_embeddings(ctx);
    const Vector t = net.affinity_values(evs, pvs);

    std::vector<int> order(fine.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (t(a) != t(b)) return t(a) > t(b);
      return a < b;
    });
    SamplingPlan plan;
    plan.indices.assign(order.begin(), order.begin() + keep);
    plan.attention = Vector::Zero(fine.n);
    for (int v = 0; v < fine.n; ++v) plan.attention(v) = 1.0 / (1.0 + std::exp(-t(v)));

    sc.plans.push_back(plan);
    sc.graphs.push_back(downsample_graph(fine, plan.indices, cfg_.reduction, &sc.warnings));
    sc.conv_shifts.push_back(gcn_shift(sc.graphs.back()));
    sc.signals.push_back(gather(sc.signals[e], plan.indices));
  }
  return sc;
}

ad::Tensor GxnModel::conv(ad::Tape& tape, const Matrix& shift, ad::Tensor h, ad::Parameter& w,
                          ad::Parameter& b) {
  return ad::add_row(ad::matmul(ad::matmul(tape.constant(shift), h), tape.param(w)),
                     tape.param(b));
}

ad::Tensor GxnModel::upsample_tape(ad::Tape& tape, const Scales& sc, int edge, int slot,
                                   ad::Tensor coarse) {
  const Matrix shift = normalize_adjacency(sc.graphs[edge], cfg_.upsampler.shift_mode);
  const SamplingPlan& plan = sc.plans[edge];
  // measurement weighting followed by the clamped reset division; the factor
  // is 1 unless the attention is below the clamp
  Matrix ratio(plan.size(), coarse.cols());
  for (int i = 0; i < plan.size(); ++i) {
    const double a = plan.attention(plan.indices[i]);
    ratio.row(i).setConstant(a / std::max(a, kAttentionClamp));
  }
  ad::Tensor measured = ad::mul(coarse, tape.constant(ratio));
  return unrolled_forward_tape(tape, *upsamplers_[edge][slot], shift, plan.indices, measured);
}

ad::Tensor GxnModel::cross_tape(ad::Tape& tape, const Scales& sc,
                                std::vector<ad::Tensor>& states, int slot) {
  const int s_count = scales();
  std::vector<ad::Tensor> next(states.size());
  for (int s = 0; s < s_count; ++s) {
    ad::Tensor fused = states[s];
    if (s >= 1 && cfg_.cross_down) {
      fused = ad::add(fused, ad::gather_rows(states[s - 1], sc.plans[s - 1].indices));
    }
    if (s + 1 < s_count && cfg_.cross_up) {
      fused = ad::add(fused, upsample_tape(tape, sc, s, slot, states[s + 1]));
    }
    next[s] = fused;
  }
  states = next;
  return states[0];
}

ad::Tensor GxnModel::forward_tape(ad::Tape& tape, const Scales& sc) {
  const int s_count = scales();
  std::vector<ad::Tensor> states(s_count);
  states[0] = ad::relu(conv(tape, sc.conv_shifts[0], tape.constant(sc.signals[0]),
                            *params_.find("in.w"), *params_.find("in.b")));
  for (int s = 1; s < s_count; ++s) {
    states[s] = ad::gather_rows(states[s - 1], sc.plans[s - 1].indices);
  }
  for (int k = 0; k < 2; ++k) {
    for (int s = 0; s < s_count; ++s) {
      states[s] = ad::relu(conv(tape, sc.conv_shifts[s], states[s],
                                *params_.find("conv" + std::to_string(s) + "_" +
                                              std::to_string(k) + ".w"),
                                *params_.find("conv" + std::to_string(s) + "_" +
                                              std::to_string(k) + ".b")));
    }
    const bool cross_here =
        cfg_.crossing == GxnConfig::Crossing::kAll ||
        (cfg_.crossing == GxnConfig::Crossing::kEarly && k == 0) ||
        (cfg_.crossing == GxnConfig::Crossing::kLate && k == 1);
    if (cross_here) cross_tape(tape, sc, states, k);
  }
  // align every scale back to the finest and merge
  ad::Tensor combined = states[0];
  for (int s = 1; s < s_count; ++s) {
    ad::Tensor lifted = states[s];
    for (int e = s - 1; e >= 0; --e) lifted = upsample_tape(tape, sc, e, 2, lifted);
    combined = ad::add(combined, lifted);
  }
  return conv(tape, sc.conv_shifts[0], combined, *params_.find("out.w"),
              *params_.find("out.b"));
}

Matrix GxnModel::forward(const Scales& sc) {
  ad::Tape tape;
  return forward_tape(tape, sc).value();
}

ad::Tensor GxnModel::graph_logits_tape(ad::Tape& tape, const Scales& sc) {
  ad::Tensor per_vertex = forward_tape(tape, sc);
  const std::vector<int> order = sort_readout_order(per_vertex.value(), cfg_.sort_k);
  ad::Tensor top = ad::gather_rows(per_vertex, order);
  ad::Tensor padded = top;
  if (static_cast<int>(order.size()) < cfg_.sort_k) {
    std::vector<int> slots(order.size());
    std::iota(slots.begin(), slots.end(), 0);
    padded = ad::set_rows(
        tape.constant(Matrix(Matrix::Zero(cfg_.sort_k, classes_))), slots, top);
  }
  ad::Tensor flat = ad::reshape(padded, 1, cfg_.sort_k * classes_);
  return ad::add(ad::matmul(flat, tape.param(*params_.find("graph_head.w"))),
                 tape.param(*params_.find("graph_head.b")));
}

Matrix GxnModel::graph_logits(const Scales& sc) {
  ad::Tape tape;
  return graph_logits_tape(tape, sc).value();
}

ad::Tensor GxnModel::selection_loss_tape(ad::Tape& tape, const Scales& sc,
                                         int negatives_per_vertex, Rng& rng) {
  ad::Tensor total = tape.constant(0.0);
  for (std::size_t e = 0; e < samplers_.size(); ++e) {
    AffinityNet& net = *samplers_[e];
    const SamplerContext ctx = net.make_context(sc.graphs[e], sc.signals[e]);
    const AffinityNet::TapeEmbeddings emb = net.embeddings_tape(tape, ctx);
    ad::Tensor t_pos = net.affinity_tape(tape, emb.e, emb.p);
    ad::Tensor objective = ad::mean(ad::log(ad::sigmoid(t_pos)));
    const auto negatives = sample_negatives(sc.graphs[e].n, negatives_per_vertex, rng);
    if (!negatives.empty()) {
      std::vector<int> vs, us;
      for (const auto& [v, u] : negatives) {
        vs.push_back(v);
        us.push_back(u);
      }
      ad::Tensor t_neg =
          net.affinity_tape(tape, ad::gather_rows(emb.e, vs), ad::gather_rows(emb.p, us));
      ad::Tensor ones = tape.constant(Matrix(Matrix::Ones(t_neg.rows(), 1)));
      objective = ad::add(objective, ad::mean(ad::log(ad::sub(ones, ad::sigmoid(t_neg)))));
    }
    total = ad::add(total, ad::scale(objective, -1.0));
  }
  return total;
}

namespace {

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(scores.rows());
  for (Eigen::Index v = 0; v < scores.rows(); ++v) {
    int best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(v, c) > scores(v, best)) best = static_cast<int>(c);
    }
    out[v] = best;
  }
  return out;
}

double accuracy_over(const std::vector<int>& predictions, const std::vector<int>& labels,
                     const std::vector<int>& subset) {
  if (subset.empty()) return 0.0;
  int hits = 0;
  for (int v : subset) hits += predictions[v] == labels[v] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(subset.size());
}

}  // namespace

GxnTrainReport train_gxn_vertex(GxnModel& model, const Graph& g, const SignalMatrix& signals,
                                const std::vector<int>& labels,
                                const std::vector<int>& labeled_mask,
                                const GxnTrainConfig& cfg) {
  require(!labeled_mask.empty(), "train_gxn_vertex: empty labeled mask");
  require(static_cast<int>(labels.size()) == g.n, "train_gxn_vertex: labels length != n");
  Rng rng(cfg.seed);
  auto sets = model.parameter_sets();
  std::vector<ad::AdamState> adam(sets.size());
  GxnModel::Scales sc = model.build_scales(g, signals);
  GxnTrainReport report;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0 && epoch % cfg.refresh_every == 0) sc = model.build_scales(g, signals);
    const double weight =
        cfg.epochs > 1
            ? cfg.loss_weight * (1.0 - static_cast<double>(epoch) / (cfg.epochs - 1))
            : cfg.loss_weight;
    for (auto* s : sets) s->zero_grads();
    ad::Tape tape;
    ad::Tensor logits = model.forward_tape(tape, sc);
    ad::Tensor loss =
        vertex_loss_tape(tape, logits, labels, labeled_mask, model.classes());
    loss = ad::add(loss, ad::scale(model.selection_loss_tape(tape, sc,
                                                             cfg.negatives_per_vertex, rng),
                                   weight));
    report.loss_trace.push_back(loss.value()(0, 0));
    tape.backward(loss);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      ad::adam_step(*sets[i], adam[i], cfg.learning_rate);
    }
  }

  sc = model.build_scales(g, signals);
  const std::vector<int> predictions = argmax_rows(model.forward(sc));
  std::vector<bool> in_mask(g.n, false);
  for (int v : labeled_mask) in_mask[v] = true;
  std::vector<int> test;
  for (int v = 0; v < g.n; ++v) {
    if (!in_mask[v]) test.push_back(v);
  }
  report.train_accuracy = accuracy_over(predictions, labels, labeled_mask);
  report.test_accuracy = accuracy_over(predictions, labels, test);
  return report;
}

GxnTrainReport train_gxn_graph(GxnModel& model, const std::vector<GraphSample>& train_set,
                               const std::vector<GraphSample>& test_set,
                               const GxnTrainConfig& cfg) {
  require(!train_set.empty(), "train_gxn_graph: empty training set");
  Rng rng(cfg.seed);
  auto sets = model.parameter_sets();
  std::vector<ad::AdamState> adam(sets.size());
  std::vector<GxnModel::Scales> scales;
  auto rebuild = [&] {
    scales.clear();
    for (const GraphSample& s : train_set) scales.push_back(model.build_scales(s.graph, s.signals));
  };
  rebuild();
  GxnTrainReport report;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0 && epoch % cfg.refresh_every == 0) rebuild();
    const double weight =
        cfg.epochs > 1
            ? cfg.loss_weight * (1.0 - static_cast<double>(epoch) / (cfg.epochs - 1))
            : cfg.loss_weight;
    for (auto* s : sets) s->zero_grads();
    double epoch_loss = 0.0;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
      ad::Tape tape;
      ad::Tensor logits = model.graph_logits_tape(tape, scales[i]);
      Matrix onehot = Matrix::Zero(1, model.classes());
      onehot(0, train_set[i].label) = 1.0;
      ad::Tensor loss = ad::scale(
          ad::sum(ad::mul(ad::log(ad::row_softmax(logits)), tape.constant(onehot))), -1.0);
      loss = ad::add(loss, ad::scale(model.selection_loss_tape(tape, scales[i],
                                                               cfg.negatives_per_vertex, rng),
                                     weight));
      epoch_loss += loss.value()(0, 0);
      tape.backward(loss);
    }
    report.loss_trace.push_back(epoch_loss);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      ad::adam_step(*sets[i], adam[i], cfg.learning_rate);
    }
  }

  auto evaluate = [&](const std::vector<GraphSample>& data) {
    if (data.empty()) return 0.0;
    int hits = 0;
    for (const GraphSample& s : data) {
      GxnModel::Scales sc = model.build_scales(s.graph, s.signals);
      const Matrix logits = model.graph_logits(sc);
      int best = 0;
      for (int c = 1; c < model.classes(); ++c) {
        if (logits(0, c) > logits(0, best)) best = c;
      }
      hits += best == s.label ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
  };
  report.train_accuracy = evaluate(train_set);
  report.test_accuracy = evaluate(test_set);
  return report;
}

GcnResult gcn_classifier(const Graph& g, const SignalMatrix& signals,
                         const std::vector<int>& labeled_mask, const std::vector<int>& labels,
                         int classes, const GcnConfig& cfg) {
  require(!labeled_mask.empty(), "gcn_classifier: empty labeled mask");
  require(signals.rows() == g.n, "gcn_classifier: signal rows != vertex count");
  Rng rng(cfg.seed);
  ad::ParameterSet params;
  params.add_glorot("w1", static_cast<int>(signals.cols()), cfg.hidden, rng);
  params.add("b1", 1, cfg.hidden);
  params.add_glorot("w2", cfg.hidden, classes, rng);
  params.add("b2", 1, classes);
  const Matrix shift = gcn_shift(g);
  ad::AdamState adam;
  GcnResult result;

  auto logits_tape = [&](ad::Tape& tape) {
    ad::Tensor x = tape.constant(signals);
    ad::Tensor h = ad::relu(ad::add_row(
        ad::matmul(ad::matmul(tape.constant(shift), x), tape.param(*params.find("w1"))),
        tape.param(*params.find("b1"))));
    return ad::add_row(
        ad::matmul(ad::matmul(tape.constant(shift), h), tape.param(*params.find("w2"))),
        tape.param(*params.find("b2")));
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    params.zero_grads();
    ad::Tape tape;
    ad::Tensor loss = vertex_loss_tape(tape, logits_tape(tape), labels, labeled_mask, classes);
    result.loss_trace.push_back(loss.value()(0, 0));
    tape.backward(loss);
    ad::adam_step(params, adam, cfg.learning_rate);
  }

  ad::Tape tape;
  ad::Tensor scores = ad::row_softmax(logits_tape(tape));
  result.scores = scores.value();
  result.predictions = argmax_rows(result.scores);
  return result;
}

}  // namespace gsx
