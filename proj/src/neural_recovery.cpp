#include "gsx/neural_recovery.hpp"

#include <cmath>

namespace gsx {

UnrolledRecovery::UnrolledRecovery(UnrolledConfig cfg, const std::string& name_prefix)
    : cfg_(cfg) {
  require(cfg.layers >= 1, "UnrolledRecovery: needs at least one layer");
  require(cfg.degree >= 0, "UnrolledRecovery: negative degree");
  for (int k = 0; k < cfg.layers; ++k) {
    for (int l = 0; l <= cfg.degree; ++l) {
      Matrix init(1, 1);
      init(0, 0) = l == 0 ? 1.0 : 0.0;
      coeffs_.push_back(&params_.add(
          name_prefix + ".h" + std::to_string(k) + "_" + std::to_string(l), init));
    }
  }
}

double UnrolledRecovery::coefficient(int layer, int power) const {
  return coefficient_param(layer, power).value(0, 0);
}

void UnrolledRecovery::set_coefficient(int layer, int power, double value) {
  coefficient_param(layer, power).value(0, 0) = value;
}

ad::Parameter& UnrolledRecovery::coefficient_param(int layer, int power) {
  require(layer >= 0 && layer < cfg_.layers && power >= 0 && power <= cfg_.degree,
          "UnrolledRecovery: coefficient index out of range");
  return *coeffs_[layer * (cfg_.degree + 1) + power];
}

const ad::Parameter& UnrolledRecovery::coefficient_param(int layer, int power) const {
  require(layer >= 0 && layer < cfg_.layers && power >= 0 && power <= cfg_.degree,
          "UnrolledRecovery: coefficient index out of range");
  return *coeffs_[layer * (cfg_.degree + 1) + power];
}

Matrix UnrolledRecovery::coefficient_matrix() const {
  Matrix table(cfg_.layers, cfg_.degree + 1);
  for (int k = 0; k < cfg_.layers; ++k) {
    for (int l = 0; l <= cfg_.degree; ++l) table(k, l) = coefficient(k, l);
  }
  return table;
}

void UnrolledRecovery::set_coefficients(const Matrix& table) {
  require(table.rows() == cfg_.layers && table.cols() == cfg_.degree + 1,
          "UnrolledRecovery: coefficient table shape mismatch");
  for (int k = 0; k < cfg_.layers; ++k) {
    for (int l = 0; l <= cfg_.degree; ++l) set_coefficient(k, l, table(k, l));
  }
}

Matrix unrolled_forward(const UnrolledRecovery& model, const Graph& g, const SamplingPlan& plan,
                        const Matrix& y) {
  plan.validate(g.n);
  require(y.rows() == plan.size(), "unrolled_forward: measurement rows " +
                                       std::to_string(y.rows()) + " != plan size " +
                                       std::to_string(plan.size()));
  const Matrix shift = normalize_adjacency(g, model.config().shift_mode);
  std::vector<std::string> warnings;
  Matrix reset(plan.size(), y.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    reset.col(c) = divide_by_attention(plan, y.col(c), &warnings);
  }
  Matrix x = Matrix::Zero(g.n, y.cols());
  for (int i = 0; i < plan.size(); ++i) x.row(plan.indices[i]) = reset.row(i);
  for (int k = 0; k < model.layers(); ++k) {
    Matrix acc = model.coefficient(k, 0) * x;
    Matrix power = x;
    for (int l = 1; l <= model.degree(); ++l) {
      power = shift * power;
      acc += model.coefficient(k, l) * power;
    }
    x = acc;
    for (int i = 0; i < plan.size(); ++i) x.row(plan.indices[i]) = reset.row(i);
    if (!x.allFinite()) {
      throw NumericError("unrolled_forward: non-finite value at layer " + std::to_string(k));
    }
  }
  return x;
}

Vector unrolled_forward(const UnrolledRecovery& model, const Graph& g, const SamplingPlan& plan,
                        const Vector& y) {
  return Vector(unrolled_forward(model, g, plan, Matrix(y)));
}

ad::Tensor unrolled_forward_tape(ad::Tape& tape, UnrolledRecovery& model, const Matrix& shift,
                                 const std::vector<int>& indices, ad::Tensor measured_rows) {
  const int n = static_cast<int>(shift.rows());
  ad::Tensor shift_c = tape.constant(shift);
  ad::Tensor x = ad::set_rows(
      tape.constant(Matrix(Matrix::Zero(n, measured_rows.cols()))), indices, measured_rows);
  for (int k = 0; k < model.layers(); ++k) {
    ad::Tensor acc = ad::smul(x, tape.param(model.coefficient_param(k, 0)));
    ad::Tensor power = x;
    for (int l = 1; l <= model.degree(); ++l) {
      power = ad::matmul(shift_c, power);
      acc = ad::add(acc, ad::smul(power, tape.param(model.coefficient_param(k, l))));
    }
    x = ad::set_rows(acc, indices, measured_rows);
  }
  return x;
}

Matrix algorithm1_layer_coefficients(const FilterSpec& h, double alpha, int layers) {
  require(!h.coefficients.empty(), "algorithm1_layer_coefficients: empty filter");
  const int deg = static_cast<int>(h.coefficients.size()) - 1;
  // H = h(S)^T h(S) = h(S)^2 for symmetric S: coefficients of h convolved
  // with themselves, then I - alpha H.
  Vector conv = Vector::Zero(2 * deg + 1);
  for (int i = 0; i <= deg; ++i) {
    for (int j = 0; j <= deg; ++j) conv(i + j) += h.coefficients[i] * h.coefficients[j];
  }
  Matrix table(layers, 2 * deg + 1);
  for (int k = 0; k < layers; ++k) {
    for (int l = 0; l <= 2 * deg; ++l) table(k, l) = -alpha * conv(l);
    table(k, 0) += 1.0;
  }
  return table;
}

namespace {

std::vector<int> all_vertices(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

Matrix measured_signal_rows(const SignalMatrix& signals, const std::vector<int>& indices) {
  Matrix rows(indices.size(), signals.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) rows.row(i) = signals.row(indices[i]);
  return rows;
}

}  // namespace

double recovery_loss(const UnrolledRecovery& model, const AffinityNet& net, const Graph& g,
                     const SignalMatrix& signals, int m, double loss_weight,
                     const std::vector<std::pair<int, int>>& negatives) {
  const SelectionResult sel = greedy_select(net, g, signals, m);
  Matrix y(sel.plan.size(), signals.cols());
  for (int i = 0; i < sel.plan.size(); ++i) {
    y.row(i) = sel.plan.attention(sel.plan.indices[i]) * signals.row(sel.plan.indices[i]);
  }
  const Matrix recovered = unrolled_forward(model, g, sel.plan, y);
  const double rec = (signals - recovered).squaredNorm();
  const double obj = mi_objective(net, g, signals, all_vertices(g.n), negatives);
  return rec + loss_weight * (-obj);
}

JointTrainResult train_joint(const Graph& g, const SignalMatrix& signals, int m,
                             const JointTrainConfig& cfg) {
  require(cfg.epochs >= 1, "train_joint: epochs must be positive");
  require(m >= 1 && m <= g.n, "train_joint: budget outside 1..n");
  JointTrainResult result{
      AffinityNet(static_cast<int>(signals.cols()), cfg.affinity, cfg.seed),
      UnrolledRecovery(cfg.unroll),
      {},
      {},
      {},
      {}};
  AffinityNet& net = result.sampler;
  UnrolledRecovery& model = result.recovery;

  const SamplerContext ctx = net.make_context(g, signals);
  const Matrix shift = normalize_adjacency(g, cfg.unroll.shift_mode);
  Rng rng(cfg.seed + 1);
  ad::AdamState adam_sampler, adam_recovery;
  const bool supervised = cfg.mode == JointTrainConfig::Mode::kSupervised;

  std::vector<int> indices;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch % cfg.refresh_every == 0) {
      indices = greedy_select(net, g, signals, m).plan.indices;
    }
    const double weight =
        cfg.epochs > 1
            ? cfg.loss_weight * (1.0 - static_cast<double>(epoch) / (cfg.epochs - 1))
            : cfg.loss_weight;
    const auto negatives = sample_negatives(g.n, cfg.negatives_per_vertex, rng);

    net.params().zero_grads();
    model.params().zero_grads();
    ad::Tape tape;
    const AffinityNet::TapeEmbeddings emb = net.embeddings_tape(tape, ctx);
    ad::Tensor t_pos = net.affinity_tape(tape, emb.e, emb.p);
    ad::Tensor attention = ad::sigmoid(t_pos);  // n x 1

    const Matrix x_m = measured_signal_rows(signals, indices);
    ad::Tensor measured;
    if (supervised) {
      // y = a_M (.) x_M stays live in a; the division re-uses the current
      // attention values as constants. With both sides live the quotient
      // rule cancels the path exactly and no gradient could reach the
      // sampler, so the denominator is detached on purpose.
      ad::Tensor a_m = ad::gather_rows(attention, indices);
      ad::Tensor a_rep =
          ad::matmul(a_m, tape.constant(Matrix(Matrix::Ones(1, signals.cols()))));
      ad::Tensor y = ad::mul(a_rep, tape.constant(x_m));
      Matrix recip(indices.size(), signals.cols());
      for (std::size_t i = 0; i < indices.size(); ++i) {
        const double a = std::max(attention.value()(indices[i], 0), kAttentionClamp);
        recip.row(i).setConstant(1.0 / a);
      }
      measured = ad::mul(y, tape.constant(recip));
    } else {
      measured = tape.constant(x_m);
    }

    ad::Tensor recovered = unrolled_forward_tape(tape, model, shift, indices, measured);
    ad::Tensor diff = ad::sub(tape.constant(signals), recovered);
    ad::Tensor rec_term = ad::sum(ad::mul(diff, diff));

    ad::Tensor objective = ad::mean(ad::log(ad::sigmoid(t_pos)));
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

    ad::Tensor loss = ad::add(rec_term, ad::scale(objective, -weight));
    result.loss_trace.push_back(loss.value()(0, 0));
    result.recovery_trace.push_back(rec_term.value()(0, 0));
    result.objective_trace.push_back(objective.value()(0, 0));
    tape.backward(loss);
    ad::adam_step(net.params(), adam_sampler, cfg.learning_rate);
    ad::adam_step(model.params(), adam_recovery, cfg.learning_rate);
  }

  SamplingPlan plan;
  plan.indices = indices;
  plan.attention = attention_vector(net, g, signals);
  result.final_plan = plan;
  return result;
}

}  // namespace gsx
