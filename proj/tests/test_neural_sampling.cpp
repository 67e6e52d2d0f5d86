#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "gsx/generators.hpp"
#include "gsx/neural_sampling.hpp"

using namespace gsx;

namespace {

Graph path3() { return build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }

Graph random_weighted(int n, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.push_back({u, v, rng.uniform(0.2, 2.0)});
  return build_graph(n, edges);
}

SignalMatrix random_signals(int n, int l, Rng& rng, double lo = -1.0, double hi = 1.0) {
  SignalMatrix s(n, l);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < l; ++j) s(i, j) = rng.uniform(lo, hi);
  return s;
}

void zero_params(ad::ParameterSet& params) {
  for (std::size_t i = 0; i < params.size(); ++i) params.at(i).value.setZero();
}

// E_w becomes the identity on non-negative inputs: relu passes them and the
// second affine layer is the identity.
void make_embedder_identity(AffinityNet& net, int dim) {
  net.params().find("e_w.w1")->value = Matrix::Identity(dim, dim);
  net.params().find("e_w.b1")->value.setZero();
  net.params().find("e_w.w2")->value = Matrix::Identity(dim, dim);
  net.params().find("e_w.b2")->value.setZero();
}

}  // namespace

TEST_CASE("neighborhood embedding is zero when all hop weights vanish") {
  Rng rng(3);
  const Graph g = random_weighted(6, 0.5, rng);
  const SignalMatrix s = random_signals(6, 4, rng);
  AffinityNet net(4, {2, 8, NormalizeMode::kSymmetric}, 7);
  for (int r = 0; r <= 2; ++r) net.hop_weight(r).value.setZero();
  CHECK(neighborhood_embed(net, g, s, 2).norm() == 0.0);
}

TEST_CASE("radius zero reduces to W0 E(s_u)") {
  Rng rng(5);
  const Graph g = random_weighted(5, 0.4, rng);
  const SignalMatrix s = random_signals(5, 3, rng);
  AffinityNet net(3, {0, 6, NormalizeMode::kSymmetric}, 11);
  const Matrix e = net.vertex_embeddings(s);
  for (int u = 0; u < 5; ++u) {
    const Vector expected = net.hop_weight(0).value * e.row(u).transpose();
    CHECK((neighborhood_embed(net, g, s, u) - expected).norm() <= 1e-12);
  }
}

TEST_CASE("path neighborhood embedding matches the hand-expanded double sum") {
  const Graph g = path3();
  Rng rng(7);
  const SignalMatrix s = random_signals(3, 2, rng, 0.1, 1.0);  // non-negative
  AffinityNet net(2, {1, 2, NormalizeMode::kSymmetric}, 13);
  make_embedder_identity(net, 2);
  Matrix w0(2, 2), w1(2, 2);
  w0 << 1.0, 2.0, -0.5, 0.25;
  w1 << 0.5, -1.0, 2.0, 0.75;
  net.hop_weight(0).value = w0;
  net.hop_weight(1).value = w1;

  const Matrix shift = normalize_adjacency(g, NormalizeMode::kSymmetric);
  const std::vector<Matrix> pows = shift_powers(shift, 1);
  for (int u = 0; u < 3; ++u) {
    const Neighborhood nb = neighborhood(g, s, u, 1);
    Vector expected = Vector::Zero(2);
    for (int r = 0; r <= 1; ++r) {
      const Matrix& w = r == 0 ? w0 : w1;
      for (int member : nb.members) {
        expected += pows[r](member, u) * (w * s.row(member).transpose());
      }
    }
    expected /= 2.0;  // 1 / (R + 1)
    CHECK((neighborhood_embed(net, g, s, u) - expected).norm() <= 1e-10);
  }
}

TEST_CASE("affinity is finite, sigma-bounded and symmetric under the path mirror") {
  Rng rng(17);
  SignalMatrix s(3, 2);
  s << 0.7, 0.2, 0.1, 0.9, 0.7, 0.2;  // vertices 0 and 2 identical
  AffinityNet net(2, {1, 4, NormalizeMode::kSymmetric}, 19);
  const Graph g = path3();
  const double t00 = affinity(net, g, s, 0, 0);
  const double t22 = affinity(net, g, s, 2, 2);
  CHECK(t00 == doctest::Approx(t22).epsilon(1e-12));
  const double sig = 1.0 / (1.0 + std::exp(-t00));
  CHECK(sig > 0.0);
  CHECK(sig < 1.0);
}

TEST_CASE("affinity scores permute under relabeling") {
  Rng rng(23);
  const Graph g = random_weighted(7, 0.5, rng);
  const SignalMatrix s = random_signals(7, 3, rng);
  AffinityNet net(3, {1, 8, NormalizeMode::kSymmetric}, 29);

  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Graph pg;
  pg.n = 7;
  pg.adjacency = Matrix::Zero(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) pg.adjacency(perm[i], perm[j]) = g.adjacency(i, j);
  SignalMatrix ps(7, 3);
  for (int i = 0; i < 7; ++i) ps.row(perm[i]) = s.row(i);

  for (int v = 0; v < 7; ++v) {
    for (int u = 0; u < 7; ++u) {
      CHECK(affinity(net, pg, ps, perm[v], perm[u]) ==
            doctest::Approx(affinity(net, g, s, v, u)).epsilon(1e-9));
    }
  }

  const Vector a = attention_vector(net, g, s);
  const Vector pa = attention_vector(net, pg, ps);
  for (int v = 0; v < 7; ++v) CHECK(pa(perm[v]) == doctest::Approx(a(v)).epsilon(1e-9));
}

TEST_CASE("mi_objective of the zeroed net is twice log one half") {
  Rng rng(31);
  const Graph g = random_weighted(6, 0.5, rng);
  const SignalMatrix s = random_signals(6, 3, rng);
  AffinityNet net(3, {1, 4, NormalizeMode::kSymmetric}, 37);
  zero_params(net.params());
  std::vector<int> all{0, 1, 2, 3, 4, 5};
  const std::vector<std::pair<int, int>> negs{{0, 1}, {2, 5}, {4, 3}};
  CHECK(mi_objective(net, g, s, all, negs) == doctest::Approx(2.0 * std::log(0.5)));
  CHECK_THROWS_AS(mi_objective(net, g, s, {}, negs), DataError);
}

TEST_CASE("mi_objective is never positive") {
  Rng rng(41);
  for (int t = 0; t < 5; ++t) {
    const Graph g = random_weighted(8, 0.4, rng);
    const SignalMatrix s = random_signals(8, 2, rng);
    AffinityNet net(2, {1, 6, NormalizeMode::kSymmetric}, 43 + t);
    Rng nrng(t);
    const auto negs = sample_negatives(8, 3, nrng);
    std::vector<int> all(8);
    std::iota(all.begin(), all.end(), 0);
    CHECK(mi_objective(net, g, s, all, negs) <= 0.0);
  }
}

TEST_CASE("a constructed one-hot net achieves near-zero objective") {
  // 2 isolated vertices with one-hot features, R = 0; the head computes
  // 20 * <e, p> - 10, so matched pairs score +10 and mismatched -10.
  const Graph g = build_graph(2, {});
  SignalMatrix s(2, 2);
  s << 1.0, 0.0, 0.0, 1.0;
  AffinityNet net(2, {0, 2, NormalizeMode::kSymmetric}, 47);
  make_embedder_identity(net, 2);
  net.hop_weight(0).value = Matrix::Identity(2, 2);
  Matrix w1 = Matrix::Zero(4, 2);
  w1(0, 0) = 1.0;
  w1(2, 0) = 1.0;  // h0 = relu(e0 + p0 - 1)
  w1(1, 1) = 1.0;
  w1(3, 1) = 1.0;  // h1 = relu(e1 + p1 - 1)
  net.params().find("s_w.w1")->value = w1;
  net.params().find("s_w.b1")->value = Matrix::Constant(1, 2, -1.0);
  Matrix w2(2, 1);
  w2 << 20.0, 20.0;
  net.params().find("s_w.w2")->value = w2;
  net.params().find("s_w.b2")->value = Matrix::Constant(1, 1, -10.0);

  CHECK(affinity(net, g, s, 0, 0) == doctest::Approx(10.0));
  CHECK(affinity(net, g, s, 0, 1) == doctest::Approx(-10.0));
  const double value = mi_objective(net, g, s, {0, 1}, {{0, 1}, {1, 0}});
  CHECK(value >= -1e-3);
  CHECK(value <= 0.0);
}

TEST_CASE("training raises the objective on an SBM with bandlimited signals") {
  SbmSpec spec{{15, 15}, Matrix(2, 2), 53};
  spec.probabilities << 0.4, 0.03, 0.03, 0.4;
  const Graph g = sbm(spec);
  const SignalMatrix s = bandlimited_signals(g, 5) * std::sqrt(30.0);
  AffinityNet net(5, {1, 8, NormalizeMode::kSymmetric}, 59);
  SamplerTrainConfig cfg;
  cfg.epochs = 120;
  cfg.learning_rate = 0.02;
  cfg.seed = 61;
  const SamplerTrainResult res = train_affinity(net, g, s, cfg);
  CHECK(res.objective_trace.back() > res.objective_trace.front());
}

TEST_CASE("zero negatives reduces the objective to the first term") {
  Rng rng(67);
  const Graph g = random_weighted(7, 0.4, rng);
  const SignalMatrix s = random_signals(7, 2, rng);
  AffinityNet net(2, {1, 4, NormalizeMode::kSymmetric}, 71);
  std::vector<int> all(7);
  std::iota(all.begin(), all.end(), 0);
  const double with_empty = mi_objective(net, g, s, all, {});
  const SamplerContext ctx = net.make_context(g, s);
  const Matrix e = net.vertex_embeddings(s);
  const Matrix p = net.neighborhood_embeddings(ctx);
  const Vector t = net.affinity_values(e, p);
  double expected = 0.0;
  for (int v = 0; v < 7; ++v) expected += log_sigmoid(t(v));
  CHECK(with_empty == doctest::Approx(expected / 7.0).epsilon(1e-12));
}

TEST_CASE("training replays bitwise under a fixed seed") {
  SbmSpec spec{{8, 8}, Matrix(2, 2), 73};
  spec.probabilities << 0.5, 0.05, 0.05, 0.5;
  const Graph g = sbm(spec);
  const SignalMatrix s = bandlimited_signals(g, 3);
  auto run = [&] {
    AffinityNet net(3, {1, 4, NormalizeMode::kSymmetric}, 79);
    SamplerTrainConfig cfg;
    cfg.epochs = 20;
    cfg.seed = 83;
    return train_affinity(net, g, s, cfg).objective_trace;
  };
  CHECK(run() == run());
}

TEST_CASE("criterion of a singleton is its own-neighborhood log score") {
  Rng rng(89);
  const Graph g = random_weighted(6, 0.5, rng);
  const SignalMatrix s = random_signals(6, 3, rng);
  AffinityNet net(3, {1, 4, NormalizeMode::kSymmetric}, 97);
  for (int v = 0; v < 6; ++v) {
    const double expected = log_sigmoid(affinity(net, g, s, v, v));
    CHECK(criterion_score(net, g, s, {v}) == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK(criterion_score(net, g, s, {0, 3}) <= 0.0);
  CHECK_THROWS_AS(criterion_score(net, g, s, {}), DataError);
}

TEST_CASE("sampled pair estimate tracks the exact enumeration") {
  Rng rng(101);
  const Graph g = random_weighted(14, 0.3, rng);
  const SignalMatrix s = random_signals(14, 3, rng);
  AffinityNet net(3, {1, 6, NormalizeMode::kSymmetric}, 103);
  std::vector<int> set5{1, 4, 7, 9, 12};
  const double exact5 = criterion_score(net, g, s, set5, 1 << 20);
  const double sampled5 = criterion_score(net, g, s, set5, 16, 107);
  CHECK(std::abs(exact5 - sampled5) <= 0.05);

  std::vector<int> set12(12);
  std::iota(set12.begin(), set12.end(), 1);
  const double exact12 = criterion_score(net, g, s, set12, 1 << 20);
  const double sampled12 = criterion_score(net, g, s, set12, 100, 109);
  CHECK(std::abs(exact12 - sampled12) <= 0.05);
}

TEST_CASE("greedy selection matches the exhaustive greedy oracle on small graphs") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(200 + seed);
    const int n = 5 + static_cast<int>(rng.uniform_index(4));  // 5..8
    const Graph g = random_weighted(n, 0.5, rng);
    const SignalMatrix s = random_signals(n, 2, rng);
    AffinityNet net(2, {1, 4, NormalizeMode::kSymmetric}, 300 + seed);
    const int m = 1 + static_cast<int>(rng.uniform_index(3));  // 1..3

    std::vector<int> selected;
    for (int step = 0; step < m; ++step) {
      int best = -1;
      double best_score = 0.0;
      for (int v = 0; v < n; ++v) {
        if (std::find(selected.begin(), selected.end(), v) != selected.end()) continue;
        auto trial = selected;
        trial.push_back(v);
        const double score = criterion_score(net, g, s, trial, 1 << 20);
        if (best < 0 || score > best_score) {
          best = v;
          best_score = score;
        }
      }
      selected.push_back(best);
    }

    const SelectionResult res = greedy_select(net, g, s, m);
    CHECK(res.plan.indices == selected);
    std::set<int> dedup(res.plan.indices.begin(), res.plan.indices.end());
    CHECK(dedup.size() == static_cast<std::size_t>(m));
  }
}

TEST_CASE("first greedy pick maximizes the singleton criterion") {
  Rng rng(211);
  const Graph g = random_weighted(10, 0.4, rng);
  const SignalMatrix s = random_signals(10, 3, rng);
  AffinityNet net(3, {1, 6, NormalizeMode::kSymmetric}, 223);
  const SelectionResult res = greedy_select(net, g, s, 4);
  double best = -1e300;
  int arg = -1;
  for (int v = 0; v < 10; ++v) {
    const double c = criterion_score(net, g, s, {v});
    if (c > best) {
      best = c;
      arg = v;
    }
  }
  CHECK(res.plan.indices[0] == arg);
  // shifting the head bias preserves the singleton ordering
  net.params().find("s_w.b2")->value.array() += 0.8;
  const SelectionResult shifted = greedy_select(net, g, s, 4);
  CHECK(shifted.plan.indices[0] == arg);
}

TEST_CASE("attention vector is sigmoid of the self affinity and monotone in it") {
  Rng rng(227);
  const Graph g = random_weighted(8, 0.4, rng);
  const SignalMatrix s = random_signals(8, 2, rng);
  AffinityNet net(2, {1, 4, NormalizeMode::kSymmetric}, 229);
  const Vector a = attention_vector(net, g, s);
  for (int v = 0; v < 8; ++v) {
    CHECK(a(v) > 0.0);
    CHECK(a(v) < 1.0);
    CHECK(a(v) == doctest::Approx(1.0 / (1.0 + std::exp(-affinity(net, g, s, v, v)))));
  }
  net.params().find("s_w.b2")->value.array() += 1.0;
  const Vector raised = attention_vector(net, g, s);
  for (int v = 0; v < 8; ++v) CHECK(raised(v) > a(v));
}

TEST_CASE("tie-free greedy selection is permutation equivariant") {
  Rng rng(233);
  const Graph g = random_weighted(7, 0.5, rng);
  const SignalMatrix s = random_signals(7, 2, rng);
  AffinityNet net(2, {1, 4, NormalizeMode::kSymmetric}, 239);

  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Graph pg;
  pg.n = 7;
  pg.adjacency = Matrix::Zero(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) pg.adjacency(perm[i], perm[j]) = g.adjacency(i, j);
  SignalMatrix ps(7, 2);
  for (int i = 0; i < 7; ++i) ps.row(perm[i]) = s.row(i);

  const SelectionResult a = greedy_select(net, g, s, 3);
  const SelectionResult b = greedy_select(net, pg, ps, 3);
  std::vector<int> mapped;
  for (int v : a.plan.indices) mapped.push_back(perm[v]);
  CHECK(b.plan.indices == mapped);
}

TEST_CASE("objective moves smoothly under tiny parameter perturbations") {
  Rng rng(241);
  const Graph g = random_weighted(9, 0.4, rng);
  const SignalMatrix s = random_signals(9, 3, rng);
  AffinityNet net(3, {1, 6, NormalizeMode::kSymmetric}, 251);
  std::vector<int> all(9);
  std::iota(all.begin(), all.end(), 0);
  Rng nrng(5);
  const auto negs = sample_negatives(9, 3, nrng);
  const double before = mi_objective(net, g, s, all, negs);
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    net.params().at(i).value.array() += 1e-7;
  }
  const double after = mi_objective(net, g, s, all, negs);
  CHECK(std::abs(after - before) <= 1e-4);
}

TEST_CASE("tape and frozen paths compute the same objective") {
  Rng rng(257);
  const Graph g = random_weighted(8, 0.5, rng);
  const SignalMatrix s = random_signals(8, 3, rng);
  AffinityNet net(3, {2, 6, NormalizeMode::kSymmetric}, 263);
  std::vector<int> all(8);
  std::iota(all.begin(), all.end(), 0);
  Rng nrng(7);
  const auto negs = sample_negatives(8, 4, nrng);
  const double frozen = mi_objective(net, g, s, all, negs);

  const SamplerContext ctx = net.make_context(g, s);
  ad::Tape tape;
  const AffinityNet::TapeEmbeddings emb = net.embeddings_tape(tape, ctx);
  ad::Tensor t_pos = net.affinity_tape(tape, emb.e, emb.p);
  ad::Tensor obj = ad::mean(ad::log(ad::sigmoid(t_pos)));
  std::vector<int> vs, us;
  for (const auto& [v, u] : negs) {
    vs.push_back(v);
    us.push_back(u);
  }
  ad::Tensor t_neg = net.affinity_tape(tape, ad::gather_rows(emb.e, vs),
                                       ad::gather_rows(emb.p, us));
  ad::Tensor ones = tape.constant(Matrix(Matrix::Ones(t_neg.rows(), 1)));
  obj = ad::add(obj, ad::mean(ad::log(ad::sub(ones, ad::sigmoid(t_neg)))));
  CHECK(obj.value()(0, 0) == doctest::Approx(frozen).epsilon(1e-10));
}
