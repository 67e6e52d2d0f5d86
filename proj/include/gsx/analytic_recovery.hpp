#pragma once

#include <string>
#include <vector>

#include "gsx/graph.hpp"

namespace gsx {

/// Attention entries below this are clamped before division, with a warning.
inline constexpr double kAttentionClamp = 1e-3;

/// H = h(shift)^T h(shift) with the block structure induced by a sampling
/// plan: measured rows in plan order, unmeasured rows ascending.
struct RecoveryOperator {
  Matrix h_full;
  Matrix shift;
  std::vector<int> measured;
  std::vector<int> unmeasured;
  Matrix h_uu;
  Matrix h_um;

  Matrix block_mm() const;
  Matrix block_mu() const;
};

RecoveryOperator build_recovery_operator(const Graph& g, const FilterSpec& h,
                                         const SamplingPlan& plan,
                                         NormalizeMode shift_mode = NormalizeMode::kSymmetric);

struct RecoveryResult {
  Vector signal;
  std::vector<std::string> warnings;
};

/// Lemma-style closed form: x_M = y / a_M, x_U = -H_UU^{-1} H_UM x_M.
/// Singular H_UU falls back to the minimum-norm pseudo-solve with a warning.
RecoveryResult recover_closed_form(const RecoveryOperator& op, const SamplingPlan& plan,
                                   const Vector& y);

struct IterativeResult {
  Vector signal;
  /// Relative error vs `reference` per iteration when one is given,
  /// otherwise the norm of the change between consecutive iterates.
  std::vector<double> error_trace;
  std::vector<std::string> warnings;
};

/// x <- (I - alpha H) x followed by x_M <- y / a_M each iteration, starting
/// from x_M = y / a_M, x_U = 0. Aborts with NumericError if the iterate norm
/// exceeds 1e12.
IterativeResult recover_iterative(const RecoveryOperator& op, const SamplingPlan& plan,
                                  const Vector& y, double step_size, int iterations,
                                  const Vector* reference = nullptr);

/// alpha = 1 / lambda_max(H); guarantees the iteration matrix and its UU
/// block have spectral norm at most 1.
double default_step_size(const RecoveryOperator& op);

/// y / a_M with the documented clamp; appends a warning when clamping fires.
Vector divide_by_attention(const SamplingPlan& plan, const Vector& y,
                           std::vector<std::string>* warnings);

}  // namespace gsx
