#pragma once

// Central finite-difference check of the analytic DENN gradients.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "ensemblekit/denn.hpp"

namespace ensemblekit::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // perturbation crossed a ReLU kink
  std::array<std::size_t, 6> checked_per_block{};
};

// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace detail {

inline bool same_activation_pattern(const DennCache& a, const DennCache& b) {
  for (std::size_t i = 0; i < a.cnn_pre.size(); ++i) {
    if ((a.cnn_pre[i] > 0.0) != (b.cnn_pre[i] > 0.0)) return false;
  }
  for (std::size_t i = 0; i < a.mlp_pre.size(); ++i) {
    if ((a.mlp_pre[i] > 0.0) != (b.mlp_pre[i] > 0.0)) return false;
  }
  return true;
}

}  // namespace detail

inline GradCheck check_denn_gradients(const DennModel& model, std::span<const double> x,
                                      std::size_t label, double h = 1e-5,
                                      double floor = 1e-6) {
  const DennGradients analytic = denn_gradients(model, x, label);
  const DennCache base = denn_forward(model, x);
  DennModel probe = model;
  GradCheck out;

  auto check_block = [&](std::size_t block, std::span<double> params,
                         std::span<const double> grads) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      const DennCache plus = denn_forward(probe, x);
      const double f_plus = cross_entropy(plus.probs, label);
      params[i] = saved - h;
      const DennCache minus = denn_forward(probe, x);
      const double f_minus = cross_entropy(minus.probs, label);
      params[i] = saved;
      if (!detail::same_activation_pattern(base, plus) ||
          !detail::same_activation_pattern(base, minus)) {
        ++out.skipped;
        continue;
      }
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      out.max_rel_error = std::max(out.max_rel_error, relative_error(grads[i], numeric, floor));
      ++out.checked;
      ++out.checked_per_block[block];
    }
  };

  check_block(0, probe.cnn_branch.weights.values(), analytic.cnn_branch.weights.values());
  check_block(1, probe.cnn_branch.bias, analytic.cnn_branch.bias);
  check_block(2, probe.mlp_branch.weights.values(), analytic.mlp_branch.weights.values());
  check_block(3, probe.mlp_branch.bias, analytic.mlp_branch.bias);
  check_block(4, probe.meta.weights.values(), analytic.meta.weights.values());
  check_block(5, probe.meta.bias, analytic.meta.bias);
  return out;
}

}  // namespace ensemblekit::testing
