#include "ensemblekit/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ensemblekit/error.hpp"

namespace ensemblekit {

Vector relu(std::span<const double> x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

Vector softmax(std::span<const double> logits) {
  if (logits.empty()) throw ContractError("softmax: empty logits");
  const double top = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

double cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) {
    throw std::out_of_range("cross_entropy: label " + std::to_string(label) +
                            " outside " + std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs[label], kProbabilityClip));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void affine(const Matrix& weights, std::span<const double> x,
            std::span<const double> bias, std::span<double> out) {
  if (x.size() != weights.cols() || bias.size() != weights.rows() ||
      out.size() != weights.rows()) {
    throw ContractError("affine: shape mismatch");
  }
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    out[r] = bias[r] + dot(weights.row(r), x);
  }
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void adam_update(std::span<double> param, std::span<const double> grad,
                 AdamState& state, const AdamParams& params) {
  if (param.size() != grad.size() || state.m.size() != param.size() ||
      state.v.size() != param.size()) {
    throw ContractError("adam_update: parameter, gradient and state shapes differ");
  }
  if (!(params.lr > 0.0) || !(params.eps > 0.0) || params.beta1 < 0.0 ||
      params.beta1 >= 1.0 || params.beta2 < 0.0 || params.beta2 >= 1.0) {
    throw ContractError("adam_update: hyperparameters out of range");
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double m_correction = 1.0 - std::pow(params.beta1, t);
  const double v_correction = 1.0 - std::pow(params.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = params.beta1 * state.m[i] + (1.0 - params.beta1) * g;
    state.v[i] = params.beta2 * state.v[i] + (1.0 - params.beta2) * g * g;
    const double m_hat = state.m[i] / m_correction;
    const double v_hat = state.v[i] / v_correction;
    param[i] -= params.lr * m_hat / (std::sqrt(v_hat) + params.eps);
  }
}

}  // namespace ensemblekit
