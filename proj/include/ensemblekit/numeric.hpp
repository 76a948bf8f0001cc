#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ensemblekit {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Probabilities below this are clamped before taking a logarithm.
inline constexpr double kProbabilityClip = 1e-12;

Vector relu(std::span<const double> x);

// Max-subtracted softmax. Throws ContractError on empty input.
Vector softmax(std::span<const double> logits);

// -ln(max(probs[label], kProbabilityClip)). Throws std::out_of_range when
// label >= probs.size().
double cross_entropy(std::span<const double> probs, std::size_t label);

double sigmoid(double z);

// ln(1 + exp(z)) without overflow.
double softplus(double z);

double dot(std::span<const double> a, std::span<const double> b);

// out = W * x + bias
void affine(const Matrix& weights, std::span<const double> x,
            std::span<const double> bias, std::span<double> out);

bool all_finite(std::span<const double> values);

// Index of the largest entry; ties resolve to the lower index.
std::size_t argmax(std::span<const double> values);

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

// One bias-corrected Adam step. Throws ContractError when the parameter,
// gradient and state sizes disagree or the hyperparameters are out of range.
void adam_update(std::span<double> param, std::span<const double> grad,
                 AdamState& state, const AdamParams& params);

inline void adam_update(Matrix& param, const Matrix& grad, AdamState& state,
                        const AdamParams& params) {
  adam_update(param.values(), grad.values(), state, params);
}

}  // namespace ensemblekit
