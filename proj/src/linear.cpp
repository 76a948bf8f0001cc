#include "ensemblekit/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ensemblekit/error.hpp"

namespace ensemblekit {

namespace {

// Per-feature location and scale used to precondition the solvers.
struct Scaling {
  Vector mean;
  Vector scale;
};

Scaling column_scaling(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Scaling s{Vector(d, 0.0), Vector(d, 1.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  Vector var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = x(i, j) - s.mean[j];
      var[j] += diff * diff;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix standardize(const Matrix& x, const Scaling& s) {
  Matrix z(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) z(i, j) = (x(i, j) - s.mean[j]) / s.scale[j];
  }
  return z;
}

// Maps standardized-space coefficients (u, c) to raw-space (w, b).
std::pair<Vector, double> to_raw(const Vector& u, double c, const Scaling& s) {
  Vector w(u.size());
  double b = c;
  for (std::size_t j = 0; j < u.size(); ++j) {
    w[j] = u[j] / s.scale[j];
    b -= w[j] * s.mean[j];
  }
  return {std::move(w), b};
}

void check_binary(const Matrix& x, std::span<const int> y, const char* who) {
  if (x.rows() == 0) throw ContractError(std::string(who) + ": empty training set");
  if (y.size() != x.rows()) throw ContractError(std::string(who) + ": label count mismatch");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw ContractError(std::string(who) + ": labels must be 0 or 1");
  }
  if (!has0 || !has1) throw ContractError(std::string(who) + ": both classes are required");
}

// Log loss of the standardized model plus the raw-space penalty
// (l2/2) sum_j (u_j / scale_j)^2. Fills the gradient when requested.
double logreg_scaled_objective(const Vector& u, double c, const Matrix& z,
                               std::span<const int> y, double l2, const Scaling& s,
                               Vector* grad_u, double* grad_c) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  double loss = 0.0;
  if (grad_u) std::fill(grad_u->begin(), grad_u->end(), 0.0);
  double gc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = c + dot(u, z.row(i));
    loss += softplus(m) - (y[i] == 1 ? m : 0.0);
    if (grad_u) {
      const double r = sigmoid(m) - y[i];
      gc += r;
      const auto zi = z.row(i);
      for (std::size_t j = 0; j < d; ++j) (*grad_u)[j] += r * zi[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double penalty = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double w = u[j] / s.scale[j];
    penalty += w * w;
    if (grad_u) (*grad_u)[j] = (*grad_u)[j] * inv_n + l2 * w / s.scale[j];
  }
  if (grad_c) *grad_c = gc * inv_n;
  return loss * inv_n + 0.5 * l2 * penalty;
}

double platt_objective(std::span<const double> s, std::span<const double> t, double a,
                       double b) {
  double f = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double apb = s[i] * a + b;
    f += apb >= 0.0 ? t[i] * apb + std::log1p(std::exp(-apb))
                    : (t[i] - 1.0) * apb + std::log1p(std::exp(apb));
  }
  return f;
}

}  // namespace

double logreg_objective(const LogisticRegression& model, const Matrix& x,
                        std::span<const int> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double m = model.bias + dot(model.weights, x.row(i));
    loss += softplus(m) - (y[i] == 1 ? m : 0.0);
  }
  return loss / static_cast<double>(x.rows()) +
         0.5 * model.l2 * dot(model.weights, model.weights);
}

void logreg_gradient(const LogisticRegression& model, const Matrix& x,
                     std::span<const int> y, Vector& grad_w, double& grad_b) {
  grad_w.assign(x.cols(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double r = sigmoid(model.bias + dot(model.weights, x.row(i))) - y[i];
    grad_b += r;
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) grad_w[j] += r * xi[j];
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  grad_b *= inv_n;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    grad_w[j] = grad_w[j] * inv_n + model.l2 * model.weights[j];
  }
}

LogisticRegression logreg_fit(const Matrix& x, std::span<const int> y,
                              const LogRegConfig& cfg) {
  check_binary(x, y, "logreg_fit");
  if (cfg.l2 < 0.0 || !(cfg.lr > 0.0)) throw ContractError("logreg_fit: bad l2 or lr");
  const Scaling s = column_scaling(x);
  const Matrix z = standardize(x, s);
  const std::size_t d = x.cols();

  Vector u(d, 0.0), gu(d), trial_u(d);
  double c = 0.0, gc = 0.0;
  double step = cfg.lr;
  double f = logreg_scaled_objective(u, c, z, y, cfg.l2, s, &gu, &gc);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double g2 = dot(gu, gu) + gc * gc;
    if (g2 == 0.0) break;
    // Armijo backtracking keeps every accepted step a strict descent.
    bool accepted = false;
    while (step > 1e-12) {
      for (std::size_t j = 0; j < d; ++j) trial_u[j] = u[j] - step * gu[j];
      const double trial_c = c - step * gc;
      const double trial_f =
          logreg_scaled_objective(trial_u, trial_c, z, y, cfg.l2, s, nullptr, nullptr);
      if (trial_f <= f - 1e-4 * step * g2) {
        u.swap(trial_u);
        c = trial_c;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    f = logreg_scaled_objective(u, c, z, y, cfg.l2, s, &gu, &gc);
    step = std::min(cfg.lr, step * 2.0);
  }

  auto [w, b] = to_raw(u, c, s);
  return LogisticRegression{std::move(w), b, cfg.l2};
}

LogisticRegression logreg_fit(const FeatureSet& train, double l2, std::size_t epochs,
                              double lr, std::uint64_t seed) {
  if (train.empty()) throw ContractError("logreg_fit: empty training set");
  const auto y = train.labels();
  return logreg_fit(feature_matrix(train), y, LogRegConfig{l2, epochs, lr, seed});
}

Vector logreg_predict_proba(const LogisticRegression& model, std::span<const double> x) {
  if (x.size() != model.weights.size()) {
    throw ContractError("logreg_predict_proba: dimension mismatch");
  }
  const double p = sigmoid(model.bias + dot(model.weights, x));
  return {1.0 - p, p};
}

double LinearSvm::decision_value(std::span<const double> x) const {
  return bias + dot(weights, x);
}

double svm_objective(const LinearSvm& model, const Matrix& x, std::span<const int> y) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double t = y[i] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - t * model.decision_value(x.row(i)));
  }
  return 0.5 * dot(model.weights, model.weights) + model.c * hinge;
}

LinearSvm svm_fit(const Matrix& x, std::span<const int> y, const SvmConfig& cfg) {
  check_binary(x, y, "svm_fit");
  if (!(cfg.c > 0.0) || !(cfg.lr > 0.0)) throw ContractError("svm_fit: bad c or lr");
  const Scaling s = column_scaling(x);
  const Matrix z = standardize(x, s);
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double reg = 1.0 / (cfg.c * static_cast<double>(n));

  // Minimizes objective / (c n), which has the same minimizer.
  auto evaluate = [&](const Vector& u, double b, Vector* gu, double* gb) {
    double hinge = 0.0;
    if (gu) std::fill(gu->begin(), gu->end(), 0.0);
    double g_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = y[i] == 1 ? 1.0 : -1.0;
      const double margin = t * (b + dot(u, z.row(i)));
      if (margin < 1.0) {
        hinge += 1.0 - margin;
        if (gu) {
          g_b -= t;
          const auto zi = z.row(i);
          for (std::size_t j = 0; j < d; ++j) (*gu)[j] -= t * zi[j];
        }
      }
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double w = u[j] / s.scale[j];
      norm += w * w;
      if (gu) (*gu)[j] = (*gu)[j] * inv_n + reg * w / s.scale[j];
    }
    if (gb) *gb = g_b * inv_n;
    return 0.5 * reg * norm + hinge * inv_n;
  };

  Vector u(d, 0.0), gu(d, 0.0), best_u = u;
  double b = 0.0, gb = 0.0, best_b = 0.0;
  double best_f = evaluate(u, b, &gu, &gb);
  for (std::size_t k = 1; k <= cfg.epochs; ++k) {
    const double step = cfg.lr / std::sqrt(static_cast<double>(k));
    for (std::size_t j = 0; j < d; ++j) u[j] -= step * gu[j];
    b -= step * gb;
    const double f = evaluate(u, b, &gu, &gb);
    if (f < best_f) {
      best_f = f;
      best_u = u;
      best_b = b;
    }
  }

  LinearSvm model;
  auto [w, raw_b] = to_raw(best_u, best_b, s);
  model.weights = std::move(w);
  model.bias = raw_b;
  model.c = cfg.c;
  Vector scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = model.decision_value(x.row(i));
  std::tie(model.platt_a, model.platt_b) = platt_fit(scores, y);
  return model;
}

LinearSvm svm_fit(const FeatureSet& train, double c, std::size_t epochs, double lr,
                  std::uint64_t seed) {
  if (train.empty()) throw ContractError("svm_fit: empty training set");
  const auto y = train.labels();
  return svm_fit(feature_matrix(train), y, SvmConfig{c, epochs, lr, seed});
}

std::pair<double, double> platt_fit(std::span<const double> scores, std::span<const int> y) {
  if (scores.size() != y.size() || scores.empty()) {
    throw ContractError("platt_fit: scores and labels must be non-empty and equal length");
  }
  double prior1 = 0.0, prior0 = 0.0;
  for (int v : y) (v == 1 ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  Vector t(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] == 1 ? hi : lo;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double f = platt_objective(scores, t, a, b);
  constexpr double kSigma = 1e-12;
  constexpr double kMinStep = 1e-10;
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double apb = scores[i] * a + b;
      double p, q;
      if (apb >= 0.0) {
        const double e = std::exp(-apb);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(apb);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = platt_objective(scores, t, na, nb);
      if (nf < f + 1e-4 * step * gd) {
        a = na;
        b = nb;
        f = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }
  return {a, b};
}

Vector svm_predict_proba(const LinearSvm& model, std::span<const double> x) {
  if (x.size() != model.weights.size()) {
    throw ContractError("svm_predict_proba: dimension mismatch");
  }
  const double z = model.platt_a * model.decision_value(x) + model.platt_b;
  // 1 / (1 + exp(z)) == sigmoid(-z)
  const double p = sigmoid(-z);
  return {1.0 - p, p};
}

}  // namespace ensemblekit
