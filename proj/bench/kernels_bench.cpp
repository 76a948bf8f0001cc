// Serial reference vs OpenMP kernel timings on the synthetic benchmark set.
// Every row also reports the largest absolute difference between the two
// outputs, which should always print 0.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <vector>

#include "ensemblekit/dataset.hpp"
#include "ensemblekit/denn.hpp"
#include "ensemblekit/ensembles.hpp"
#include "ensemblekit/parallel.hpp"
#include "ensemblekit/rng.hpp"
#include "ensemblekit/smote.hpp"
#include "ensemblekit/synthetic.hpp"

using namespace ensemblekit;

namespace {

double time_best(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

void row(const char* name, double serial, double parallel, double diff) {
  std::printf("%-22s %10.4f %10.4f %8.2fx %10.3g\n", name, serial, parallel, serial / parallel,
              diff);
}

}  // namespace

int main() {
  synthetic::BenchmarkSpec spec;
  const FeatureSet data = synthetic::benchmark_dataset(spec);
  const Matrix x = feature_matrix(data);
  const auto y = data.labels();

  std::printf("records %zu, dim %zu, threads %d\n", data.size(), data.dim, max_threads());
  std::printf("%-22s %10s %10s %9s %10s\n", "kernel", "serial_s", "omp_s", "speedup", "max_diff");

  EnsembleConfig cfg;
  cfg.n_trees = 64;
  RandomForest fs, fp;
  const double t_fit_s = time_best([&] { fs = fit_forest(x, y, cfg, 11, ExecPolicy::serial); }, 1);
  const double t_fit_p = time_best([&] { fp = fit_forest(x, y, cfg, 11, ExecPolicy::parallel); }, 1);
  Matrix ps, pp;
  const double t_pred_s =
      time_best([&] { ps = forest_predict_proba(fs, x, ExecPolicy::serial); }, 3);
  const double t_pred_p =
      time_best([&] { pp = forest_predict_proba(fp, x, ExecPolicy::parallel); }, 3);
  row("forest_fit", t_fit_s, t_fit_p, max_abs_diff(ps.values(), pp.values()));
  row("forest_predict", t_pred_s, t_pred_p, max_abs_diff(ps.values(), pp.values()));

  EnsembleConfig gcfg;
  const GradientBoosting gbm = fit_gradient_boosting(x, y, gcfg, 12);
  const double t_g_s = time_best([&] { ps = gbm_predict_proba(gbm, x, ExecPolicy::serial); }, 3);
  const double t_g_p = time_best([&] { pp = gbm_predict_proba(gbm, x, ExecPolicy::parallel); }, 3);
  row("gbm_predict", t_g_s, t_g_p, max_abs_diff(ps.values(), pp.values()));

  DennConfig dcfg;
  dcfg.input_dim = data.dim;
  Rng rng(13);
  const DennModel model = denn_init(dcfg, rng);
  const double t_d_s = time_best([&] { ps = denn_predict_proba(model, x, ExecPolicy::serial); }, 3);
  const double t_d_p =
      time_best([&] { pp = denn_predict_proba(model, x, ExecPolicy::parallel); }, 3);
  row("denn_predict", t_d_s, t_d_p, max_abs_diff(ps.values(), pp.values()));

  std::vector<double> ds(x.rows()), dp(x.rows());
  const double t_k_s = time_best(
      [&] {
        for (std::size_t q = 0; q < 200; ++q) squared_distances(x, q, ds, ExecPolicy::serial);
      },
      3);
  const double t_k_p = time_best(
      [&] {
        for (std::size_t q = 0; q < 200; ++q) squared_distances(x, q, dp, ExecPolicy::parallel);
      },
      3);
  row("squared_distances x200", t_k_s, t_k_p, max_abs_diff(ds, dp));
  return 0;
}
