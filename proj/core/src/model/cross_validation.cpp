#include "bifid/model/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "bifid/errors.hpp"
#include "bifid/model/dual_fidelity_model.hpp"

namespace bifid::model {

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("pearson: length mismatch");
  const auto n = static_cast<double>(a.size());
  if (a.empty()) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, int k, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("cv_folds: need at least two points");
  if (k < 1) throw ArgumentError("cv_folds: k must be >= 1");
  const std::size_t folds = std::clamp<std::size_t>(n / 2, 1, static_cast<std::size_t>(k));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < n; ++i) out[i % folds].push_back(perm[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::optional<RhoEstimate> rho_cv(const Dataset& data, const FoldPredictor& predictor,
                                  int k_folds, std::uint64_t seed) {
  const std::size_t n = data.size(Fidelity::Expensive);
  if (n < 2) return std::nullopt;
  RhoEstimate est;
  est.folds = cv_folds(n, k_folds, seed);
  const auto& exp_rows = data.rows(Fidelity::Expensive);
  for (const auto& fold : est.folds) {
    std::vector<std::size_t> keep;
    keep.reserve(n - fold.size());
    for (std::size_t i = 0, f = 0; i < n; ++i) {
      if (f < fold.size() && fold[f] == i) {
        ++f;
      } else {
        keep.push_back(i);
      }
    }
    const Dataset train = data.select(Fidelity::Expensive, keep);
    Matrix xv(static_cast<Index>(fold.size()), data.dim());
    std::vector<double> truth(fold.size());
    for (std::size_t i = 0; i < fold.size(); ++i) {
      const auto& o = exp_rows[fold[i]];
      for (Index j = 0; j < data.dim(); ++j) xv(static_cast<Index>(i), j) = o.x[static_cast<std::size_t>(j)];
      truth[i] = o.y;
    }
    double r = 0.0;
    if (train.empty()) {
      spdlog::debug("rho_cv: fold has no training data; contributes 0");
    } else {
      const Vector pred = predictor(train, xv);
      r = pearson(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())), truth);
    }
    est.fold_rho.push_back(r);
  }
  est.rho = std::accumulate(est.fold_rho.begin(), est.fold_rho.end(), 0.0) /
            static_cast<double>(est.fold_rho.size());
  return est;
}

FoldPredictor model_fold_predictor(ModelHyperparams hyper, std::uint64_t seed) {
  return [hyper = std::move(hyper), seed](const Dataset& train, const Matrix& xv) {
    DualFidelityModel m(train.dim(), hyper, seed);
    m.train(train, seed + 1);
    const auto preds = m.predict_expensive(xv);
    Vector out(static_cast<Index>(preds.size()));
    for (std::size_t i = 0; i < preds.size(); ++i) out[static_cast<Index>(i)] = preds[i].mean;
    return out;
  };
}

}  // namespace bifid::model
