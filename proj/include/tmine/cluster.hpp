#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmine/pmi.hpp"

namespace tmine {

inline constexpr double kVarianceFloor = 1e-6;
inline constexpr int kMixtureParams = 5;  // 2 means, 2 variances, 1 free weight

struct EmOptions {
  double tolerance = 1e-8;  // stop when the per-iteration gain drops below this
  int max_iterations = 500;
  double variance_floor = kVarianceFloor;
  // Extra fits from random data points as means; the best log-likelihood wins.
  int random_restarts = 0;
};

// Two-component, one-dimensional Gaussian mixture.
struct MixtureModel {
  std::array<double, 2> weights{0.5, 0.5};
  std::array<double, 2> means{0.0, 0.0};
  std::array<double, 2> variances{1.0, 1.0};
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loglik_trace;  // after each EM iteration

  // Index of the component with the larger mean (component 0 on ties).
  std::size_t high_component() const { return means[1] > means[0] ? 1 : 0; }
  // log(w_k) + log N(x | mu_k, var_k)
  double log_joint(double x, std::size_t k) const;
};

struct GaussianFit {
  double mean = 0.0;
  double variance = 1.0;
  double loglik = 0.0;
};

// Throws InsufficientDataError below 4 points, DegenerateDataError when all
// points coincide, std::invalid_argument on non-finite input.
MixtureModel fit_gmm_em(std::span<const double> scores, std::uint64_t seed,
                        const EmOptions& options = {});

// Maximum-likelihood single Gaussian; the 1-component baseline for AIC.
GaussianFit fit_gaussian(std::span<const double> scores, double variance_floor = kVarianceFloor);

double aic(double loglik, int n_params);
double aic(const MixtureModel& model, int n_params = kMixtureParams);

// true for points whose posterior favours the higher-mean component
// (ties go to the higher-mean component).
std::vector<bool> classify_by_mixture(std::span<const double> scores, const MixtureModel& model);

// F1 on the positive class; 0 when precision+recall has no support.
double f1_score(const std::vector<bool>& predicted, const std::vector<bool>& truth);

struct LambdaGrid {
  double lo = 0.5;
  double hi = 5.0;
  int points = 90;

  // Uniform, both endpoints included.
  std::vector<double> values() const;
};

struct GridPoint {
  double lambda = 0.0;
  std::optional<double> aic;    // empty when the fit failed
  std::string failure;
};

struct LambdaSearchResult {
  double best_lambda = 0.0;
  std::vector<GridPoint> grid;
  std::vector<ValidityScore> scores_at_best;
  MixtureModel model_at_best;
};

// Recombines precomputed components at each grid lambda, fits the mixture
// and keeps the lambda with the lowest AIC (smaller lambda on ties). Grid
// points are fit on up to `workers` threads.
LambdaSearchResult tune_lambda_grid(std::span<const PmiComponents> components, const LambdaGrid& grid,
                                    std::uint64_t seed, const EmOptions& options = {},
                                    std::size_t workers = 1);

}  // namespace tmine
