#include "tmine/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "tmine/errors.hpp"
#include "tmine/parallel.hpp"

namespace tmine {

namespace {

double log_normal_pdf(double x, double mean, double variance) {
  double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double log_sum_exp(double a, double b) {
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mixture_loglik(std::span<const double> xs, const MixtureModel& m) {
  double total = 0.0;
  for (double x : xs) total += log_sum_exp(m.log_joint(x, 0), m.log_joint(x, 1));
  return total;
}

MixtureModel run_em(std::span<const double> xs, MixtureModel model, const EmOptions& options) {
  const auto n = static_cast<double>(xs.size());
  std::vector<double> resp(xs.size());  // responsibility of component 1
  model.loglik = mixture_loglik(xs, model);
  model.loglik_trace.clear();
  model.iterations = 0;
  model.converged = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    // E-step
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double l0 = model.log_joint(xs[i], 0);
      double l1 = model.log_joint(xs[i], 1);
      resp[i] = std::exp(l1 - log_sum_exp(l0, l1));
    }
    // M-step
    std::array<double, 2> nk{0.0, 0.0}, sum{0.0, 0.0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      nk[0] += 1.0 - resp[i];
      nk[1] += resp[i];
      sum[0] += (1.0 - resp[i]) * xs[i];
      sum[1] += resp[i] * xs[i];
    }
    for (std::size_t k = 0; k < 2; ++k) {
      if (nk[k] <= 0.0) {
        // Empty component: leave it where it is with negligible weight.
        model.weights[k] = std::numeric_limits<double>::min();
        continue;
      }
      model.means[k] = sum[k] / nk[k];
      model.weights[k] = nk[k] / n;
    }
    for (std::size_t k = 0; k < 2; ++k) {
      if (nk[k] <= 0.0) continue;
      double ss = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = k == 1 ? resp[i] : 1.0 - resp[i];
        double d = xs[i] - model.means[k];
        ss += r * d * d;
      }
      model.variances[k] = std::max(ss / nk[k], options.variance_floor);
    }
    double wsum = model.weights[0] + model.weights[1];
    model.weights[0] /= wsum;
    model.weights[1] /= wsum;

    double ll = mixture_loglik(xs, model);
    model.loglik_trace.push_back(ll);
    model.iterations = iter + 1;
    double gain = ll - model.loglik;
    model.loglik = ll;
    if (gain < options.tolerance) {
      model.converged = true;
      break;
    }
  }
  return model;
}

void check_scores(std::span<const double> scores) {
  if (scores.size() < 4) {
    throw InsufficientDataError("mixture fit needs at least 4 points, got " +
                                std::to_string(scores.size()));
  }
  for (double x : scores) {
    if (!std::isfinite(x)) throw std::invalid_argument("mixture fit: non-finite score");
  }
}

}  // namespace

double MixtureModel::log_joint(double x, std::size_t k) const {
  return std::log(weights[k]) + log_normal_pdf(x, means[k], variances[k]);
}

MixtureModel fit_gmm_em(std::span<const double> scores, std::uint64_t seed, const EmOptions& options) {
  check_scores(scores);
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw DegenerateDataError("all scores are identical");

  const double n = static_cast<double>(sorted.size());
  double mean = 0.0;
  for (double x : sorted) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : sorted) var += (x - mean) * (x - mean);
  var = std::max(var / n, options.variance_floor);

  MixtureModel init;
  init.means = {quantile(sorted, 0.25), quantile(sorted, 0.75)};
  if (init.means[0] == init.means[1]) init.means = {sorted.front(), sorted.back()};
  init.variances = {var, var};
  MixtureModel best = run_em(scores, init, options);

  if (options.random_restarts > 0) {
    std::mt19937_64 rng(seed);
    for (int r = 0; r < options.random_restarts; ++r) {
      MixtureModel start;
      auto a = sorted[rng() % sorted.size()];
      auto b = sorted[rng() % sorted.size()];
      if (a == b) continue;
      start.means = {std::min(a, b), std::max(a, b)};
      start.variances = {var, var};
      auto fitted = run_em(scores, start, options);
      if (fitted.loglik > best.loglik) best = std::move(fitted);
    }
  }
  if (!std::isfinite(best.loglik)) throw DegenerateDataError("mixture log-likelihood is not finite");
  return best;
}

GaussianFit fit_gaussian(std::span<const double> scores, double variance_floor) {
  if (scores.empty()) throw InsufficientDataError("gaussian fit needs data");
  GaussianFit fit;
  const double n = static_cast<double>(scores.size());
  for (double x : scores) fit.mean += x;
  fit.mean /= n;
  double ss = 0.0;
  for (double x : scores) ss += (x - fit.mean) * (x - fit.mean);
  fit.variance = std::max(ss / n, variance_floor);
  for (double x : scores) fit.loglik += log_normal_pdf(x, fit.mean, fit.variance);
  return fit;
}

double aic(double loglik, int n_params) { return 2.0 * n_params - 2.0 * loglik; }

double aic(const MixtureModel& model, int n_params) {
  if (!std::isfinite(model.loglik)) throw std::invalid_argument("aic: non-finite log-likelihood");
  return aic(model.loglik, n_params);
}

std::vector<bool> classify_by_mixture(std::span<const double> scores, const MixtureModel& model) {
  const auto high = model.high_component();
  const auto low = 1 - high;
  std::vector<bool> out;
  out.reserve(scores.size());
  for (double x : scores) out.push_back(model.log_joint(x, high) >= model.log_joint(x, low));
  return out;
}

double f1_score(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("f1_score: length mismatch");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] && truth[i]) ++tp;
    if (predicted[i] && !truth[i]) ++fp;
    if (!predicted[i] && truth[i]) ++fn;
  }
  if (tp == 0) return 0.0;
  double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<double> LambdaGrid::values() const {
  if (points < 2) throw std::invalid_argument("lambda grid needs at least 2 points");
  if (!(lo < hi)) throw std::invalid_argument("lambda grid needs lo < hi");
  std::vector<double> out(static_cast<std::size_t>(points));
  double step = (hi - lo) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

LambdaSearchResult tune_lambda_grid(std::span<const PmiComponents> components, const LambdaGrid& grid,
                                    std::uint64_t seed, const EmOptions& options,
                                    std::size_t workers) {
  auto lambdas = grid.values();
  std::vector<GridPoint> points(lambdas.size());
  std::vector<std::optional<MixtureModel>> models(lambdas.size());

  parallel_for(lambdas.size(), workers, [&](std::size_t i) {
    points[i].lambda = lambdas[i];
    std::vector<double> scores;
    scores.reserve(components.size());
    for (const auto& c : components) scores.push_back(c.combine(lambdas[i]));
    try {
      auto model = fit_gmm_em(scores, seed, options);
      points[i].aic = aic(model);
      models[i] = std::move(model);
    } catch (const DataError& e) {
      points[i].failure = e.what();
    } catch (const std::invalid_argument& e) {
      points[i].failure = e.what();
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].aic) continue;
    if (!best || *points[i].aic < *points[*best].aic) best = i;
  }
  if (!best) {
    throw SearchError("lambda search: mixture fit failed at every grid point" +
                      (points.empty() ? std::string() : " (" + points.front().failure + ")"));
  }

  LambdaSearchResult result;
  result.best_lambda = lambdas[*best];
  result.grid = std::move(points);
  result.model_at_best = std::move(*models[*best]);
  for (const auto& c : components) result.scores_at_best.push_back(c.combine(result.best_lambda));
  return result;
}

}  // namespace tmine
