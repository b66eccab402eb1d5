#include "meshpose/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "meshpose/errors.hpp"

namespace meshpose {

namespace {

void check_logits(const CalibratedLogits& logits) {
  if (logits.z.size() < 2)
    throw ValidationError("logits need K >= 2 entries, got " +
                          std::to_string(logits.z.size()));
  for (double v : logits.z)
    if (!std::isfinite(v)) throw ValidationError("non-finite logit");
  if (!std::isfinite(logits.alpha) || logits.alpha < 0.0)
    throw ValidationError("alpha must be finite and >= 0");
}

void check_prediction(const GaussianPrediction& pred,
                      std::span<const double> truth) {
  if (pred.y_hat.empty())
    throw ValidationError("prediction needs D >= 1 outputs");
  if (pred.sigma.size() != pred.y_hat.size())
    throw ValidationError("sigma and y_hat length mismatch");
  if (truth.size() != pred.y_hat.size())
    throw ValidationError("truth has " + std::to_string(truth.size()) +
                          " entries, prediction has " +
                          std::to_string(pred.y_hat.size()));
  if (!(pred.sigma_min > 0.0) || !std::isfinite(pred.sigma_min))
    throw ValidationError("sigma_min must be finite and > 0");
  for (double v : pred.y_hat)
    if (!std::isfinite(v)) throw ValidationError("non-finite prediction");
  for (double v : truth)
    if (!std::isfinite(v)) throw ValidationError("non-finite truth value");
  for (double s : pred.sigma) {
    if (!std::isfinite(s)) throw ValidationError("non-finite sigma");
    if (s < pred.sigma_min)
      throw ValidationError("sigma below sigma_min on input");
  }
}

}  // namespace

std::vector<double> scaled_softmax(const CalibratedLogits& logits) {
  check_logits(logits);
  const std::size_t k = logits.z.size();

  double max_scaled = -std::numeric_limits<double>::infinity();
  for (double v : logits.z) max_scaled = std::max(max_scaled, logits.alpha * v);

  std::vector<double> p(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = std::exp(logits.alpha * logits.z[i] - max_scaled);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

CrossEntropyResult calibrated_ce(const CalibratedLogits& logits, int label) {
  check_logits(logits);
  const int k = static_cast<int>(logits.z.size());
  if (label < 1 || label > k)
    throw ValidationError("label " + std::to_string(label) + " outside 1.." +
                          std::to_string(k));
  const std::size_t y = static_cast<std::size_t>(label - 1);

  double max_scaled = -std::numeric_limits<double>::infinity();
  for (double v : logits.z) max_scaled = std::max(max_scaled, logits.alpha * v);
  double sum = 0.0;
  for (double v : logits.z) sum += std::exp(logits.alpha * v - max_scaled);

  CrossEntropyResult result;
  // loss = logsumexp(alpha z) - alpha z_y
  result.loss = max_scaled + std::log(sum) - logits.alpha * logits.z[y];

  result.grad_z.resize(logits.z.size());
  result.grad_alpha = 0.0;
  for (std::size_t i = 0; i < logits.z.size(); ++i) {
    const double p = std::exp(logits.alpha * logits.z[i] - max_scaled) / sum;
    const double residual = p - (i == y ? 1.0 : 0.0);
    result.grad_z[i] = logits.alpha * residual;
    result.grad_alpha += logits.z[i] * residual;
  }
  return result;
}

GaussianNllResult gaussian_nll(const GaussianPrediction& pred,
                               std::span<const double> truth) {
  check_prediction(pred, truth);
  const std::size_t d = pred.y_hat.size();

  GaussianNllResult result;
  result.loss = 0.5 * static_cast<double>(d) * std::log(2.0 * M_PI);
  result.grad_y_hat.resize(d);
  result.grad_sigma.resize(d);

  for (std::size_t i = 0; i < d; ++i) {
    const double error = pred.y_hat[i] - truth[i];
    const double sigma = pred.sigma[i];
    const double ratio = error / sigma;
    result.loss += 0.5 * (std::log(sigma * sigma) + ratio * ratio);
    result.grad_y_hat[i] = error / (sigma * sigma);
    double grad = 1.0 / sigma - (error * error) / (sigma * sigma * sigma);
    // projection at the clamp: no gradient may push sigma below the floor
    if (sigma == pred.sigma_min && grad > 0.0) grad = 0.0;
    result.grad_sigma[i] = grad;
  }
  return result;
}

double positive_reparam(double raw, double floor) {
  if (!std::isfinite(raw)) throw ValidationError("non-finite reparam input");
  if (floor < 0.0 || !std::isfinite(floor))
    throw ValidationError("reparam floor must be finite and >= 0");
  const double softplus =
      raw > 0.0 ? raw + std::log1p(std::exp(-raw)) : std::log1p(std::exp(raw));
  return std::max(softplus, floor);
}

}  // namespace meshpose
