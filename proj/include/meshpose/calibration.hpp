#pragma once

#include <span>
#include <vector>

#include "meshpose/defaults.hpp"

namespace meshpose {

// Score vector with a learned inverse temperature. alpha scales the scores
// before the softmax: small alpha flattens the posterior toward uniform.
struct CalibratedLogits {
  std::vector<double> z;  // K >= 2, finite
  double alpha = 1.0;     // >= 0
};

// posterior_k = exp(alpha z_k) / sum_j exp(alpha z_j), computed with
// max-subtraction so any finite input is safe. Entries sum to 1.
std::vector<double> scaled_softmax(const CalibratedLogits& logits);

struct CrossEntropyResult {
  double loss = 0.0;
  std::vector<double> grad_z;
  double grad_alpha = 0.0;
};

// loss = -log posterior[label] with analytic gradients
//   d/dz_k   = alpha (p_k - [k == label])
//   d/dalpha = sum_k z_k (p_k - [k == label]).
// `label` is 1-based in 1..K.
CrossEntropyResult calibrated_ce(const CalibratedLogits& logits, int label);

// Regression output with a per-component predicted error scale. sigma must
// already satisfy sigma_i >= sigma_min on input.
struct GaussianPrediction {
  std::vector<double> y_hat;
  std::vector<double> sigma;
  double sigma_min = defaults::sigma_min;
};

struct GaussianNllResult {
  double loss = 0.0;
  std::vector<double> grad_y_hat;
  std::vector<double> grad_sigma;
};

// loss = D/2 log(2 pi) + 1/2 sum_i (log sigma_i^2 + (y_hat_i - y_i)^2 / sigma_i^2)
// with analytic gradients
//   d/dy_hat_i = (y_hat_i - y_i) / sigma_i^2
//   d/dsigma_i = 1/sigma_i - (y_hat_i - y_i)^2 / sigma_i^3.
// At an active clamp (sigma_i == sigma_min) a gradient that would push sigma
// below the floor is projected to zero.
GaussianNllResult gaussian_nll(const GaussianPrediction& pred,
                               std::span<const double> truth);

// Overflow-safe softplus log(1 + exp(raw)), raised to `floor` when below it.
// floor = 0 gives the plain positivity reparameterization; pass sigma_min
// when producing a sigma.
double positive_reparam(double raw, double floor = 0.0);

}  // namespace meshpose
