#include "meshpose/calibration_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "meshpose/calibration.hpp"

namespace meshpose {

namespace {

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

std::string format(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

CalibrationCheck make(const std::string& name, bool pass, double worst) {
  return {name, pass, "worst " + format(worst)};
}

}  // namespace

std::vector<CalibrationCheck> run_calibration_checks(int instances,
                                                     std::uint64_t seed,
                                                     double sigma_min) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_k(2, 10);
  std::uniform_real_distribution<double> logit(-4.0, 4.0);
  std::uniform_real_distribution<double> alpha_dist(0.1, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = 1e-6;

  std::vector<CalibrationCheck> checks;

  // softmax sums to 1 and is shift invariant
  {
    double worst_sum = 0.0, worst_shift = 0.0;
    for (int t = 0; t < instances; ++t) {
      CalibratedLogits lg;
      const int k = pick_k(rng);
      for (int i = 0; i < k; ++i) lg.z.push_back(logit(rng));
      lg.alpha = alpha_dist(rng);
      const auto p = scaled_softmax(lg);
      double sum = 0.0;
      for (double v : p) sum += v;
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

      CalibratedLogits shifted = lg;
      const double c = logit(rng);
      for (double& z : shifted.z) z += c;
      const auto q = scaled_softmax(shifted);
      for (int i = 0; i < k; ++i)
        worst_shift = std::max(worst_shift, std::abs(p[i] - q[i]));
    }
    checks.push_back(make("softmax normalization", worst_sum <= 1e-12, worst_sum));
    checks.push_back(make("softmax shift invariance", worst_shift <= 1e-12,
                          worst_shift));
  }

  // alpha = 0 flattens to uniform
  {
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
      CalibratedLogits lg;
      const int k = pick_k(rng);
      for (int i = 0; i < k; ++i) lg.z.push_back(logit(rng));
      lg.alpha = 0.0;
      const auto p = scaled_softmax(lg);
      for (double v : p) worst = std::max(worst, std::abs(v - 1.0 / k));
    }
    checks.push_back(make("alpha=0 uniformity", worst <= 1e-12, worst));
  }

  // entropy non-increasing in alpha, argmax invariant
  {
    bool entropy_ok = true, argmax_ok = true;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      CalibratedLogits lg;
      const int k = pick_k(rng);
      for (int i = 0; i < k; ++i) lg.z.push_back(logit(rng));
      const auto ref_argmax =
          std::max_element(lg.z.begin(), lg.z.end()) - lg.z.begin();
      double previous = std::numeric_limits<double>::infinity();
      for (int step = 0; step < 100; ++step) {
        lg.alpha = 10.0 * step / 99.0;
        const auto p = scaled_softmax(lg);
        const double current = entropy(p);
        if (current > previous + 1e-12) {
          entropy_ok = false;
          worst = std::max(worst, current - previous);
        }
        previous = current;
        if (lg.alpha > 0.0 &&
            std::max_element(p.begin(), p.end()) - p.begin() != ref_argmax)
          argmax_ok = false;
      }
    }
    checks.push_back(make("entropy non-increasing in alpha", entropy_ok, worst));
    checks.push_back({"argmax invariance", argmax_ok, argmax_ok ? "ok" : "violated"});
  }

  // cross-entropy gradients vs central differences
  {
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
      CalibratedLogits lg;
      const int k = pick_k(rng);
      for (int i = 0; i < k; ++i) lg.z.push_back(logit(rng));
      lg.alpha = alpha_dist(rng);
      const int label = 1 + static_cast<int>(unit(rng) * k) % k;

      const auto result = calibrated_ce(lg, label);
      for (int i = 0; i < k; ++i) {
        CalibratedLogits hi = lg, lo = lg;
        hi.z[i] += h;
        lo.z[i] -= h;
        const double fd =
            (calibrated_ce(hi, label).loss - calibrated_ce(lo, label).loss) /
            (2 * h);
        worst = std::max(worst, rel_error(result.grad_z[i], fd));
      }
      CalibratedLogits hi = lg, lo = lg;
      hi.alpha += h;
      lo.alpha -= h;
      const double fd =
          (calibrated_ce(hi, label).loss - calibrated_ce(lo, label).loss) /
          (2 * h);
      worst = std::max(worst, rel_error(result.grad_alpha, fd));
    }
    checks.push_back(make("cross-entropy gradients", worst <= 1e-6, worst));
  }

  // gaussian nll gradients vs central differences, away from the clamp
  {
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
      const std::size_t d = 1 + static_cast<std::size_t>(unit(rng) * 4);
      GaussianPrediction pred;
      pred.sigma_min = sigma_min;
      std::vector<double> truth(d);
      for (std::size_t i = 0; i < d; ++i) {
        truth[i] = logit(rng);
        pred.y_hat.push_back(truth[i] + (unit(rng) * 2.0 - 1.0) * 2.0);
        pred.sigma.push_back(sigma_min + 0.05 + unit(rng) * 2.0);
      }
      const auto result = gaussian_nll(pred, truth);
      for (std::size_t i = 0; i < d; ++i) {
        GaussianPrediction hi = pred, lo = pred;
        hi.y_hat[i] += h;
        lo.y_hat[i] -= h;
        double fd = (gaussian_nll(hi, truth).loss - gaussian_nll(lo, truth).loss) /
                    (2 * h);
        worst = std::max(worst, rel_error(result.grad_y_hat[i], fd));

        hi = pred;
        lo = pred;
        hi.sigma[i] += h;
        lo.sigma[i] -= h;
        fd = (gaussian_nll(hi, truth).loss - gaussian_nll(lo, truth).loss) /
             (2 * h);
        worst = std::max(worst, rel_error(result.grad_sigma[i], fd));
      }
    }
    checks.push_back(make("gaussian nll gradients", worst <= 1e-6, worst));
  }

  // grid search over sigma lands at |error|
  {
    const int grid = 10000;
    const double step = (10.0 - sigma_min) / (grid - 1);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const double error = sigma_min + unit(rng) * (9.0 - sigma_min);
      double best_loss = std::numeric_limits<double>::infinity();
      double best_sigma = sigma_min;
      for (int i = 0; i < grid; ++i) {
        const double sigma = sigma_min + i * step;
        GaussianPrediction pred{{error}, {sigma}, sigma_min};
        const double loss = gaussian_nll(pred, std::vector<double>{0.0}).loss;
        if (loss < best_loss) {
          best_loss = loss;
          best_sigma = sigma;
        }
      }
      worst = std::max(worst, std::abs(best_sigma - error));
    }
    checks.push_back(make("sigma minimizer at |error|", worst <= (10.0 - sigma_min) / (grid - 1) + 1e-12,
                          worst));
  }

  // clamp projection: at sigma == sigma_min with zero error the raw gradient
  // points below the floor and must be projected out
  {
    GaussianPrediction pred{{0.0}, {sigma_min}, sigma_min};
    const auto at_clamp = gaussian_nll(pred, std::vector<double>{0.0});
    const bool projected = at_clamp.grad_sigma[0] == 0.0;
    GaussianPrediction off{{1.0}, {sigma_min}, sigma_min};
    const auto outward = gaussian_nll(off, std::vector<double>{0.0});
    const bool kept = outward.grad_sigma[0] < 0.0;
    checks.push_back({"clamp gradient projection", projected && kept,
                      projected && kept ? "ok" : "violated"});
  }

  return checks;
}

}  // namespace meshpose
