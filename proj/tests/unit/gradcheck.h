#pragma once

// Central finite differences against backward(). Only forward() and
// cross_entropy() are used to build the numeric side.

#include <algorithm>
#include <cmath>

#include "credscan/classifier.h"

namespace oracle {

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps gradients
// that are zero up to rounding from dominating.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Loss of one sample with dropout masks replayed from a copy of `rng_state`.
inline double sample_loss(const credscan::MlpParams& p, const std::vector<double>& x, std::size_t label,
                          const credscan::Rng& rng_state) {
  credscan::Rng rng = rng_state;
  const auto cache = credscan::forward(x, p, credscan::Mode::kTrain, &rng);
  return credscan::cross_entropy(credscan::softmax(cache.logits), label);
}

// Random weights and biases in [-1, 1]. Nonzero biases keep every unit off
// the ReLU kink at exactly 0, where a layer of dead units would otherwise
// leave the next pre-activation sitting.
inline credscan::MlpParams random_params(const credscan::MlpArchitecture& arch, credscan::Rng& rng) {
  auto p = credscan::MlpParams::zeros(arch);
  p.for_each_tensor([&](std::vector<double>& t, bool) {
    for (double& v : t) v = credscan::uniform_real(rng, -1.0, 1.0);
  });
  return p;
}

inline GradCheck check_gradients(const credscan::MlpParams& params, const std::vector<double>& x, std::size_t label,
                                 const credscan::Rng& rng_state, double h = 1e-5) {
  credscan::Rng rng = rng_state;
  const auto cache = credscan::forward(x, params, credscan::Mode::kTrain, &rng);
  const auto grads = credscan::backward(cache, label, params);

  std::vector<const std::vector<double>*> analytic;
  grads.for_each_tensor([&](const std::vector<double>& t, bool) { analytic.push_back(&t); });

  GradCheck out;
  credscan::MlpParams probe = params;
  std::size_t tensor = 0;
  probe.for_each_tensor([&](std::vector<double>& t, bool) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double up = sample_loss(probe, x, label, rng_state);
      t[i] = saved - h;
      const double down = sample_loss(probe, x, label, rng_state);
      t[i] = saved;
      const double numeric = (up - down) / (2 * h);
      out.max_relative_error = std::max(out.max_relative_error, relative_error((*analytic[tensor])[i], numeric));
      ++out.parameters;
    }
    ++tensor;
  });
  return out;
}

}  // namespace oracle
