/* Copyright (c) 2026 The tabad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "tabad/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tabad/rng.hpp"

namespace tabad {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kVarianceFloor = 1e-12;

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

// log(w_k) + log N(x | mean_k, var_k) for every component; -inf for w_k = 0.
void component_log_terms(const GmmColumnModel& m, double x, double* out) {
  for (std::size_t k = 0; k < m.components(); ++k) {
    out[k] = m.weights[k] > 0.0 ? std::log(m.weights[k]) + log_normal(x, m.means[k], m.variances[k])
                                : -std::numeric_limits<double>::infinity();
  }
}

double log_sum_exp(const double* v, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

void require_fitted(const GmmColumnModel& m) {
  if (!m.fitted()) throw std::logic_error("gaussian mixture model is not fitted");
}

Vector seed_means_kmeanspp(std::span<const double> x, std::size_t k, Rng& rng) {
  Vector centers;
  centers.reserve(k);
  centers.push_back(x[rng.below(x.size())]);
  std::vector<double> d2(x.size());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (x[i] - c) * (x[i] - c));
      d2[i] = best;
      total += best;
    }
    double target = rng.uniform() * total;
    std::size_t pick = x.size() - 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      if (target < d2[i]) {
        pick = i;
        break;
      }
      target -= d2[i];
    }
    // Rounding can walk off the end onto a duplicate; take the farthest point.
    if (d2[pick] <= 0.0) pick = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    centers.push_back(x[pick]);
  }
  return centers;
}

}  // namespace

double GmmColumnModel::log_density(double x) const {
  require_fitted(*this);
  std::vector<double> terms(components());
  component_log_terms(*this, x, terms.data());
  return log_sum_exp(terms.data(), terms.size());
}

Vector GmmColumnModel::responsibilities(double x) const {
  require_fitted(*this);
  Vector r(components());
  component_log_terms(*this, x, r.data());
  const double lse = log_sum_exp(r.data(), r.size());
  for (double& v : r) v = std::exp(v - lse);
  return r;
}

std::size_t GmmColumnModel::responsible_mode(double x) const {
  require_fitted(*this);
  std::vector<double> terms(components());
  component_log_terms(*this, x, terms.data());
  std::size_t best = 0;
  for (std::size_t k = 1; k < terms.size(); ++k) {
    if (terms[k] > terms[best]) best = k;
  }
  return best;
}

std::size_t count_distinct(std::span<const double> column) {
  std::vector<double> v(column.begin(), column.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

GmmFit fit_gmm_em(std::span<const double> x, const GmmFitOptions& options) {
  const std::size_t m = options.components;
  if (m == 0) throw std::invalid_argument("fit_gmm_em: component count must be at least 1");
  if (x.size() < m) {
    throw std::invalid_argument("fit_gmm_em: " + std::to_string(x.size()) +
                                " values cannot support " + std::to_string(m) + " components");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw NonFiniteError("fit_gmm_em: non-finite input value");
  }
  const std::size_t distinct = count_distinct(x);
  if (m > distinct) {
    throw std::invalid_argument("fit_gmm_em: " + std::to_string(m) + " components but only " +
                                std::to_string(distinct) + " distinct values");
  }

  const double n = static_cast<double>(x.size());
  double global_mean = 0.0;
  for (double v : x) global_mean += v;
  global_mean /= n;
  double global_var = 0.0;
  for (double v : x) global_var += (v - global_mean) * (v - global_mean);
  global_var /= n;
  const double var_floor = std::max(global_var * 1e-10, kVarianceFloor);

  Rng rng(options.seed);
  GmmFit fit;
  GmmColumnModel& model = fit.model;
  model.means = seed_means_kmeanspp(x, m, rng);
  model.weights.assign(m, 1.0 / static_cast<double>(m));
  model.variances.assign(m, std::max(global_var, var_floor));

  std::vector<double> resp(x.size() * m);
  std::vector<double> nk(m), sum_x(m), sum_sq(m);
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    // E-step.
    double ll = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double* r = &resp[i * m];
      component_log_terms(model, x[i], r);
      const double lse = log_sum_exp(r, m);
      ll += lse;
      for (std::size_t k = 0; k < m; ++k) r[k] = std::exp(r[k] - lse);
    }
    ll /= n;
    fit.log_likelihood.push_back(ll);
    fit.iterations = iter + 1;
    if (iter > 0 && ll - fit.log_likelihood[iter - 1] < options.tol) {
      fit.converged = true;
      break;
    }

    // M-step.
    std::fill(nk.begin(), nk.end(), 0.0);
    std::fill(sum_x.begin(), sum_x.end(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        nk[k] += resp[i * m + k];
        sum_x[k] += resp[i * m + k] * x[i];
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (nk[k] > 0.0) model.means[k] = sum_x[k] / nk[k];
    }
    std::fill(sum_sq.begin(), sum_sq.end(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        const double d = x[i] - model.means[k];
        sum_sq[k] += resp[i * m + k] * d * d;
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      model.weights[k] = nk[k] / n;
      if (nk[k] > 0.0) model.variances[k] = std::max(sum_sq[k] / nk[k], var_floor);
    }
  }

  // Prune light components and renormalise the survivors.
  GmmColumnModel kept;
  const std::size_t heaviest = static_cast<std::size_t>(
      std::max_element(model.weights.begin(), model.weights.end()) - model.weights.begin());
  for (std::size_t k = 0; k < m; ++k) {
    if (model.weights[k] >= options.weight_floor || k == heaviest) {
      kept.weights.push_back(model.weights[k]);
      kept.means.push_back(model.means[k]);
      kept.variances.push_back(model.variances[k]);
    }
  }
  fit.pruned = m - kept.components();
  if (fit.pruned > 0) {
    double total = 0.0;
    for (double w : kept.weights) total += w;
    for (double& w : kept.weights) w /= total;
    model = std::move(kept);
  }
  return fit;
}

GmmFit fit_gmm_bic(std::span<const double> x, const GmmFitOptions& options) {
  const std::size_t cap = std::min(options.components, count_distinct(x));
  if (cap == 0) throw std::invalid_argument("fit_gmm_bic: empty column");
  const double n = static_cast<double>(x.size());
  GmmFit best;
  double best_bic = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= cap; ++m) {
    GmmFitOptions opt = options;
    opt.components = m;
    opt.seed = derive_seed(options.seed, m);
    GmmFit fit = fit_gmm_em(x, opt);
    // Parameters: m means, m variances, m - 1 free weights.
    double ll = 0.0;
    for (double v : x) ll += fit.model.log_density(v);
    const double bic = -2.0 * ll + static_cast<double>(3 * m - 1) * std::log(n);
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(fit);
    }
  }
  return best;
}

Vector ModeEncodedValue::indicator() const {
  Vector v(modes, 0.0);
  v.at(mode) = 1.0;
  return v;
}

ModeEncodedValue mode_normalize(double x, const GmmColumnModel& model) {
  require_fitted(model);
  if (!std::isfinite(x)) throw NonFiniteError("mode_normalize: non-finite value");
  ModeEncodedValue e;
  e.modes = model.components();
  e.mode = model.responsible_mode(x);
  const double sd = std::sqrt(model.variances[e.mode]);
  e.scalar = std::clamp((x - model.means[e.mode]) / (kModeScaleSigmas * sd), -1.0, 1.0);
  return e;
}

double mode_denormalize(const ModeEncodedValue& encoded, const GmmColumnModel& model) {
  require_fitted(model);
  if (encoded.modes != model.components() || encoded.mode >= model.components()) {
    throw std::invalid_argument("mode_denormalize: mode " + std::to_string(encoded.mode) +
                                " outside a " + std::to_string(model.components()) +
                                "-component model");
  }
  const double sd = std::sqrt(model.variances[encoded.mode]);
  return encoded.scalar * kModeScaleSigmas * sd + model.means[encoded.mode];
}

double mode_denormalize(std::span<const double> indicator, double scalar,
                        const GmmColumnModel& model) {
  require_fitted(model);
  if (indicator.size() != model.components()) {
    throw std::invalid_argument("mode_denormalize: indicator width " +
                                std::to_string(indicator.size()) + " does not match " +
                                std::to_string(model.components()) + " components");
  }
  std::size_t ones = 0, mode = 0;
  for (std::size_t k = 0; k < indicator.size(); ++k) {
    if (indicator[k] == 1.0) {
      ++ones;
      mode = k;
    } else if (indicator[k] != 0.0) {
      throw std::invalid_argument("mode_denormalize: indicator is not one-hot");
    }
  }
  if (ones != 1) throw std::invalid_argument("mode_denormalize: indicator is not one-hot");
  return mode_denormalize(ModeEncodedValue{mode, indicator.size(), scalar}, model);
}

}  // namespace tabad
