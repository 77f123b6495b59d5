// Copyright 2026 The cvcluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "cvcluster/errors.hpp"
#include "cvcluster/gaussian_state.hpp"
#include "cvcluster/random.hpp"

namespace cvc {

inline constexpr double kMarginalFloor = 1e-12;

/// Distribution of r_theta = q cos(theta) + p sin(theta) on one mode.
struct QuadratureMarginal {
    double mean;
    double variance;

    double log_density(double x) const {
        const double z = x - mean;
        return -0.5 * z * z / variance - 0.5 * std::log(2.0 * std::numbers::pi * variance);
    }
    double density(double x) const {
        return std::exp(log_density(x));
    }
};

inline Vec quadrature_form(std::size_t mode, double theta, std::size_t n_modes) {
    Vec l = Vec::Zero(static_cast<Eigen::Index>(2 * n_modes));
    l(q_index(mode, n_modes)) = std::cos(theta);
    l(p_index(mode, n_modes)) = std::sin(theta);
    return l;
}

inline QuadratureMarginal quadrature_marginal(const GaussianState &state, std::size_t mode,
                                              double theta) {
    check_mode_list({mode}, state.modes());
    const Vec l = quadrature_form(mode, theta, state.modes());
    return {l.dot(state.mean()), l.dot(state.cov() * l)};
}

struct HomodyneResult {
    double outcome;
    /// Remaining modes in their original relative order; empty if the
    /// measured mode was the only one.
    std::optional<GaussianState> state;
    /// remaining[i] is the pre-measurement index of result mode i.
    ModeList remaining;
    double log_likelihood;
};

/// Measures r_theta on `mode` and conditions the rest of the register.
///
/// With `pinned` set the outcome is imposed; otherwise it is drawn from the
/// exact marginal using `rng`. Both paths share the conditioning below.
inline HomodyneResult homodyne(const GaussianState &state, std::size_t mode, double theta,
                               std::optional<double> pinned, Rng *rng,
                               double marginal_floor = kMarginalFloor) {
    const std::size_t n = state.modes();
    check_mode_list({mode}, n);
    const Vec l = quadrature_form(mode, theta, n);
    const Vec cov_l = state.cov() * l;
    const double mu = l.dot(state.mean());
    const double var = l.dot(cov_l);
    if (!(var >= marginal_floor)) {
        throw IllConditioned("homodyne marginal variance " + std::to_string(var) +
                             " below conditioning floor");
    }

    double outcome;
    if (pinned) {
        outcome = *pinned;
    } else {
        if (rng == nullptr) throw InvalidArgument("sampled homodyne requires a random source");
        outcome = rng->normal(mu, std::sqrt(var));
    }

    HomodyneResult result{outcome, std::nullopt, {}, QuadratureMarginal{mu, var}.log_density(outcome)};
    for (std::size_t m = 0; m < n; ++m) {
        if (m != mode) result.remaining.push_back(m);
    }
    if (result.remaining.empty()) return result;

    const auto idx = quadrature_indices(result.remaining, n);
    const Vec gain = cov_l(idx) / var;
    Vec mean = state.mean()(idx) + gain * (outcome - mu);
    Mat cov = state.cov()(idx, idx) - gain * cov_l(idx).transpose();
    result.state = GaussianState::trusted(std::move(mean), std::move(cov));
    return result;
}

}  // namespace cvc
