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
#include <utility>
#include <vector>

#include "cvcluster/errors.hpp"
#include "cvcluster/gaussian_state.hpp"

namespace cvc {

/// Root fidelity F = Tr sqrt(sqrt(rho) sigma sqrt(rho)), so pure states give |<a|b>|.
///
/// Exact for any pair of single-mode states. For n > 1 at least one argument
/// must be pure, in which case F^2 = Tr(rho sigma).
inline double fidelity(const GaussianState &a, const GaussianState &b) {
    if (a.modes() != b.modes()) throw InvalidArgument("fidelity: mode-count mismatch");
    const Mat sum = a.cov() + b.cov();
    const Vec delta = a.mean() - b.mean();
    const double gauss = std::exp(-0.5 * delta.dot(sum.ldlt().solve(delta)));
    const double det_sum = sum.determinant();

    if (a.modes() == 1) {
        const double big = det_sum;
        const double small =
            std::max(0.0, 4.0 * (a.cov().determinant() - 0.25) * (b.cov().determinant() - 0.25));
        const double f2 = gauss / (std::sqrt(big + small) - std::sqrt(small));
        return std::clamp(std::sqrt(f2), 0.0, 1.0);
    }
    if (!a.is_pure() && !b.is_pure()) {
        throw Unsupported("fidelity between two mixed multi-mode states is not implemented");
    }
    const double overlap = gauss / std::sqrt(det_sum);
    return std::clamp(std::sqrt(overlap), 0.0, 1.0);
}

/// Wigner function of a single-mode state, normalized to unit phase-space integral.
inline std::vector<double> wigner(const GaussianState &state,
                                  const std::vector<std::pair<double, double>> &points) {
    if (state.modes() != 1) {
        throw InvalidArgument("wigner: single-mode states only (take a marginal first)");
    }
    const Mat inv = state.cov().inverse();
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(state.cov().determinant()));
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto &[q, p] : points) {
        const double dq = q - state.mean()(0);
        const double dp = p - state.mean()(1);
        const double quad = inv(0, 0) * dq * dq + 2.0 * inv(0, 1) * dq * dp + inv(1, 1) * dp * dp;
        out.push_back(norm * std::exp(-0.5 * quad));
    }
    return out;
}

/// Square grid over [lo, hi]^2 with `points_per_axis` samples per axis, q-major.
inline std::vector<std::pair<double, double>> phase_space_grid(double lo, double hi,
                                                               std::size_t points_per_axis) {
    if (points_per_axis < 2 || !(hi > lo)) throw InvalidArgument("degenerate phase-space grid");
    std::vector<std::pair<double, double>> grid;
    grid.reserve(points_per_axis * points_per_axis);
    const double step = (hi - lo) / static_cast<double>(points_per_axis - 1);
    for (std::size_t i = 0; i < points_per_axis; ++i) {
        for (std::size_t j = 0; j < points_per_axis; ++j) {
            grid.emplace_back(lo + step * static_cast<double>(i), lo + step * static_cast<double>(j));
        }
    }
    return grid;
}

}  // namespace cvc
