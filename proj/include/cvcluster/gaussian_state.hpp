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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "cvcluster/errors.hpp"

namespace cvc {

// Phase-space vectors use block ordering: (q_0 ... q_{n-1}, p_0 ... p_{n-1}).
// hbar = 1 and the vacuum has <q^2> = <p^2> = 1/2. Nothing outside this
// header indexes raw quadrature positions; use q_index / p_index / quadrature_indices.

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ModeList = std::vector<std::size_t>;

inline constexpr double kVacuumVariance = 0.5;
inline constexpr double kDefaultOmegaFloor = 1e-6;

inline Eigen::Index q_index(std::size_t mode, std::size_t /*n_modes*/) {
    return static_cast<Eigen::Index>(mode);
}
inline Eigen::Index p_index(std::size_t mode, std::size_t n_modes) {
    return static_cast<Eigen::Index>(n_modes + mode);
}

/// Positions of (q_{m_0}..q_{m_k}, p_{m_0}..p_{m_k}) inside a 2n vector.
inline std::vector<Eigen::Index> quadrature_indices(const ModeList &modes, std::size_t n_modes) {
    std::vector<Eigen::Index> idx;
    idx.reserve(2 * modes.size());
    for (auto m : modes) idx.push_back(q_index(m, n_modes));
    for (auto m : modes) idx.push_back(p_index(m, n_modes));
    return idx;
}

/// Canonical symplectic form [[0, I], [-I, 0]], so that [q_i, p_j] = i delta_ij.
inline Mat symplectic_form(std::size_t n_modes) {
    const auto n = static_cast<Eigen::Index>(n_modes);
    Mat omega = Mat::Zero(2 * n, 2 * n);
    omega.topRightCorner(n, n).setIdentity();
    omega.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return omega;
}

inline void check_mode_list(const ModeList &modes, std::size_t n_modes) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i] >= n_modes) {
            throw InvalidArgument("mode " + std::to_string(modes[i]) + " out of range for " +
                                  std::to_string(n_modes) + "-mode register");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (modes[i] == modes[j]) {
                throw InvalidArgument("mode index collision: " + std::to_string(modes[i]));
            }
        }
    }
}

/// Gaussian unitary in the Heisenberg picture: x -> S x + d.
struct SymplecticAffine {
    Mat S;
    Vec d;

    static SymplecticAffine identity(std::size_t n_modes) {
        const auto dim = static_cast<Eigen::Index>(2 * n_modes);
        return {Mat::Identity(dim, dim), Vec::Zero(dim)};
    }

    static SymplecticAffine displacement(const Vec &d) {
        return {Mat::Identity(d.size(), d.size()), d};
    }

    static SymplecticAffine linear(const Mat &S) {
        return {S, Vec::Zero(S.rows())};
    }

    std::size_t modes() const {
        return static_cast<std::size_t>(S.rows() / 2);
    }

    bool is_symplectic(double tol = 1e-10) const {
        if (S.rows() != S.cols() || S.rows() % 2 != 0 || d.size() != S.rows()) return false;
        const Mat omega = symplectic_form(modes());
        return ((S.transpose() * omega * S) - omega).cwiseAbs().maxCoeff() <= tol;
    }

    Vec apply(const Vec &x) const {
        return S * x + d;
    }

    SymplecticAffine inverse() const {
        const Mat omega = symplectic_form(modes());
        Mat inv = -omega * S.transpose() * omega;
        return {inv, -inv * d};
    }

    /// Lifts this k-mode map onto `targets` of an n-mode register.
    SymplecticAffine embedded(const ModeList &targets, std::size_t n_modes) const {
        if (targets.size() != modes()) {
            throw InvalidArgument("operation acts on " + std::to_string(modes()) + " modes but " +
                                  std::to_string(targets.size()) + " targets were given");
        }
        check_mode_list(targets, n_modes);
        auto out = identity(n_modes);
        const auto idx = quadrature_indices(targets, n_modes);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            for (std::size_t c = 0; c < idx.size(); ++c) {
                out.S(idx[r], idx[c]) = S(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
            out.d(idx[r]) = d(static_cast<Eigen::Index>(r));
        }
        return out;
    }
};

/// Operator product: (a * b) applies b first, then a.
inline SymplecticAffine operator*(const SymplecticAffine &a, const SymplecticAffine &b) {
    if (a.S.rows() != b.S.rows()) throw InvalidArgument("composing maps of different dimension");
    return {a.S * b.S, a.S * b.d + a.d};
}

class GaussianState {
   public:
    /// Validates symmetry and the uncertainty principle.
    GaussianState(Vec mean, Mat cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
        if (mean_.size() == 0 || mean_.size() % 2 != 0 || cov_.rows() != mean_.size() ||
            cov_.cols() != mean_.size()) {
            throw InvalidArgument("mean/covariance dimensions must be 2n and 2n x 2n with n >= 1");
        }
        check_physical();
    }

    /// Skips the physicality check; for results of operations that preserve it.
    static GaussianState trusted(Vec mean, Mat cov) {
        GaussianState s;
        s.mean_ = std::move(mean);
        s.cov_ = 0.5 * (cov + cov.transpose());
        return s;
    }

    std::size_t modes() const {
        return static_cast<std::size_t>(mean_.size() / 2);
    }
    const Vec &mean() const {
        return mean_;
    }
    const Mat &cov() const {
        return cov_;
    }
    double mean_q(std::size_t m) const {
        return mean_(q_index(m, modes()));
    }
    double mean_p(std::size_t m) const {
        return mean_(p_index(m, modes()));
    }

    /// Symplectic eigenvalues in ascending order (n values, each >= 1/2 if physical).
    Vec symplectic_spectrum() const {
        Eigen::SelfAdjointEigenSolver<Mat> es(cov_);
        const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        const Mat half = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
        const Eigen::MatrixXcd h =
            half.cast<std::complex<double>>() *
            (std::complex<double>(0, 1) * symplectic_form(modes()).cast<std::complex<double>>()) *
            half.cast<std::complex<double>>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(h, Eigen::EigenvaluesOnly);
        const auto n = static_cast<Eigen::Index>(modes());
        return hs.eigenvalues().tail(n);
    }

    bool is_pure(double tol = 1e-9) const {
        return ((symplectic_spectrum().array() - kVacuumVariance).abs() <= tol * scale()).all();
    }

    void check_physical() const {
        const double s = scale();
        if (!mean_.allFinite() || !cov_.allFinite()) {
            throw InvariantViolation("non-finite mean or covariance");
        }
        if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * s) {
            throw InvariantViolation("covariance is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(cov_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() <= 0.0) {
            throw InvariantViolation("covariance is not positive definite");
        }
        if (symplectic_spectrum().minCoeff() < kVacuumVariance - 1e-9 * s) {
            throw InvariantViolation("covariance violates the uncertainty principle");
        }
    }

    /// Reduced state on `keep`, in the listed order.
    GaussianState marginal(const ModeList &keep) const {
        check_mode_list(keep, modes());
        if (keep.empty()) throw InvalidArgument("marginal over an empty mode list");
        const auto idx = quadrature_indices(keep, modes());
        return trusted(mean_(idx), cov_(idx, idx));
    }

   private:
    GaussianState() = default;

    // Absolute tolerances scale with the covariance size so that heavily
    // squeezed ancillas (entries ~ 1/Omega^2) are not rejected on roundoff.
    double scale() const {
        return std::max(1.0, cov_.cwiseAbs().maxCoeff());
    }

    Vec mean_;
    Mat cov_;
};

inline GaussianState vacuum(std::size_t n_modes) {
    if (n_modes == 0) throw InvalidArgument("empty register: vacuum needs at least one mode");
    const auto dim = static_cast<Eigen::Index>(2 * n_modes);
    return GaussianState::trusted(Vec::Zero(dim), kVacuumVariance * Mat::Identity(dim, dim));
}

/// Finitely squeezed zero-momentum state: <p^2> = Omega^2 / 2, <q^2> = 1 / (2 Omega^2).
inline GaussianState squeezed_vacuum_p(double omega, double omega_floor = kDefaultOmegaFloor) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw InvalidArgument("squeezing width must be positive and finite");
    }
    if (omega < omega_floor) {
        throw InvalidArgument("squeezing width below the configured floor");
    }
    Vec mean = Vec::Zero(2);
    Mat cov = Mat::Zero(2, 2);
    cov(0, 0) = 1.0 / (2.0 * omega * omega);
    cov(1, 1) = omega * omega / 2.0;
    return GaussianState::trusted(mean, cov);
}

inline GaussianState coherent(double q, double p) {
    Vec mean(2);
    mean << q, p;
    return GaussianState::trusted(mean, kVacuumVariance * Mat::Identity(2, 2));
}

/// Single-mode thermal state with the given quadrature variance (>= 1/2).
inline GaussianState thermal(double variance) {
    if (variance < kVacuumVariance) throw InvalidArgument("thermal variance below vacuum");
    return GaussianState::trusted(Vec::Zero(2), variance * Mat::Identity(2, 2));
}

/// a (x) b, with a's modes first.
inline GaussianState tensor(const GaussianState &a, const GaussianState &b) {
    const std::size_t na = a.modes(), nb = b.modes(), n = na + nb;
    Vec mean(2 * n);
    Mat cov = Mat::Zero(2 * n, 2 * n);
    ModeList a_modes(na), b_modes(nb);
    for (std::size_t i = 0; i < na; ++i) a_modes[i] = i;
    for (std::size_t i = 0; i < nb; ++i) b_modes[i] = na + i;
    const auto ia = quadrature_indices(a_modes, n);
    const auto ib = quadrature_indices(b_modes, n);
    mean(ia) = a.mean();
    mean(ib) = b.mean();
    cov(ia, ia) = a.cov();
    cov(ib, ib) = b.cov();
    return GaussianState::trusted(mean, cov);
}

/// Applies `op` to `targets`. mean -> S mean + d, cov -> S cov S^T on the targeted block.
inline GaussianState apply_affine(const GaussianState &state, const SymplecticAffine &op,
                                  const ModeList &targets) {
    if (op.modes() != targets.size()) {
        throw InvalidArgument("operation dimension does not match the target list");
    }
    check_mode_list(targets, state.modes());
    if (!op.is_symplectic()) throw InvalidArgument("operation matrix is not symplectic");
    const auto idx = quadrature_indices(targets, state.modes());
    Vec mean = state.mean();
    Mat cov = state.cov();
    mean(idx) = op.S * mean(idx) + op.d;
    const Mat rows = op.S * cov(idx, Eigen::all);
    cov(idx, Eigen::all) = rows;
    const Mat cols = cov(Eigen::all, idx) * op.S.transpose();
    cov(Eigen::all, idx) = cols;
    return GaussianState::trusted(mean, cov);
}

/// Applies an n-mode map to the whole register.
inline GaussianState apply_affine(const GaussianState &state, const SymplecticAffine &op) {
    ModeList all(state.modes());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return apply_affine(state, op, all);
}

/// Reorders modes: result mode i is input mode order[i].
inline GaussianState permute_modes(const GaussianState &state, const ModeList &order) {
    if (order.size() != state.modes()) throw InvalidArgument("permutation size mismatch");
    return state.marginal(order);
}

}  // namespace cvc
