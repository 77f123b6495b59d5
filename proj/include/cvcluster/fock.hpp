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
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <algorithm>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cvcluster/errors.hpp"
#include "cvcluster/gaussian_state.hpp"
#include "cvcluster/random.hpp"

// Truncated number-basis simulator for up to three modes. It shares no code
// path with the Gaussian engine beyond the Vec/Mat typedefs: states are
// amplitude tensors, gates are matrix exponentials, and measurements are
// computed from quadrature wavefunctions.

namespace cvc::fock {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr std::size_t kMaxModes = 3;
inline constexpr double kLeakageCeiling = 1e-6;
inline constexpr double kDefaultWindow = 0.05;

inline std::size_t default_cutoff(std::size_t modes) {
    switch (modes) {
        case 1: return 40;
        case 2: return 18;
        default: return 10;
    }
}

/// a, q = (a + a^dag)/sqrt2, p = -i(a - a^dag)/sqrt2 and n = a^dag a at a cutoff.
struct Operators {
    CMat a, q, p, n;
};

inline Operators quadrature_operators(std::size_t cutoff) {
    const auto d = static_cast<Eigen::Index>(cutoff + 1);
    CMat a = CMat::Zero(d, d);
    for (Eigen::Index k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const CMat ad = a.adjoint();
    const double r = 1.0 / std::sqrt(2.0);
    CMat n = CMat::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
    return {a, r * (a + ad), cd(0, -r) * (a - ad), n};
}

/// Normalized Hermite functions psi_0..psi_N at x (position wavefunctions of |n>).
inline Vec hermite_functions(std::size_t cutoff, double x) {
    Vec h(static_cast<Eigen::Index>(cutoff + 1));
    h(0) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (cutoff >= 1) h(1) = std::sqrt(2.0) * x * h(0);
    for (std::size_t k = 1; k < cutoff; ++k) {
        const auto kk = static_cast<double>(k);
        h(static_cast<Eigen::Index>(k + 1)) = std::sqrt(2.0 / (kk + 1.0)) * x * h(static_cast<Eigen::Index>(k)) -
                                              std::sqrt(kk / (kk + 1.0)) * h(static_cast<Eigen::Index>(k - 1));
    }
    return h;
}

class FockState {
   public:
    /// Amplitudes in row-major order, mode 0 most significant. Normalizes.
    FockState(std::size_t modes, std::size_t cutoff, CVec amplitudes)
        : modes_(modes), cutoff_(cutoff), amps_(std::move(amplitudes)) {
        if (modes > kMaxModes) throw InvalidArgument("Fock oracle supports at most 3 modes");
        if (cutoff == 0) throw InvalidArgument("cutoff must be positive");
        if (static_cast<std::size_t>(amps_.size()) != ipow(cutoff + 1, modes)) {
            throw InvalidArgument("amplitude tensor has the wrong size");
        }
        const double nrm = amps_.norm();
        if (!(nrm > 0.0)) throw InvalidArgument("zero state");
        amps_ /= nrm;
    }

    std::size_t modes() const {
        return modes_;
    }
    std::size_t cutoff() const {
        return cutoff_;
    }
    std::size_t dim() const {
        return cutoff_ + 1;
    }
    const CVec &amplitudes() const {
        return amps_;
    }
    double norm() const {
        return amps_.norm();
    }

    /// Number of flattened entries spanned by one step in `mode`.
    std::size_t stride(std::size_t mode) const {
        return ipow(dim(), modes_ - mode - 1);
    }

    /// Photon-number distribution of one mode.
    Vec populations(std::size_t mode) const {
        check_mode(mode);
        Vec pop = Vec::Zero(static_cast<Eigen::Index>(dim()));
        const std::size_t st = stride(mode);
        for (Eigen::Index i = 0; i < amps_.size(); ++i) {
            const auto level = (static_cast<std::size_t>(i) / st) % dim();
            pop(static_cast<Eigen::Index>(level)) += std::norm(amps_(i));
        }
        return pop;
    }

    /// Largest population held in the top two levels of any mode.
    double leakage() const {
        double worst = 0.0;
        for (std::size_t m = 0; m < modes_; ++m) {
            const Vec pop = populations(m);
            double top = pop(pop.size() - 1);
            if (pop.size() >= 2) top += pop(pop.size() - 2);
            worst = std::max(worst, top);
        }
        return worst;
    }

    bool truncation_safe(double ceiling = kLeakageCeiling) const {
        return leakage() <= ceiling;
    }

    void check_mode(std::size_t mode) const {
        if (mode >= modes_) throw InvalidArgument("Fock mode index out of range");
    }

    static std::size_t ipow(std::size_t b, std::size_t e) {
        std::size_t r = 1;
        while (e--) r *= b;
        return r;
    }

   private:
    std::size_t modes_;
    std::size_t cutoff_;
    CVec amps_;
};

inline FockState number_state(std::size_t n, std::size_t cutoff) {
    if (n > cutoff) throw InvalidArgument("number state beyond cutoff");
    CVec v = CVec::Zero(static_cast<Eigen::Index>(cutoff + 1));
    v(static_cast<Eigen::Index>(n)) = 1.0;
    return FockState(1, cutoff, v);
}

inline FockState vacuum(std::size_t cutoff) {
    return number_state(0, cutoff);
}

/// Gaussian wavepacket with <p^2> = Omega^2 / 2: amplitudes on even levels
/// c_2k = (1 - t^2)^(1/4) t^k sqrt((2k)!) / (2^k k!), t = (1 - Omega^2) / (1 + Omega^2).
inline FockState squeezed_vacuum(double omega, std::size_t cutoff = default_cutoff(1)) {
    if (!(omega > 0.0)) throw InvalidArgument("squeezing width must be positive");
    const double t = (1.0 - omega * omega) / (1.0 + omega * omega);
    CVec v = CVec::Zero(static_cast<Eigen::Index>(cutoff + 1));
    double c = std::pow(1.0 - t * t, 0.25);
    for (std::size_t k = 0; 2 * k <= cutoff; ++k) {
        v(static_cast<Eigen::Index>(2 * k)) = c;
        const auto kk = static_cast<double>(k);
        c *= t * std::sqrt((2.0 * kk + 1.0) * (2.0 * kk + 2.0)) / (2.0 * (kk + 1.0));
    }
    return FockState(1, cutoff, v);
}

/// Coherent state with quadrature means (q, p), alpha = (q + i p) / sqrt2,
/// built from its displacement series.
inline FockState coherent(double q, double p, std::size_t cutoff = default_cutoff(1)) {
    const cd alpha(q / std::sqrt(2.0), p / std::sqrt(2.0));
    CVec v(static_cast<Eigen::Index>(cutoff + 1));
    cd term = std::exp(-0.5 * std::norm(alpha));
    for (std::size_t k = 0; k <= cutoff; ++k) {
        v(static_cast<Eigen::Index>(k)) = term;
        term *= alpha / std::sqrt(static_cast<double>(k + 1));
    }
    return FockState(1, cutoff, v);
}

inline FockState tensor(const FockState &a, const FockState &b) {
    if (a.cutoff() != b.cutoff()) throw InvalidArgument("tensor: cutoff mismatch");
    if (a.modes() + b.modes() > kMaxModes) throw InvalidArgument("Fock oracle supports at most 3 modes");
    const auto &x = a.amplitudes();
    const auto &y = b.amplitudes();
    CVec v(x.size() * y.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) v.segment(i * y.size(), y.size()) = x(i) * y;
    return FockState(a.modes() + b.modes(), a.cutoff(), v);
}

/// Applies a single-mode matrix to `mode` of an amplitude tensor (unnormalized).
inline CVec apply_local(const FockState &state, std::size_t mode, const CMat &op) {
    state.check_mode(mode);
    const auto d = static_cast<Eigen::Index>(state.dim());
    const auto right = static_cast<Eigen::Index>(state.stride(mode));
    const auto left = state.amplitudes().size() / (d * right);
    CVec out(state.amplitudes().size());
    using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    for (Eigen::Index l = 0; l < left; ++l) {
        Eigen::Map<const RowMat> in(state.amplitudes().data() + l * d * right, d, right);
        Eigen::Map<RowMat> dst(out.data() + l * d * right, d, right);
        dst.noalias() = op * in;
    }
    return out;
}

/// sum_n coeffs(n) <n|_mode Psi>: the unnormalized state of the other modes.
inline CVec contract_mode(const FockState &state, std::size_t mode, const CVec &coeffs) {
    state.check_mode(mode);
    const auto d = static_cast<Eigen::Index>(state.dim());
    const auto right = static_cast<Eigen::Index>(state.stride(mode));
    const auto left = state.amplitudes().size() / (d * right);
    CVec out = CVec::Zero(left * right);
    for (Eigen::Index l = 0; l < left; ++l) {
        for (Eigen::Index n = 0; n < d; ++n) {
            out.segment(l * right, right) += coeffs(n) * state.amplitudes().segment((l * d + n) * right, right);
        }
    }
    return out;
}

/// Expectation values and symmetrized covariances in the Gaussian engine's
/// block ordering (q_0..q_{m-1}, p_0..p_{m-1}).
struct Moments {
    Vec mean;
    Mat cov;
};

inline Moments moments(const FockState &state) {
    const auto ops = quadrature_operators(state.cutoff());
    const std::size_t m = state.modes();
    std::vector<CVec> applied;
    for (std::size_t k = 0; k < m; ++k) applied.push_back(apply_local(state, k, ops.q));
    for (std::size_t k = 0; k < m; ++k) applied.push_back(apply_local(state, k, ops.p));
    const auto dim = static_cast<Eigen::Index>(2 * m);
    Moments out{Vec(dim), Mat(dim, dim)};
    for (Eigen::Index i = 0; i < dim; ++i) out.mean(i) = state.amplitudes().dot(applied[i]).real();
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            out.cov(i, j) = applied[i].dot(applied[j]).real() - out.mean(i) * out.mean(j);
        }
    }
    return out;
}

/// <a|b>.
inline cd overlap(const FockState &a, const FockState &b) {
    if (a.modes() != b.modes() || a.cutoff() != b.cutoff()) throw InvalidArgument("overlap: shape mismatch");
    return a.amplitudes().dot(b.amplitudes());
}

// ---------------------------------------------------------------------------
// Gates: exp(i * parameter * H) for H a real combination of products of
// per-mode operators.

enum class LocalOp { Q, P, N };

struct Factor {
    std::size_t mode;
    LocalOp op;
    int power = 1;
};

struct Term {
    double coeff;
    std::vector<Factor> factors;  // at most one per mode, so each term is Hermitian
};

using Generator = std::vector<Term>;

inline CMat local_matrix(const Operators &ops, const Factor &f) {
    const CMat &base = f.op == LocalOp::Q ? ops.q : f.op == LocalOp::P ? ops.p : ops.n;
    CMat out = CMat::Identity(base.rows(), base.cols());
    for (int k = 0; k < f.power; ++k) out = out * base;
    return out;
}

inline CMat hermitian_exponential(const CMat &h, double parameter) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    CVec phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(cd(0, parameter * es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline void check_generator(const FockState &state, const Generator &gen) {
    if (gen.empty()) throw InvalidArgument("empty generator");
    for (const auto &term : gen) {
        if (!std::isfinite(term.coeff)) throw InvalidArgument("non-finite generator coefficient");
        for (std::size_t i = 0; i < term.factors.size(); ++i) {
            state.check_mode(term.factors[i].mode);
            if (term.factors[i].power < 1) throw InvalidArgument("generator powers must be positive");
            for (std::size_t j = 0; j < i; ++j) {
                if (term.factors[i].mode == term.factors[j].mode) {
                    throw InvalidArgument("generator term repeats a mode; combine it into one Hermitian factor");
                }
            }
        }
    }
}

/// Dense matrix of the generator on the full truncated space.
inline CMat generator_matrix(const FockState &state, const Generator &gen) {
    const auto ops = quadrature_operators(state.cutoff());
    const auto d = static_cast<Eigen::Index>(state.dim());
    const auto total = static_cast<Eigen::Index>(state.amplitudes().size());
    CMat h = CMat::Zero(total, total);
    for (const auto &term : gen) {
        CMat acc = CMat::Identity(1, 1);
        for (std::size_t m = 0; m < state.modes(); ++m) {
            CMat local = CMat::Identity(d, d);
            for (const auto &f : term.factors) {
                if (f.mode == m) local = local_matrix(ops, f);
            }
            CMat next(acc.rows() * d, acc.cols() * d);
            for (Eigen::Index i = 0; i < acc.rows(); ++i) {
                for (Eigen::Index j = 0; j < acc.cols(); ++j) next.block(i * d, j * d, d, d) = acc(i, j) * local;
            }
            acc = std::move(next);
        }
        h += term.coeff * acc;
    }
    return h;
}

/// exp(i * parameter * H) |state>.
///
/// Single-mode generators and single product terms are exponentiated in the
/// eigenbasis of their factors; anything else goes through the dense matrix.
inline FockState fock_apply(const FockState &state, const Generator &gen, double parameter) {
    check_generator(state, gen);
    const auto ops = quadrature_operators(state.cutoff());
    const auto d = static_cast<Eigen::Index>(state.dim());

    std::vector<std::size_t> touched;
    for (const auto &term : gen) {
        for (const auto &f : term.factors) {
            if (std::find(touched.begin(), touched.end(), f.mode) == touched.end()) touched.push_back(f.mode);
        }
    }

    if (touched.size() <= 1) {
        const std::size_t mode = touched.empty() ? 0 : touched[0];
        CMat h = CMat::Zero(d, d);
        for (const auto &term : gen) {
            h += term.coeff * (term.factors.empty() ? CMat::Identity(d, d) : local_matrix(ops, term.factors[0]));
        }
        return FockState(state.modes(), state.cutoff(), apply_local(state, mode, hermitian_exponential(h, parameter)));
    }

    if (gen.size() == 1) {
        const auto &term = gen[0];
        std::vector<Eigen::SelfAdjointEigenSolver<CMat>> solvers;
        FockState work = state;
        for (const auto &f : term.factors) {
            solvers.emplace_back(local_matrix(ops, f));
            work = FockState(state.modes(), state.cutoff(),
                             apply_local(work, f.mode, solvers.back().eigenvectors().adjoint()));
        }
        CVec amps = work.amplitudes();
        for (Eigen::Index i = 0; i < amps.size(); ++i) {
            double value = term.coeff;
            for (std::size_t k = 0; k < term.factors.size(); ++k) {
                const auto level = (static_cast<std::size_t>(i) / state.stride(term.factors[k].mode)) % state.dim();
                value *= solvers[k].eigenvalues()(static_cast<Eigen::Index>(level));
            }
            amps(i) *= std::exp(cd(0, parameter * value));
        }
        work = FockState(state.modes(), state.cutoff(), amps);
        for (std::size_t k = 0; k < term.factors.size(); ++k) {
            work = FockState(state.modes(), state.cutoff(),
                             apply_local(work, term.factors[k].mode, solvers[k].eigenvectors()));
        }
        return work;
    }

    const CMat u = hermitian_exponential(generator_matrix(state, gen), parameter);
    return FockState(state.modes(), state.cutoff(), u * state.amplitudes());
}

/// F = exp(i pi/4 (q^2 + p^2)).
inline Generator fourier_generator(std::size_t mode) {
    return {{0.25 * std::numbers::pi, {{mode, LocalOp::Q, 2}}}, {0.25 * std::numbers::pi, {{mode, LocalOp::P, 2}}}};
}
/// P(t) = exp(i t q^2 / 2): use with parameter t.
inline Generator shear_generator(std::size_t mode) {
    return {{0.5, {{mode, LocalOp::Q, 2}}}};
}
/// CZ_g = exp(i g q_a q_b): use with parameter g.
inline Generator cz_generator(std::size_t a, std::size_t b) {
    return {{1.0, {{a, LocalOp::Q, 1}, {b, LocalOp::Q, 1}}}};
}
/// exp(i u q^3 / 3): use with parameter u.
inline Generator cubic_generator(std::size_t mode) {
    return {{1.0 / 3.0, {{mode, LocalOp::Q, 3}}}};
}

inline FockState fourier(const FockState &s, std::size_t mode) {
    return fock_apply(s, fourier_generator(mode), 1.0);
}
inline FockState shear(const FockState &s, std::size_t mode, double t) {
    return fock_apply(s, shear_generator(mode), t);
}
inline FockState cz(const FockState &s, std::size_t a, std::size_t b, double g = 1.0) {
    return fock_apply(s, cz_generator(a, b), g);
}
inline FockState cubic(const FockState &s, std::size_t mode, double u) {
    return fock_apply(s, cubic_generator(mode), u);
}

// ---------------------------------------------------------------------------
// Continuous-outcome measurements. A basis is given by its overlap functions
// g_n(x) = <x|n>; the other modes are left in sum_n g_n(x) <n|Psi>.

using BasisFunction = std::function<CVec(double)>;

/// <x|_theta n> for r_theta = q cos(theta) + p sin(theta): e^{-i theta n} psi_n(x).
inline BasisFunction quadrature_basis(std::size_t cutoff, double theta) {
    return [cutoff, theta](double x) {
        const Vec h = hermite_functions(cutoff, x);
        CVec g(h.size());
        for (Eigen::Index n = 0; n < h.size(); ++n) g(n) = std::exp(cd(0, -theta * static_cast<double>(n))) * h(n);
        return g;
    };
}

/// <o|n> for the observable p + u q^2, whose eigenfunctions in position space
/// solve (-i d/dq + u q^2) f = o f: f_o(q) = exp(i (o q - u q^3 / 3)) / sqrt(2 pi).
/// The overlap integral is done by composite Gauss-Legendre over the region
/// where the Hermite functions live.
class NonlinearQuadratureBasis {
   public:
    NonlinearQuadratureBasis(std::size_t cutoff, double u) {
        const double half = std::sqrt(2.0 * static_cast<double>(cutoff) + 1.0) + 5.0;
        const double panel = 0.05;
        const auto panels = static_cast<std::size_t>(std::ceil(2.0 * half / panel));
        const auto nodes = gauss_nodes();
        std::vector<double> qs, ws;
        for (std::size_t k = 0; k < panels; ++k) {
            const double lo = -half + panel * static_cast<double>(k);
            for (const auto &[x, w] : nodes) {
                qs.push_back(lo + 0.5 * panel * (x + 1.0));
                ws.push_back(0.5 * panel * w);
            }
        }
        q_ = Eigen::Map<Vec>(qs.data(), static_cast<Eigen::Index>(qs.size()));
        weighted_ = CMat(static_cast<Eigen::Index>(cutoff + 1), q_.size());
        for (Eigen::Index j = 0; j < q_.size(); ++j) {
            const double qj = q_(j);
            const cd phase = std::exp(cd(0, u * qj * qj * qj / 3.0)) * (ws[static_cast<std::size_t>(j)] / std::sqrt(2.0 * std::numbers::pi));
            weighted_.col(j) = hermite_functions(cutoff, qj).cast<cd>() * phase;
        }
    }

    CVec operator()(double o) const {
        CVec kernel(q_.size());
        for (Eigen::Index j = 0; j < q_.size(); ++j) kernel(j) = std::exp(cd(0, -o * q_(j)));
        return weighted_ * kernel;
    }

    static std::vector<std::pair<double, double>> gauss_nodes() {
        using G = boost::math::quadrature::gauss<double, 8>;
        std::vector<std::pair<double, double>> out;
        const auto &x = G::abscissa();
        const auto &w = G::weights();
        for (std::size_t i = 0; i < x.size(); ++i) {
            out.emplace_back(x[i], w[i]);
            if (x[i] != 0.0) out.emplace_back(-x[i], w[i]);
        }
        return out;
    }

   private:
    Vec q_;
    CMat weighted_;
};

struct BinnedDistribution {
    std::vector<double> centers;
    std::vector<double> probabilities;
};

/// Probability of each width-`width` bin centered on multiples of `width` in [lo, hi].
inline BinnedDistribution binned_distribution(const FockState &state, std::size_t mode, const BasisFunction &basis,
                                              double lo, double hi, double width = kDefaultWindow) {
    if (!(width > 0.0) || !(hi > lo)) throw InvalidArgument("degenerate binning");
    const auto nodes = NonlinearQuadratureBasis::gauss_nodes();
    BinnedDistribution out;
    const auto first = static_cast<long>(std::floor(lo / width + 0.5));
    const auto last = static_cast<long>(std::ceil(hi / width - 0.5));
    for (long k = first; k <= last; ++k) {
        const double c = width * static_cast<double>(k);
        double prob = 0.0;
        for (const auto &[x, w] : nodes) {
            prob += 0.5 * width * w * contract_mode(state, mode, basis(c + 0.5 * width * x)).squaredNorm();
        }
        out.centers.push_back(c);
        out.probabilities.push_back(prob);
    }
    return out;
}

struct MeasurementResult {
    double outcome;
    /// Conditioned state of the other modes; zero modes if none remain.
    std::optional<FockState> state;
    double probability;
    /// Weight of the dominant component of the window-conditioned density
    /// matrix; 1 means the window left the remaining modes pure.
    double principal_weight = 1.0;
};

namespace detail {

inline std::size_t remaining_modes(const FockState &s) {
    return s.modes() - 1;
}

/// Projects onto [center - width/2, center + width/2] of a continuous basis,
/// returning the dominant pure component of the conditioned remainder.
inline MeasurementResult condition_window(const FockState &state, std::size_t mode, const BasisFunction &basis,
                                          double center, double width) {
    const auto nodes = NonlinearQuadratureBasis::gauss_nodes();
    std::vector<CVec> branches;
    double prob = 0.0;
    for (const auto &[x, w] : nodes) {
        CVec phi = contract_mode(state, mode, basis(center + 0.5 * width * x)) * std::sqrt(0.5 * width * w);
        prob += phi.squaredNorm();
        branches.push_back(std::move(phi));
    }
    MeasurementResult out{center, std::nullopt, prob, 1.0};
    if (remaining_modes(state) == 0 || prob <= 0.0) return out;
    CMat stacked(branches[0].size(), static_cast<Eigen::Index>(branches.size()));
    for (std::size_t j = 0; j < branches.size(); ++j) stacked.col(static_cast<Eigen::Index>(j)) = branches[j];
    Eigen::SelfAdjointEigenSolver<CMat> es(stacked.adjoint() * stacked);
    const Eigen::Index top = es.eigenvalues().size() - 1;
    CVec principal = stacked * es.eigenvectors().col(top);
    out.principal_weight = es.eigenvalues()(top) / es.eigenvalues().sum();
    out.state = FockState(remaining_modes(state), state.cutoff(), principal);
    return out;
}

inline std::pair<double, double> quadrature_range(const FockState &state, std::size_t mode, const CMat &observable) {
    const CVec once = apply_local(state, mode, observable);
    const double mean = state.amplitudes().dot(once).real();
    const double second = once.squaredNorm();
    const double sd = std::sqrt(std::max(second - mean * mean, 1e-6));
    return {mean - 12.0 * sd - 1.0, mean + 12.0 * sd + 1.0};
}

inline MeasurementResult measure_continuous(const FockState &state, std::size_t mode, const BasisFunction &basis,
                                            const CMat &observable, std::optional<double> pinned, Rng *rng,
                                            double width) {
    state.check_mode(mode);
    if (!(width > 0.0)) throw InvalidArgument("window width must be positive");
    if (pinned) {
        auto res = condition_window(state, mode, basis, *pinned, width);
        if (res.probability / width < 1e-12) throw InvalidArgument("pinned outcome has zero probability density");
        return res;
    }
    if (rng == nullptr) throw InvalidArgument("sampled measurement requires a random source");
    const auto [lo, hi] = quadrature_range(state, mode, observable);
    const auto dist = binned_distribution(state, mode, basis, lo, hi, width);
    double total = 0.0;
    for (double p : dist.probabilities) total += p;
    double target = rng->uniform() * total;
    std::size_t pick = 0;
    for (; pick + 1 < dist.probabilities.size(); ++pick) {
        target -= dist.probabilities[pick];
        if (target <= 0.0) break;
    }
    return condition_window(state, mode, basis, dist.centers[pick], width);
}

}  // namespace detail

/// Homodyne detection of r_theta = q cos(theta) + p sin(theta), conditioned
/// on a window of width `width` around the outcome.
inline MeasurementResult fock_homodyne(const FockState &state, std::size_t mode, double theta,
                                       std::optional<double> pinned, Rng *rng, double width = kDefaultWindow) {
    const auto ops = quadrature_operators(state.cutoff());
    const CMat observable = std::cos(theta) * ops.q + std::sin(theta) * ops.p;
    return detail::measure_continuous(state, mode, quadrature_basis(state.cutoff(), theta), observable, pinned, rng,
                                      width);
}

/// Measurement of p + u q^2, binned to `width`.
inline MeasurementResult measure_nonlinear_quadrature(const FockState &state, std::size_t mode, double u,
                                                      std::optional<double> pinned, Rng *rng,
                                                      double width = kDefaultWindow) {
    if (!state.truncation_safe()) {
        throw InvalidArgument("state is truncation-unsafe at this cutoff; the measurement basis would be unreliable");
    }
    const auto ops = quadrature_operators(state.cutoff());
    const CMat observable = ops.p + u * ops.q * ops.q;
    const NonlinearQuadratureBasis basis(state.cutoff(), u);
    return detail::measure_continuous(state, mode, std::cref(basis), observable, pinned, rng, width);
}

struct CountResult {
    std::size_t count;
    std::optional<FockState> state;
    double probability;
};

/// Projective photon-number measurement.
inline CountResult photon_count(const FockState &state, std::size_t mode, std::optional<std::size_t> pinned,
                                Rng *rng) {
    state.check_mode(mode);
    const Vec pop = state.populations(mode);
    std::size_t n;
    if (pinned) {
        if (*pinned > state.cutoff()) throw InvalidArgument("pinned photon number beyond cutoff");
        n = *pinned;
    } else {
        if (rng == nullptr) throw InvalidArgument("sampled photon count requires a random source");
        double target = rng->uniform() * pop.sum();
        n = 0;
        for (; n + 1 < static_cast<std::size_t>(pop.size()); ++n) {
            target -= pop(static_cast<Eigen::Index>(n));
            if (target <= 0.0) break;
        }
    }
    const double prob = pop(static_cast<Eigen::Index>(n));
    CountResult out{n, std::nullopt, prob};
    if (state.modes() > 1 && prob > 0.0) {
        CVec e = CVec::Zero(static_cast<Eigen::Index>(state.dim()));
        e(static_cast<Eigen::Index>(n)) = 1.0;
        out.state = FockState(state.modes() - 1, state.cutoff(), contract_mode(state, mode, e));
    }
    return out;
}

}  // namespace cvc::fock
