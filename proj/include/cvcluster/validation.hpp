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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "cvcluster/fock.hpp"
#include "cvcluster/gates.hpp"
#include "cvcluster/gaussian_state.hpp"
#include "cvcluster/mbqc.hpp"
#include "cvcluster/phase_space.hpp"

// Regression scenarios run through both engines: the Gaussian
// covariance-matrix engine and the truncated number-basis oracle.

namespace cvc {

struct ValidationCase {
    std::string name;
    std::size_t cutoff = 0;
    double mean_error = 0.0;        // max |mean_gauss - mean_fock|
    double cov_error = 0.0;         // max |cov_gauss - cov_fock|
    double fidelity_error = 0.0;    // |F_gauss(out, ref) - |<ref|out>|_fock|
    double leakage = 0.0;
    double tolerance = 1e-3;
    bool passed() const {
        return mean_error <= tolerance && cov_error <= tolerance && fidelity_error <= tolerance;
    }
};

struct ValidationReport {
    std::vector<ValidationCase> cases;
    bool passed() const {
        return std::all_of(cases.begin(), cases.end(), [](const ValidationCase &c) { return c.passed(); });
    }
};

namespace detail {

inline ValidationCase compare(const std::string &name, const GaussianState &g, const fock::FockState &f,
                              const GaussianState &g_ref, const fock::FockState &f_ref, double tolerance) {
    const auto m = fock::moments(f);
    ValidationCase c;
    c.name = name;
    c.cutoff = f.cutoff();
    c.mean_error = (g.mean() - m.mean).cwiseAbs().maxCoeff();
    c.cov_error = (g.cov() - m.cov).cwiseAbs().maxCoeff();
    c.fidelity_error = std::abs(fidelity(g, g_ref) - std::abs(fock::overlap(f_ref, f)));
    c.leakage = f.leakage();
    c.tolerance = tolerance;
    return c;
}

inline fock::FockState fock_vacuum(std::size_t modes, std::size_t cutoff) {
    fock::FockState v = fock::vacuum(cutoff);
    fock::FockState out = v;
    for (std::size_t m = 1; m < modes; ++m) out = fock::tensor(out, v);
    return out;
}

}  // namespace detail

/// Runs the regression scenarios. `cutoff_scale` multiplies the default
/// cutoffs (2 for the convergence check).
inline ValidationReport run_validation(std::size_t cutoff_scale = 1, double tolerance = 1e-3) {
    const std::size_t n1 = fock::default_cutoff(1) * cutoff_scale;
    const std::size_t n2 = fock::default_cutoff(2) * cutoff_scale;
    ValidationReport report;
    const auto g_vac1 = vacuum(1), g_vac2 = vacuum(2);
    const auto f_vac1 = detail::fock_vacuum(1, n1), f_vac2 = detail::fock_vacuum(2, n2);

    for (double omega : {0.5, 0.8}) {
        report.cases.push_back(detail::compare("squeezed omega=" + std::to_string(omega).substr(0, 3),
                                               squeezed_vacuum_p(omega), fock::squeezed_vacuum(omega, n1), g_vac1,
                                               f_vac1, tolerance));
    }

    {
        const auto g_in = apply_affine(squeezed_vacuum_p(0.8), gates::x_shift(0.4));
        const auto f_in = fock::fock_apply(fock::squeezed_vacuum(0.8, n1),
                                           {{1.0, {{0, fock::LocalOp::P, 1}}}}, -0.4);
        report.cases.push_back(detail::compare("F on displaced squeezed", apply_affine(g_in, gates::fourier()),
                                               fock::fourier(f_in, 0), g_vac1, f_vac1, tolerance));
        report.cases.push_back(detail::compare("P(0.7) on displaced squeezed", apply_affine(g_in, gates::shear(0.7)),
                                               fock::shear(f_in, 0, 0.7), g_vac1, f_vac1, tolerance));
    }

    {
        const auto g_in = tensor(squeezed_vacuum_p(0.8), coherent(0.3, -0.2));
        const auto f_in = fock::tensor(fock::squeezed_vacuum(0.8, n2), fock::coherent(0.3, -0.2, n2));
        report.cases.push_back(detail::compare("CZ on squeezed x coherent", apply_affine(g_in, gates::cz()),
                                               fock::cz(f_in, 0, 1), g_vac2, f_vac2, tolerance));
    }

    {
        // One wire step with s pinned to 0: coherent input on mode 0,
        // squeezed ancilla on mode 1, CZ, then p measured on mode 0.
        const double omega = 0.5;
        const auto g_in = coherent(0.3, 0.2);
        const auto g = teleport_step(g_in, 0, omega, DiagonalGate::identity(), 0.0, nullptr);
        const auto f_joined = fock::cz(
            fock::tensor(fock::coherent(0.3, 0.2, n2), fock::squeezed_vacuum(omega, n2)), 0, 1);
        const auto f = fock::fock_homodyne(f_joined, 0, std::numbers::pi / 2.0, 0.0, nullptr);
        report.cases.push_back(detail::compare("pinned homodyne teleport", g.state, *f.state, g_vac1,
                                               detail::fock_vacuum(1, n2), tolerance));
    }
    return report;
}

}  // namespace cvc
