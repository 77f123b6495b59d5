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
#include <string>
#include <vector>

#include "cvcluster/gaussian_state.hpp"

// Heisenberg actions of the named gates. Each function returns the map
// x -> S x + d applied to state means (and S V S^T to covariances).
//
//   X(s) = exp(-i s p)           q -> q + s
//   Z(t) = exp(i t q)            p -> p + t
//   F    = exp(i pi/4 (q^2+p^2)) q -> -p, p -> q     (so F|s>_q = |s>_p)
//   P(t) = exp(i t q^2 / 2)      p -> p + t q
//   CZ_g = exp(i g q1 q2)        p1 -> p1 + g q2, p2 -> p2 + g q1
//   CX   = exp(-i q1 p2)         q2 -> q2 + q1,  p1 -> p1 - p2

namespace cvc::gates {

inline SymplecticAffine x_shift(double s) {
    Vec d(2);
    d << s, 0.0;
    return SymplecticAffine::displacement(d);
}

inline SymplecticAffine z_shift(double t) {
    Vec d(2);
    d << 0.0, t;
    return SymplecticAffine::displacement(d);
}

inline SymplecticAffine fourier() {
    Mat S(2, 2);
    S << 0.0, -1.0, 1.0, 0.0;
    return SymplecticAffine::linear(S);
}

inline SymplecticAffine fourier_dagger() {
    Mat S(2, 2);
    S << 0.0, 1.0, -1.0, 0.0;
    return SymplecticAffine::linear(S);
}

/// Phase rotation exp(-i phi n): q -> q cos(phi) + p sin(phi), p -> p cos(phi) - q sin(phi).
inline SymplecticAffine rotation(double phi) {
    Mat S(2, 2);
    S << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
    return SymplecticAffine::linear(S);
}

inline SymplecticAffine shear(double t) {
    Mat S(2, 2);
    S << 1.0, 0.0, t, 1.0;
    return SymplecticAffine::linear(S);
}

inline SymplecticAffine cz(double g = 1.0) {
    Mat S = Mat::Identity(4, 4);
    // order (q1, q2, p1, p2)
    S(2, 1) = g;
    S(3, 0) = g;
    return SymplecticAffine::linear(S);
}

inline SymplecticAffine cx() {
    Mat S = Mat::Identity(4, 4);
    S(1, 0) = 1.0;
    S(2, 3) = -1.0;
    return SymplecticAffine::linear(S);
}

struct NamedGate {
    std::string name;
    SymplecticAffine op;
};

/// Every gate in the catalog at the given parameters.
inline std::vector<NamedGate> catalog(double s = 1.0, double t = 1.0, double g = 1.0) {
    return {
        {"X", x_shift(s)},  {"Z", z_shift(t)},     {"F", fourier()},
        {"Fdag", fourier_dagger()}, {"P", shear(t)}, {"CZ", cz(g)},
        {"CX", cx()},
    };
}

}  // namespace cvc::gates
