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

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace cvc {

/// Pseudorandom source injected into every sampling operation.
///
/// Independent trajectories get independent substreams derived from the
/// master seed, so trials can run in any order (or concurrently) and still
/// replay bit-identically.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) {
        reseed({seed});
    }

    /// Substream keyed by (seed, keys...). Same keys, same stream.
    static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
        Rng r(0);
        std::vector<std::uint64_t> all{seed};
        all.insert(all.end(), keys.begin(), keys.end());
        r.reseed(all);
        return r;
    }

    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    std::mt19937_64 &engine() {
        return engine_;
    }

   private:
    void reseed(const std::vector<std::uint64_t> &words) {
        std::vector<std::uint32_t> halves;
        halves.reserve(words.size() * 2);
        for (auto w : words) {
            halves.push_back(static_cast<std::uint32_t>(w));
            halves.push_back(static_cast<std::uint32_t>(w >> 32));
        }
        std::seed_seq seq(halves.begin(), halves.end());
        engine_.seed(seq);
    }

    std::mt19937_64 engine_;
};

}  // namespace cvc
