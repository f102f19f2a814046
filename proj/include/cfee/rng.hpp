// Copyright 2026 The cfee Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

#include "cfee/types.hpp"

namespace cfee {

using Rng = std::mt19937_64;

/// Independent streams keyed by (seed, domain, index). Geometry draws and each
/// Monte-Carlo trial use their own domain/index so results never depend on
/// evaluation order.
enum class StreamDomain : std::uint32_t { geometry = 1, monte_carlo = 2, test = 3 };

inline Rng make_stream(std::uint64_t seed, StreamDomain domain, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

/// Standard circularly-symmetric complex Gaussian vector, CN(0, I).
inline CVector standard_complex_gaussian(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        v(i) = Complex(re, im);
    }
    return v;
}

}  // namespace cfee
