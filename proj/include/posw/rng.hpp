// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <random>

#include "posw/common.hpp"

namespace posw {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates nearby seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream for one Monte Carlo trial. Depends only on
// (master, index), so trials can be evaluated in any order.
inline Rng trial_stream(std::uint64_t master, std::uint64_t index, std::uint64_t salt = 0)
{
    return Rng(mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL * (salt + 1))));
}

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline Complex complex_gaussian(Rng& rng, double variance = 1.0)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

} // namespace posw
