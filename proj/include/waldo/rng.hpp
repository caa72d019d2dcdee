/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * This file is part of waldo, a PDN tamper forensics toolkit.
 */

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace waldo {

/// SplitMix64 finalizer, used to turn (seed, index...) tuples into
/// well-separated engine seeds.
constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Hashes a master seed with stream coordinates. Streams derived from
/// distinct coordinates are independent for our purposes, which makes
/// generation order (and thread schedule) irrelevant to the output.
constexpr uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
    uint64_t h = 0x243f6a8885a308d3ULL; // pi
    for (uint64_t p : parts)
        h = splitmix64(h ^ splitmix64(p));
    return h;
}

/// Deterministic random stream. The engine is std::mt19937_64 (its output
/// sequence is fixed by the standard); all variate mappings are implemented
/// here instead of <random> distributions, whose results vary across
/// standard library implementations.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Exactly uniform integer in [0, n) via rejection sampling.
    uint64_t uniform_index(uint64_t n) {
        const uint64_t limit = n * ((~uint64_t{0}) / n);
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Fisher-Yates shuffle using uniform_index, so the permutation does not
    /// depend on the standard library's std::shuffle internals.
    template <typename T> void shuffle(std::vector<T> &v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

/// Stream keyed by (master, a, b), e.g. (dataset seed, class id, trace index).
inline Rng derive_stream(uint64_t master, uint64_t a, uint64_t b) {
    return Rng(mix_seed({master, a, b}));
}

} // namespace waldo
