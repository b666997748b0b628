/*******************************************************************************
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
 *******************************************************************************/

#pragma once

// Keyed, platform-stable random streams.
//
// std::mt19937_64 has a fully specified output sequence; the standard
// distributions do not, so bounded draws go through uniform_below().

#include <cstdint>
#include <random>
#include <string_view>

namespace assocbias::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives a stream seed from a root seed and a sequence of key parts.
class StreamKey {
public:
    constexpr explicit StreamKey(std::uint64_t root) : state_(splitmix64(root)) {}

    constexpr StreamKey& mix(std::uint64_t part) {
        state_ = splitmix64(state_ ^ splitmix64(part + 0x632be59bd9b4e019ULL));
        return *this;
    }
    constexpr StreamKey& mix(std::string_view part) {
        // length first so ("ab","c") and ("a","bc") differ
        mix(static_cast<std::uint64_t>(part.size()));
        return mix(fnv1a(part));
    }

    constexpr std::uint64_t value() const { return state_; }
    Engine engine() const { return Engine(state_); }

private:
    std::uint64_t state_;
};

/// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    __extension__ using u128 = unsigned __int128;
    std::uint64_t x = eng();
    u128 m = static_cast<u128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = eng();
            m = static_cast<u128>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

} // namespace assocbias::rng
