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

#include "assocbias/simd/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace assocbias::simd;

namespace {

std::vector<float> random_floats(std::mt19937_64& g, std::size_t n, double scale) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(d(g));
    return v;
}

// reordered summation bound: n * eps * sum|terms|
double bound(const std::vector<float>& a, const std::vector<float>& b) {
    double mag = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mag += std::fabs(static_cast<double>(a[i]) * b[i]);
    return 4.0 * static_cast<double>(a.size() + 1) * 2.220446049250313e-16 * mag + 1e-300;
}

} // namespace

TEST_CASE("isa names round trip") {
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        CHECK(parse_isa(to_string(isa)) == isa);
    }
    CHECK_FALSE(parse_isa("sse9").has_value());
}

TEST_CASE("scalar kernels are always available") {
    auto k = kernels_for(Isa::scalar);
    REQUIRE(k.has_value());
    const float a[] = {1, 2, 3};
    const float b[] = {4, 5, 6};
    CHECK(k->dot(a, b, 3) == 32.0);
    CHECK(k->sum_squares(a, 3) == 14.0);
    CHECK(k->dot(a, b, 0) == 0.0);
}

TEST_CASE("every compiled variant matches the scalar reference") {
    const auto ref = *kernels_for(Isa::scalar);
    std::mt19937_64 g(7);
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        auto k = kernels_for(isa);
        if (!k) continue;
        CAPTURE(to_string(isa));
        for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 31u, 33u, 64u, 100u, 768u, 1024u, 1031u}) {
            for (double scale : {1e-3, 1.0, 1e4}) {
                auto a = random_floats(g, n, scale);
                auto b = random_floats(g, n, scale);
                CAPTURE(n);
                CHECK(std::fabs(k->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= bound(a, b));
                CHECK(std::fabs(k->sum_squares(a.data(), n) - ref.sum_squares(a.data(), n)) <= bound(a, a));
            }
        }
    }
}

TEST_CASE("variants agree on unaligned views") {
    const auto ref = *kernels_for(Isa::scalar);
    std::mt19937_64 g(11);
    auto buf_a = random_floats(g, 300, 1.0);
    auto buf_b = random_floats(g, 300, 1.0);
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        auto k = kernels_for(isa);
        if (!k) continue;
        for (std::size_t off = 0; off < 8; ++off) {
            const float* a = buf_a.data() + off;
            const float* b = buf_b.data() + (7 - off);
            const std::size_t n = 250;
            CHECK(k->dot(a, b, n) == doctest::Approx(ref.dot(a, b, n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("accumulation is 64-bit") {
    // 1 + 2^-30 is not representable after float accumulation
    std::vector<float> a(1 << 12, 1.0f);
    a[0] = 1.0f;
    std::vector<float> b(a.size(), 1.0f);
    b[1] = 0x1.0p-30f;
    a[1] = 1.0f;
    const double expected = static_cast<double>(a.size() - 1) + 0x1.0p-30;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (auto k = kernels_for(isa)) CHECK(k->dot(a.data(), b.data(), a.size()) == expected);
    }
}

TEST_CASE("force_isa switches the active table") {
    const Isa before = active_kernels().isa;
    REQUIRE(force_isa(Isa::scalar));
    CHECK(active_kernels().isa == Isa::scalar);
    const float a[] = {3, 4};
    CHECK(sum_squares(a) == 25.0);
    CHECK(force_isa(before));
}
