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

// Dense float32 reductions used by every association score.
//
// All kernels read 32-bit inputs and accumulate in 64-bit. The scalar
// variant is the reference; vector variants may reorder the summation and
// are held to it by the equivalence tests, not bitwise.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace assocbias::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

struct KernelTable {
    Isa isa;
    double (*dot)(const float* a, const float* b, std::size_t n);
    double (*sum_squares)(const float* a, std::size_t n);
};

/// Kernel table for `isa` when this binary was built with it and the CPU supports it.
std::optional<KernelTable> kernels_for(Isa isa);

/// Best supported ISA, unless ASSOCBIAS_KERNEL names another supported one.
/// Chosen once per process.
const KernelTable& active_kernels();

/// Overrides the active table (tests, benchmarks). Returns false if unsupported.
bool force_isa(Isa isa);

inline double dot(std::span<const float> a, std::span<const float> b) {
    return active_kernels().dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const float> a) {
    return active_kernels().sum_squares(a.data(), a.size());
}

namespace detail {
double dot_scalar(const float* a, const float* b, std::size_t n);
double sum_squares_scalar(const float* a, std::size_t n);
#if defined(ASSOCBIAS_HAVE_AVX2)
double dot_avx2(const float* a, const float* b, std::size_t n);
double sum_squares_avx2(const float* a, std::size_t n);
#endif
#if defined(ASSOCBIAS_HAVE_NEON)
double dot_neon(const float* a, const float* b, std::size_t n);
double sum_squares_neon(const float* a, std::size_t n);
#endif
} // namespace detail

} // namespace assocbias::simd
