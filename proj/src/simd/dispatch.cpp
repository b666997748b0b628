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

#include <atomic>
#include <cstdlib>

namespace assocbias::simd {

std::string_view to_string(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    if (name == "neon") return Isa::neon;
    return std::nullopt;
}

namespace {

bool cpu_has_avx2() {
#if defined(ASSOCBIAS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable kScalar{Isa::scalar, &detail::dot_scalar, &detail::sum_squares_scalar};
#if defined(ASSOCBIAS_HAVE_AVX2)
const KernelTable kAvx2{Isa::avx2, &detail::dot_avx2, &detail::sum_squares_avx2};
#endif
#if defined(ASSOCBIAS_HAVE_NEON)
const KernelTable kNeon{Isa::neon, &detail::dot_neon, &detail::sum_squares_neon};
#endif

const KernelTable* table_for(Isa isa) {
    switch (isa) {
    case Isa::scalar: return &kScalar;
    case Isa::avx2:
#if defined(ASSOCBIAS_HAVE_AVX2)
        if (cpu_has_avx2()) return &kAvx2;
#endif
        return nullptr;
    case Isa::neon:
#if defined(ASSOCBIAS_HAVE_NEON)
        return &kNeon;
#else
        return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable* select_default() {
    if (const char* env = std::getenv("ASSOCBIAS_KERNEL")) {
        if (auto isa = parse_isa(env)) {
            if (const KernelTable* t = table_for(*isa)) return t;
        }
    }
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (const KernelTable* t = table_for(isa)) return t;
    }
    return &kScalar;
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{select_default()};
    return slot;
}

} // namespace

std::optional<KernelTable> kernels_for(Isa isa) {
    if (const KernelTable* t = table_for(isa)) return *t;
    return std::nullopt;
}

const KernelTable& active_kernels() {
    return *active_slot().load(std::memory_order_acquire);
}

bool force_isa(Isa isa) {
    const KernelTable* t = table_for(isa);
    if (!t) return false;
    active_slot().store(t, std::memory_order_release);
    return true;
}

} // namespace assocbias::simd
