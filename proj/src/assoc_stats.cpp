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

#include "assocbias/assoc_stats.hpp"

#include "assocbias/error.hpp"
#include "assocbias/parallel.hpp"
#include "assocbias/rng.hpp"
#include "assocbias/simd/kernels.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>

namespace assocbias {

std::string_view to_string(Magnitude m) {
    switch (m) {
    case Magnitude::negligible: return "negligible";
    case Magnitude::small: return "small";
    case Magnitude::medium: return "medium";
    case Magnitude::large: return "large";
    }
    return "unknown";
}

std::string_view to_string(PermutationMode m) {
    return m == PermutationMode::exhaustive ? "exhaustive" : "monte_carlo";
}

namespace {

double checked_norm(std::span<const float> v) {
    const double n = std::sqrt(simd::sum_squares(v));
    if (n == 0.0) throw ZeroNormError("cosine of a zero-norm vector");
    return n;
}

double clamp_unit(double c) {
    return std::clamp(c, -1.0, 1.0);
}

std::vector<double> norms_of(const VectorSet& set, std::size_t dim) {
    std::vector<double> out;
    out.reserve(set.size());
    for (const auto& v : set) {
        if (v.size() != dim) throw DimMismatchError("vector dimensions differ");
        out.push_back(checked_norm(v));
    }
    return out;
}

// Association of one row against prepared attribute sets.
double association_prepared(std::span<const float> w, double w_norm, const VectorSet& a,
                            std::span<const double> a_norms, const VectorSet& b,
                            std::span<const double> b_norms) {
    double sa = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += clamp_unit(simd::dot(w, a[i]) / (w_norm * a_norms[i]));
    }
    double sb = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        sb += clamp_unit(simd::dot(w, b[i]) / (w_norm * b_norms[i]));
    }
    return sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size());
}

void require_nonempty(const VectorSet& s, const char* name) {
    if (s.empty()) throw EmptySetError(std::string("set ") + name + " is empty");
}

} // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) throw DimMismatchError("cosine of vectors with different dimensions");
    const double nu = checked_norm(u);
    const double nv = checked_norm(v);
    return clamp_unit(simd::dot(u, v) / (nu * nv));
}

double association(std::span<const float> w, const VectorSet& a, const VectorSet& b) {
    require_nonempty(a, "A");
    require_nonempty(b, "B");
    const auto an = norms_of(a, w.size());
    const auto bn = norms_of(b, w.size());
    return association_prepared(w, checked_norm(w), a, an, b, bn);
}

std::vector<double> associations(const VectorSet& w, const VectorSet& a, const VectorSet& b) {
    require_nonempty(a, "A");
    require_nonempty(b, "B");
    if (w.empty()) return {};
    const std::size_t dim = a.front().size();
    const auto an = norms_of(a, dim);
    const auto bn = norms_of(b, dim);
    std::vector<double> out;
    out.reserve(w.size());
    for (const auto& row : w) {
        if (row.size() != dim) throw DimMismatchError("vector dimensions differ");
        out.push_back(association_prepared(row, checked_norm(row), a, an, b, bn));
    }
    return out;
}

double mean(std::span<const double> values) {
    if (values.empty()) throw EmptySetError("mean of an empty set");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double std_dev(std::span<const double> values, Spread spread) {
    if (values.empty()) throw EmptySetError("standard deviation of an empty set");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    const double denom = spread == Spread::population ? static_cast<double>(values.size())
                                                      : static_cast<double>(values.size()) - 1.0;
    if (denom <= 0.0) throw DegenerateSpreadError("sample standard deviation needs at least two values");
    return std::sqrt(ss / denom);
}

namespace {

// Sum that does not depend on element order and negates exactly with its input.
double symmetric_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end(), [](double l, double r) { return std::abs(l) < std::abs(r); });
    double pos = 0.0, neg = 0.0;
    for (double v : values) (v < 0.0 ? neg : pos) += v;
    return pos + neg;
}

// Pooled spread of x u y; rejects zero (or rounding-level) spread.
double pooled_spread(std::span<const double> x, std::span<const double> y, Spread spread) {
    std::vector<double> all(x.begin(), x.end());
    all.insert(all.end(), y.begin(), y.end());
    const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
    const double n = static_cast<double>(all.size());
    const double m = symmetric_sum(all) / n;
    std::vector<double> squares;
    squares.reserve(all.size());
    for (double v : all) squares.push_back((v - m) * (v - m));
    const double denom = spread == Spread::population ? n : n - 1.0;
    if (denom <= 0.0) throw DegenerateSpreadError("sample standard deviation needs at least two values");
    const double sd = std::sqrt(symmetric_sum(std::move(squares)) / denom);
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    if (*lo == *hi || !(sd > 1e-13 * scale)) {
        throw DegenerateSpreadError("associations over X u Y have zero spread");
    }
    return sd;
}

} // namespace

double effect_size_from_scores(std::span<const double> x_scores, std::span<const double> y_scores,
                               Spread spread) {
    if (x_scores.empty() || y_scores.empty()) throw EmptySetError("target set is empty");
    for (double v : x_scores) if (!std::isfinite(v)) throw NonFiniteError("non-finite association score");
    for (double v : y_scores) if (!std::isfinite(v)) throw NonFiniteError("non-finite association score");
    const double sd = pooled_spread(x_scores, y_scores, spread);
    return (mean(x_scores) - mean(y_scores)) / sd;
}

double effect_size(const VectorSet& x, const VectorSet& y, const VectorSet& a, const VectorSet& b,
                   Spread spread) {
    require_nonempty(x, "X");
    require_nonempty(y, "Y");
    return effect_size_from_scores(associations(x, a, b), associations(y, a, b), spread);
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    __extension__ unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

PermutationResult permutation_p_from_scores(std::span<const double> x_scores,
                                            std::span<const double> y_scores,
                                            const PermutationOptions& options) {
    // Validates inputs and rejects zero spread, exactly as the observed d would.
    (void)effect_size_from_scores(x_scores, y_scores, options.spread);

    // With the pooled multiset fixed, d is strictly increasing in the X-side
    // sum, so partitions are ranked by that sum.
    std::vector<double> pooled(x_scores.begin(), x_scores.end());
    pooled.insert(pooled.end(), y_scores.begin(), y_scores.end());
    const std::size_t n = pooled.size();
    const std::size_t k = x_scores.size();

    double observed = 0.0;
    double magnitude = 0.0;
    for (double v : x_scores) observed += v;
    for (double v : pooled) magnitude += std::abs(v);
    const double tol = 4.0 * static_cast<double>(n) * DBL_EPSILON * magnitude;
    const double threshold = observed - tol;

    const std::uint64_t total = binomial(n, k);
    if (total <= options.max_exhaustive) {
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::uint64_t hits = 0;
        std::uint64_t seen = 0;
        while (true) {
            double s = 0.0;
            for (std::size_t i : idx) s += pooled[i];
            if (s >= threshold) ++hits;
            ++seen;
            // next k-combination in lexicographic order
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
        return {static_cast<double>(hits) / static_cast<double>(seen), PermutationMode::exhaustive, seen};
    }

    if (options.n_samples == 0) throw ValidationError("Monte-Carlo permutation test needs n_samples > 0");
    constexpr std::uint64_t kChunk = 1024;
    const std::uint64_t chunks = (options.n_samples + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> chunk_hits(chunks, 0);
    parallel_for(chunks, options.threads, [&](std::size_t c) {
        auto eng = rng::StreamKey(options.seed).mix("permutation").mix(c).engine();
        std::vector<std::size_t> perm(n);
        const std::uint64_t begin = c * kChunk;
        const std::uint64_t end = std::min(options.n_samples, begin + kChunk);
        std::uint64_t hits = 0;
        for (std::uint64_t draw = begin; draw < end; ++draw) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + rng::uniform_below(eng, n - i);
                std::swap(perm[i], perm[j]);
                s += pooled[perm[i]];
            }
            if (s >= threshold) ++hits;
        }
        chunk_hits[c] = hits;
    });
    const std::uint64_t hits = std::accumulate(chunk_hits.begin(), chunk_hits.end(), std::uint64_t{0});
    return {static_cast<double>(hits + 1) / static_cast<double>(options.n_samples + 1),
            PermutationMode::monte_carlo, options.n_samples};
}

PermutationResult permutation_p(const VectorSet& x, const VectorSet& y, const VectorSet& a,
                                const VectorSet& b, const PermutationOptions& options) {
    require_nonempty(x, "X");
    require_nonempty(y, "Y");
    return permutation_p_from_scores(associations(x, a, b), associations(y, a, b), options);
}

Magnitude classify_magnitude(double d) {
    if (!std::isfinite(d)) throw NonFiniteError("effect size is not finite");
    const double m = std::abs(d);
    if (m >= 0.8) return Magnitude::large;
    if (m >= 0.5) return Magnitude::medium;
    if (m >= 0.2) return Magnitude::small;
    return Magnitude::negligible;
}

EffectSizeResult weat_from_scores(std::span<const double> x_scores, std::span<const double> y_scores,
                                  const PermutationOptions& options) {
    const double d = effect_size_from_scores(x_scores, y_scores, options.spread);
    const PermutationResult p = permutation_p_from_scores(x_scores, y_scores, options);
    return {d, p.p_value, p.n, p.mode, classify_magnitude(d)};
}

EffectSizeResult weat(const VectorSet& x, const VectorSet& y, const VectorSet& a, const VectorSet& b,
                      const PermutationOptions& options) {
    require_nonempty(x, "X");
    require_nonempty(y, "Y");
    return weat_from_scores(associations(x, a, b), associations(y, a, b), options);
}

namespace {

VectorSet flatten(const std::vector<VectorSet>& per_stimulus) {
    VectorSet out;
    for (const auto& s : per_stimulus) out.insert(out.end(), s.begin(), s.end());
    return out;
}

} // namespace

EffectSizeResult seat_effect_size(const SeatGroups& groups, const PermutationOptions& options) {
    return weat(flatten(groups.x), flatten(groups.y), flatten(groups.a), flatten(groups.b), options);
}

} // namespace assocbias
