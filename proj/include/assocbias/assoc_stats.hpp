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

// Cosine association scores, the WEAT/SEAT effect size (Cohen's d) and the
// partition permutation test.
//
// For target sets X, Y and attribute sets A, B:
//   s(w, A, B) = mean_a cos(w, a) - mean_b cos(w, b)
//   d = (mean_x s(x) - mean_y s(y)) / std_dev_{w in X u Y} s(w)
// Positive d means X is more associated with A than Y is.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace assocbias {

using VectorSet = std::vector<std::span<const float>>;

/// Denominator of d: population (divide by n) or sample (n - 1) standard deviation.
enum class Spread { population, sample };

enum class Magnitude { negligible, small, medium, large };
enum class PermutationMode { exhaustive, monte_carlo };

std::string_view to_string(Magnitude m);
std::string_view to_string(PermutationMode m);

struct PermutationOptions {
    std::uint64_t max_exhaustive = 200'000;
    std::uint64_t n_samples = 10'000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    Spread spread = Spread::population;
};

struct PermutationResult {
    double p_value;
    PermutationMode mode;
    std::uint64_t n;
};

struct EffectSizeResult {
    double d;
    double p_value;
    std::uint64_t n_permutations;
    PermutationMode permutation_mode;
    Magnitude magnitude;
};

/// dot(u, v) / (|u| |v|) with 64-bit accumulation, clamped to [-1, 1].
double cosine(std::span<const float> u, std::span<const float> v);

double association(std::span<const float> w, const VectorSet& a, const VectorSet& b);

/// s(w, A, B) for every w, reusing attribute norms across rows.
std::vector<double> associations(const VectorSet& w, const VectorSet& a, const VectorSet& b);

/// Mean and standard deviation of `values`; throws EmptySetError on empty input.
double mean(std::span<const double> values);
double std_dev(std::span<const double> values, Spread spread = Spread::population);

/// Cohen's d from precomputed per-target scores. Throws DegenerateSpreadError
/// when the pooled scores have no spread.
double effect_size_from_scores(std::span<const double> x_scores, std::span<const double> y_scores,
                               Spread spread = Spread::population);

double effect_size(const VectorSet& x, const VectorSet& y, const VectorSet& a, const VectorSet& b,
                   Spread spread = Spread::population);

/// One-sided partition test on precomputed scores: the fraction of
/// reassignments of X u Y into sizes |X|, |Y| whose d is at least the observed
/// one. Exhaustive when the partition count is at most max_exhaustive
/// (exact proportion); otherwise n_samples seeded draws with add-one smoothing.
PermutationResult permutation_p_from_scores(std::span<const double> x_scores,
                                            std::span<const double> y_scores,
                                            const PermutationOptions& options = {});

PermutationResult permutation_p(const VectorSet& x, const VectorSet& y, const VectorSet& a,
                                const VectorSet& b, const PermutationOptions& options = {});

/// |d| >= 0.8 large, >= 0.5 medium, >= 0.2 small, else negligible.
Magnitude classify_magnitude(double d);

EffectSizeResult weat_from_scores(std::span<const double> x_scores, std::span<const double> y_scores,
                                  const PermutationOptions& options = {});

EffectSizeResult weat(const VectorSet& x, const VectorSet& y, const VectorSet& a, const VectorSet& b,
                      const PermutationOptions& options = {});

/// Sentence vectors per stimulus, one vector per instantiated template.
struct SeatGroups {
    std::vector<VectorSet> x;
    std::vector<VectorSet> y;
    std::vector<VectorSet> a;
    std::vector<VectorSet> b;
};

/// WEAT over sentence vectors: every template instance is one member of its role's set.
EffectSizeResult seat_effect_size(const SeatGroups& groups, const PermutationOptions& options = {});

/// Number of ways to choose k of n, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

} // namespace assocbias
