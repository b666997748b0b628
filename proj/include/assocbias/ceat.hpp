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

// Contextualized embedding association test: per-draw WEAT effect sizes over
// sampled sentence contexts, pooled with a random-effects model.

#include "assocbias/archive.hpp"
#include "assocbias/assoc_stats.hpp"
#include "assocbias/lexicon.hpp"
#include "assocbias/rng.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace assocbias::ceat {

// ---------------------------------------------------------------------------
// Segment lengths

enum class SegmentBin { up_to_9, from_10_to_25, from_26_to_75, over_75 };

inline constexpr std::array<SegmentBin, 4> kAllBins{SegmentBin::up_to_9, SegmentBin::from_10_to_25,
                                                    SegmentBin::from_26_to_75, SegmentBin::over_75};

/// "≤9", "10–25", "26–75", ">75".
std::string_view label(SegmentBin bin);
std::uint32_t lower_bound(SegmentBin bin);
/// Inclusive upper word count; nullopt for the open-ended bin.
std::optional<std::uint32_t> upper_bound(SegmentBin bin);

/// [1,9], [10,25], [26,75], [76,inf). Throws ValidationError for 0.
SegmentBin bin_segment(std::uint32_t word_count);

/// Accepts the labels above and the ASCII aliases le9, 10-25, 26-75, gt75.
std::optional<SegmentBin> parse_bin(std::string_view text);

// ---------------------------------------------------------------------------
// Sampling

enum class SamplingMode { fixed, random };

std::string_view to_string(SamplingMode mode);

struct SamplingPlan {
    std::uint64_t n_samples = 1000;
    SamplingMode mode = SamplingMode::fixed;
    /// Required in fixed mode. In random mode a missing seed is drawn from
    /// std::random_device and reported back in CeatResult::seed.
    std::optional<std::uint64_t> seed;
    SegmentBin bin = SegmentBin::from_10_to_25;
    unsigned threads = 1;
    int max_redraws = 100;
    double level = 0.005;
};

/// n ids from `available`: without replacement when |available| >= n,
/// otherwise with replacement. Throws NoContextsError when `available` is empty.
std::vector<std::uint64_t> sample_contexts(std::span<const std::uint64_t> available, std::size_t n,
                                           rng::Engine& engine);

struct Context {
    std::uint64_t sentence_id;
    std::uint64_t row;
};

/// Read-only index of an archive by (stimulus, segment bin). Contexts are
/// ordered by sentence id, so selections do not depend on archive row order.
class ContextStore {
public:
    explicit ContextStore(EmbeddingArchive archive);

    std::span<const Context> contexts(std::string_view stimulus, SegmentBin bin) const;
    std::span<const float> vector(std::uint64_t row) const { return archive_.row(row); }
    std::size_t dim() const noexcept { return archive_.dim; }
    const EmbeddingArchive& archive() const noexcept { return archive_; }

private:
    EmbeddingArchive archive_;
    std::map<std::string, std::array<std::vector<Context>, 4>, std::less<>> index_;
};

// ---------------------------------------------------------------------------
// Random-effects pooling

struct SampleEffect {
    double es = 0.0;     // per-draw Cohen's d
    double v_in = 0.0;   // in-sample variance: squared std dev of the draw's associations
    double w = 0.0;      // 1 / v_in
    double weight = 0.0; // 1 / (v_in + sigma2_between), filled by combined_effect
};

struct BetweenVariance {
    double sigma2;
    double q;
    double c;
};

struct CeatResult {
    double ces = 0.0;
    double se = 0.0;
    double p_two_tailed = 1.0;
    double sigma2_between = 0.0;
    double q = 0.0;
    double c = 0.0;
    std::uint64_t n = 0;
    std::vector<SampleEffect> samples;
    bool significant = false;
    Magnitude magnitude = Magnitude::negligible;
    std::uint64_t seed = 0;
};

/// Q = sum W ES^2 - (sum W ES)^2 / sum W, c = sum W - sum W^2 / sum W,
/// sigma2 = (Q - (N - 1)) / c when Q >= N - 1, else 0.
/// Throws InsufficientSamplesError for fewer than two samples and
/// ZeroVarianceError when any V_i is zero.
BetweenVariance between_variance(std::span<const SampleEffect> samples);

/// Inverse-variance weighted mean with weights 1 / (V_i + sigma2),
/// SE = sqrt(1 / sum weights), p = 2 (1 - Phi(|CES / SE|)).
CeatResult combined_effect(std::vector<SampleEffect> samples);

/// Draws per-stimulus context sequences for one category and plan, then
/// evaluates any draw index on demand. Safe to share across threads.
class CeatSampler {
public:
    CeatSampler(const Category& category, const ContextStore& store, const SamplingPlan& plan);

    /// Throws DegenerateSpreadError once max_redraws replacement draws also
    /// have zero spread.
    SampleEffect sample(std::uint64_t draw_index) const;

    std::uint64_t seed() const noexcept { return seed_; }

    /// Sentence ids chosen for `stimulus` (first draw attempt), for inspection.
    const std::vector<std::uint64_t>& draws_for(std::string_view stimulus) const;

private:
    struct Slot {
        const Stimulus* stimulus;
        std::span<const Context> contexts;
        std::vector<std::uint64_t> sequence; // context positions, one per draw index
        std::vector<std::uint64_t> sentence_ids;
    };

    SampleEffect evaluate(const std::vector<std::uint64_t>& positions) const;

    const Category& category_;
    const ContextStore& store_;
    SamplingPlan plan_;
    std::uint64_t seed_;
    std::array<std::vector<Slot>, 4> slots_;
};

SampleEffect ceat_sample(const Category& category, const ContextStore& store, std::uint64_t draw_index,
                         const SamplingPlan& plan);

/// N draws via CeatSampler, pooled via combined_effect, flagged at plan.level.
CeatResult run_ceat(const Category& category, const ContextStore& store, const SamplingPlan& plan);

} // namespace assocbias::ceat
