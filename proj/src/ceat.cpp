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

#include "assocbias/ceat.hpp"

#include "assocbias/error.hpp"
#include "assocbias/normal_cdf.hpp"
#include "assocbias/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace assocbias::ceat {

std::string_view label(SegmentBin bin) {
    switch (bin) {
    case SegmentBin::up_to_9: return "≤9";
    case SegmentBin::from_10_to_25: return "10–25";
    case SegmentBin::from_26_to_75: return "26–75";
    case SegmentBin::over_75: return ">75";
    }
    return "?";
}

std::uint32_t lower_bound(SegmentBin bin) {
    switch (bin) {
    case SegmentBin::up_to_9: return 1;
    case SegmentBin::from_10_to_25: return 10;
    case SegmentBin::from_26_to_75: return 26;
    case SegmentBin::over_75: return 76;
    }
    return 1;
}

std::optional<std::uint32_t> upper_bound(SegmentBin bin) {
    switch (bin) {
    case SegmentBin::up_to_9: return 9;
    case SegmentBin::from_10_to_25: return 25;
    case SegmentBin::from_26_to_75: return 75;
    case SegmentBin::over_75: return std::nullopt;
    }
    return std::nullopt;
}

SegmentBin bin_segment(std::uint32_t word_count) {
    if (word_count == 0) throw ValidationError("segment length must be at least one word");
    if (word_count <= 9) return SegmentBin::up_to_9;
    if (word_count <= 25) return SegmentBin::from_10_to_25;
    if (word_count <= 75) return SegmentBin::from_26_to_75;
    return SegmentBin::over_75;
}

std::optional<SegmentBin> parse_bin(std::string_view text) {
    for (SegmentBin b : kAllBins) {
        if (text == label(b)) return b;
    }
    if (text == "le9" || text == "<=9") return SegmentBin::up_to_9;
    if (text == "10-25") return SegmentBin::from_10_to_25;
    if (text == "26-75") return SegmentBin::from_26_to_75;
    if (text == "gt75") return SegmentBin::over_75;
    return std::nullopt;
}

std::string_view to_string(SamplingMode mode) {
    return mode == SamplingMode::fixed ? "f" : "r";
}

std::vector<std::uint64_t> sample_contexts(std::span<const std::uint64_t> available, std::size_t n,
                                           rng::Engine& engine) {
    if (available.empty()) throw NoContextsError("no contexts available to sample from");
    std::vector<std::uint64_t> out;
    out.reserve(n);
    if (available.size() >= n) {
        std::vector<std::uint64_t> pool(available.begin(), available.end());
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + rng::uniform_below(engine, pool.size() - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(available[rng::uniform_below(engine, available.size())]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

ContextStore::ContextStore(EmbeddingArchive archive) : archive_(std::move(archive)) {
    for (const auto& r : archive_.records) {
        auto& bins = index_[r.stimulus];
        bins[static_cast<std::size_t>(bin_segment(r.word_count))].push_back({r.sentence_id, r.row});
    }
    for (auto& [stimulus, bins] : index_) {
        for (std::size_t b = 0; b < bins.size(); ++b) {
            auto& list = bins[b];
            std::sort(list.begin(), list.end(), [](const Context& l, const Context& r) {
                return l.sentence_id < r.sentence_id;
            });
            auto dup = std::adjacent_find(list.begin(), list.end(), [](const Context& l, const Context& r) {
                return l.sentence_id == r.sentence_id;
            });
            if (dup != list.end()) {
                throw ValidationError("archive holds sentence " + std::to_string(dup->sentence_id) +
                                      " twice for stimulus '" + stimulus + "'");
            }
        }
    }
}

std::span<const Context> ContextStore::contexts(std::string_view stimulus, SegmentBin bin) const {
    auto it = index_.find(stimulus);
    if (it == index_.end()) return {};
    return it->second[static_cast<std::size_t>(bin)];
}

// ---------------------------------------------------------------------------

BetweenVariance between_variance(std::span<const SampleEffect> samples) {
    if (samples.size() < 2) {
        throw InsufficientSamplesError("between-sample variance needs at least two samples");
    }
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    double sum_wes = 0.0;
    double sum_wes2 = 0.0;
    for (const auto& s : samples) {
        if (!(s.v_in > 0.0)) throw ZeroVarianceError("sample has zero in-sample variance");
        const double w = 1.0 / s.v_in;
        sum_w += w;
        sum_w2 += w * w;
        sum_wes += w * s.es;
        sum_wes2 += w * s.es * s.es;
    }
    const double c = sum_w - sum_w2 / sum_w;
    const double q = sum_wes2 - sum_wes * sum_wes / sum_w;
    const double df = static_cast<double>(samples.size() - 1);
    const double sigma2 = q >= df ? (q - df) / c : 0.0;
    return {std::max(0.0, sigma2), q, c};
}

CeatResult combined_effect(std::vector<SampleEffect> samples) {
    const BetweenVariance bv = between_variance(samples);
    double sum_v = 0.0;
    double sum_ves = 0.0;
    double lo = samples.front().es;
    double hi = lo;
    for (auto& s : samples) {
        s.w = 1.0 / s.v_in;
        s.weight = 1.0 / (s.v_in + bv.sigma2);
        sum_v += s.weight;
        sum_ves += s.weight * s.es;
        lo = std::min(lo, s.es);
        hi = std::max(hi, s.es);
    }
    CeatResult r;
    // a weighted mean lies within the sample range; clamp away rounding
    r.ces = std::clamp(sum_ves / sum_v, lo, hi);
    r.se = std::sqrt(1.0 / sum_v);
    r.p_two_tailed = two_tailed_p(r.ces / r.se);
    r.sigma2_between = bv.sigma2;
    r.q = bv.q;
    r.c = bv.c;
    r.n = samples.size();
    r.samples = std::move(samples);
    r.magnitude = classify_magnitude(r.ces);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t resolve_seed(const SamplingPlan& plan) {
    if (plan.seed) return *plan.seed;
    if (plan.mode == SamplingMode::fixed) {
        throw ValidationError("fixed sampling mode requires an explicit seed");
    }
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

} // namespace

CeatSampler::CeatSampler(const Category& category, const ContextStore& store, const SamplingPlan& plan)
    : category_(category), store_(store), plan_(plan), seed_(resolve_seed(plan)) {
    if (plan.n_samples == 0) throw ValidationError("sampling plan needs n_samples > 0");
    for (Role role : kAllRoles) {
        const auto& members = category.set(role);
        if (members.empty()) throw EmptySetError("category " + category.id + ": empty " + std::string(to_string(role)));
        auto& slots = slots_[static_cast<std::size_t>(role)];
        for (const Stimulus& s : members) {
            const auto contexts = store.contexts(s.surface, plan.bin);
            if (contexts.empty()) {
                throw NoContextsError("category " + category.id + ": stimulus '" + s.surface +
                                      "' has no contexts in segment bin " + std::string(label(plan.bin)));
            }
            std::vector<std::uint64_t> ids;
            ids.reserve(contexts.size());
            for (const auto& c : contexts) ids.push_back(c.sentence_id);

            auto engine = rng::StreamKey(seed_).mix(category.id).mix(s.surface).engine();
            Slot slot{&s, contexts, {}, sample_contexts(ids, plan.n_samples, engine)};
            slot.sequence.reserve(slot.sentence_ids.size());
            for (std::uint64_t id : slot.sentence_ids) {
                auto it = std::lower_bound(ids.begin(), ids.end(), id);
                slot.sequence.push_back(static_cast<std::uint64_t>(it - ids.begin()));
            }
            slots.push_back(std::move(slot));
        }
    }
}

const std::vector<std::uint64_t>& CeatSampler::draws_for(std::string_view stimulus) const {
    for (const auto& slots : slots_) {
        for (const auto& slot : slots) {
            if (slot.stimulus->surface == stimulus) return slot.sentence_ids;
        }
    }
    throw ValidationError("stimulus '" + std::string(stimulus) + "' is not in category " + category_.id);
}

SampleEffect CeatSampler::evaluate(const std::vector<std::uint64_t>& positions) const {
    std::array<VectorSet, 4> sets;
    std::size_t k = 0;
    for (std::size_t r = 0; r < slots_.size(); ++r) {
        for (const auto& slot : slots_[r]) {
            sets[r].push_back(store_.vector(slot.contexts[positions[k++]].row));
        }
    }
    const auto& [x, y, a, b] = sets;
    const std::vector<double> sx = associations(x, a, b);
    const std::vector<double> sy = associations(y, a, b);

    SampleEffect e;
    e.es = effect_size_from_scores(sx, sy, Spread::population);
    std::vector<double> pooled(sx);
    pooled.insert(pooled.end(), sy.begin(), sy.end());
    const double sd = std_dev(pooled, Spread::population);
    e.v_in = sd * sd;
    e.w = 1.0 / e.v_in;
    return e;
}

SampleEffect CeatSampler::sample(std::uint64_t draw_index) const {
    if (draw_index >= plan_.n_samples) throw ValidationError("draw index beyond the sampling plan");
    std::vector<std::uint64_t> positions;
    for (const auto& slots : slots_) {
        for (const auto& slot : slots) positions.push_back(slot.sequence[draw_index]);
    }
    try {
        return evaluate(positions);
    } catch (const DegenerateSpreadError&) {
    }
    for (int attempt = 1; attempt <= plan_.max_redraws; ++attempt) {
        auto engine = rng::StreamKey(seed_).mix(category_.id).mix("redraw").mix(draw_index).mix(
            static_cast<std::uint64_t>(attempt)).engine();
        std::size_t k = 0;
        for (const auto& slots : slots_) {
            for (const auto& slot : slots) positions[k++] = rng::uniform_below(engine, slot.contexts.size());
        }
        try {
            return evaluate(positions);
        } catch (const DegenerateSpreadError&) {
        }
    }
    throw DegenerateSpreadError("category " + category_.id + ": draw " + std::to_string(draw_index) +
                                " has zero association spread after " + std::to_string(plan_.max_redraws) +
                                " redraws");
}

SampleEffect ceat_sample(const Category& category, const ContextStore& store, std::uint64_t draw_index,
                         const SamplingPlan& plan) {
    return CeatSampler(category, store, plan).sample(draw_index);
}

CeatResult run_ceat(const Category& category, const ContextStore& store, const SamplingPlan& plan) {
    const CeatSampler sampler(category, store, plan);
    std::vector<SampleEffect> samples(plan.n_samples);
    parallel_for(samples.size(), plan.threads, [&](std::size_t i) { samples[i] = sampler.sample(i); });
    CeatResult r = combined_effect(std::move(samples));
    r.significant = r.p_two_tailed < plan.level;
    r.seed = sampler.seed();
    return r;
}

} // namespace assocbias::ceat
