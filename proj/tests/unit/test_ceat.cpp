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

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace assocbias;
using namespace assocbias::ceat;

namespace {

std::vector<SampleEffect> effects(const std::vector<double>& es, const std::vector<double>& v) {
    std::vector<SampleEffect> out;
    for (std::size_t i = 0; i < es.size(); ++i) out.push_back({es[i], v[i], 0.0, 0.0});
    return out;
}

std::vector<std::vector<double>> random_bases(std::mt19937_64& g, std::size_t n, std::size_t dim) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_vec(g, dim));
    return out;
}

} // namespace

TEST_CASE("bin boundaries") {
    CHECK(bin_segment(1) == SegmentBin::up_to_9);
    CHECK(bin_segment(9) == SegmentBin::up_to_9);
    CHECK(bin_segment(10) == SegmentBin::from_10_to_25);
    CHECK(bin_segment(25) == SegmentBin::from_10_to_25);
    CHECK(bin_segment(26) == SegmentBin::from_26_to_75);
    CHECK(bin_segment(75) == SegmentBin::from_26_to_75);
    CHECK(bin_segment(76) == SegmentBin::over_75);
    CHECK(bin_segment(100000) == SegmentBin::over_75);
    CHECK_THROWS_AS(bin_segment(0), ValidationError);
    CHECK(label(bin_segment(9)) == "≤9");
    CHECK(label(bin_segment(76)) == ">75");
}

TEST_CASE("bins partition the positive integers") {
    for (std::uint32_t n = 1; n < 300; ++n) {
        const SegmentBin b = bin_segment(n);
        CHECK(n >= lower_bound(b));
        if (upper_bound(b)) CHECK(n <= *upper_bound(b));
    }
}

TEST_CASE("bin names parse") {
    for (SegmentBin b : kAllBins) CHECK(parse_bin(label(b)) == b);
    CHECK(parse_bin("le9") == SegmentBin::up_to_9);
    CHECK(parse_bin("10-25") == SegmentBin::from_10_to_25);
    CHECK(parse_bin("26-75") == SegmentBin::from_26_to_75);
    CHECK(parse_bin("gt75") == SegmentBin::over_75);
    CHECK_FALSE(parse_bin("short").has_value());
}

TEST_CASE("sampling with replacement when short") {
    const std::vector<std::uint64_t> avail{10, 20, 30};
    rng::Engine e(1);
    const auto s = sample_contexts(avail, 5, e);
    REQUIRE(s.size() == 5);
    for (auto id : s) CHECK(std::find(avail.begin(), avail.end(), id) != avail.end());
}

TEST_CASE("sampling without replacement when enough") {
    std::vector<std::uint64_t> avail(10);
    for (std::size_t i = 0; i < avail.size(); ++i) avail[i] = i * 7;
    rng::Engine e(2);
    const auto s = sample_contexts(avail, 5, e);
    CHECK(std::set<std::uint64_t>(s.begin(), s.end()).size() == 5);
    rng::Engine e2(2);
    CHECK(sample_contexts(avail, 5, e2) == s);
    rng::Engine e3(2);
    const auto all = sample_contexts(avail, 10, e3);
    CHECK(std::set<std::uint64_t>(all.begin(), all.end()).size() == 10);
}

TEST_CASE("sampling from nothing") {
    rng::Engine e(1);
    CHECK_THROWS_AS(sample_contexts({}, 3, e), NoContextsError);
}

TEST_CASE("between variance examples") {
    auto bv = between_variance(effects({0, 1}, {1, 1}));
    CHECK(bv.c == 1.0);
    CHECK(bv.q == 0.5);
    CHECK(bv.sigma2 == 0.0);
    bv = between_variance(effects({0, 2}, {0.5, 0.5}));
    CHECK(bv.c == 2.0);
    CHECK(bv.q == 4.0);
    CHECK(bv.sigma2 == 1.5);
    bv = between_variance(effects({0.3, 0.3, 0.3}, {0.2, 0.2, 0.2}));
    CHECK(bv.q == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bv.sigma2 == 0.0);
}

TEST_CASE("between variance errors") {
    CHECK_THROWS_AS(between_variance(effects({1}, {1})), InsufficientSamplesError);
    CHECK_THROWS_AS(between_variance(effects({1, 2}, {1, 0})), ZeroVarianceError);
}

TEST_CASE("combined effect example") {
    const auto r = combined_effect(effects({0, 2}, {0.5, 0.5}));
    CHECK(r.sigma2_between == 1.5);
    CHECK(r.samples[0].weight == 0.5);
    CHECK(r.samples[1].w == 2.0);
    CHECK(r.ces == 1.0);
    CHECK(r.se == 1.0);
    CHECK(r.p_two_tailed == doctest::Approx(0.31731).epsilon(1e-5));
    CHECK(r.n == 2);
}

TEST_CASE("homogeneous samples") {
    const auto r = combined_effect(effects({0.7, 0.7, 0.7, 0.7}, {0.25, 0.25, 0.25, 0.25}));
    CHECK(r.ces == 0.7);
    CHECK(r.sigma2_between == 0.0);
    for (const auto& s : r.samples) CHECK(s.weight == s.w);
}

TEST_CASE("zero effect has p one") {
    const auto r = combined_effect(effects({-0.5, 0.5}, {1, 1}));
    CHECK(r.ces == 0.0);
    CHECK(r.p_two_tailed == 1.0);
}

TEST_CASE("duplicating samples shrinks se by root two") {
    const std::vector<double> es{0.1, 0.2, 0.15}, v{1, 1, 1};
    const auto once = combined_effect(effects(es, v));
    REQUIRE(once.sigma2_between == 0.0);
    auto es2 = es, v2 = v;
    es2.insert(es2.end(), es.begin(), es.end());
    v2.insert(v2.end(), v.begin(), v.end());
    const auto twice = combined_effect(effects(es2, v2));
    CHECK(twice.sigma2_between == 0.0);
    CHECK(twice.ces == doctest::Approx(once.ces).epsilon(1e-15));
    CHECK(once.se / twice.se == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("pooling is order insensitive and matches the oracle") {
    std::mt19937_64 g(4);
    std::normal_distribution<double> n(0, 1);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> es(2 + trial % 20), v(es.size());
        for (auto& x : es) x = n(g);
        for (auto& x : v) x = u(g);
        const auto r = combined_effect(effects(es, v));
        const auto ref = oracle::pool(es, v);
        CHECK(r.ces == doctest::Approx(static_cast<double>(ref.ces)).epsilon(1e-12));
        CHECK(r.se == doctest::Approx(static_cast<double>(ref.se)).epsilon(1e-12));
        CHECK(r.sigma2_between >= 0.0);
        std::reverse(es.begin(), es.end());
        std::reverse(v.begin(), v.end());
        CHECK(combined_effect(effects(es, v)).ces == doctest::Approx(r.ces).epsilon(1e-13));
    }
}

TEST_CASE("context store indexes by stimulus and bin") {
    EmbeddingArchive a;
    a.dim = 2;
    a.records = {{0, "x", 5, 3}, {1, "x", 2, 3}, {2, "x", 9, 40}, {3, "y", 1, 3}};
    a.matrix = {1, 0, 0, 1, 1, 1, 2, 2};
    const ContextStore store(a);
    const auto cx = store.contexts("x", SegmentBin::up_to_9);
    REQUIRE(cx.size() == 2);
    CHECK(cx[0].sentence_id == 2);
    CHECK(cx[1].sentence_id == 5);
    CHECK(store.contexts("x", SegmentBin::from_26_to_75).size() == 1);
    CHECK(store.contexts("z", SegmentBin::up_to_9).empty());
    a.records[1].sentence_id = 5;
    CHECK_THROWS_AS(ContextStore{a}, ValidationError);
}

TEST_CASE("single context per stimulus gives identical draws") {
    const auto c = fixture::make_category("C", 2);
    std::mt19937_64 g(1);
    const auto store = ContextStore(fixture::synthetic_store(c, random_bases(g, 8, 4), 1, {{12, 0.0}}, 1));
    SamplingPlan plan;
    plan.n_samples = 50;
    plan.seed = 9;
    const auto r = run_ceat(c, store, plan);
    for (const auto& s : r.samples) CHECK(s.es == r.samples[0].es);
    CHECK(r.q == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.sigma2_between == 0.0);
    CHECK(r.ces == r.samples[0].es);
}

TEST_CASE("draw matches brute force on hand-listed vectors") {
    const auto c = fixture::make_category("C", 2);
    EmbeddingArchive a;
    a.dim = 2;
    const std::vector<std::vector<float>> rows{{1, 0.1f}, {0.9f, 0.3f}, {0.2f, 1}, {0.1f, 0.8f},
                                               {1, 0}, {0.8f, 0.2f}, {0, 1}, {0.3f, 1}};
    std::size_t k = 0;
    for (Role role : kAllRoles) {
        for (const auto& s : c.set(role)) {
            a.records.push_back({k, s.surface, k, 12});
            a.matrix.insert(a.matrix.end(), rows[k].begin(), rows[k].end());
            ++k;
        }
    }
    const ContextStore store(a);
    SamplingPlan plan;
    plan.n_samples = 3;
    plan.seed = 1;
    const auto e = ceat_sample(c, store, 0, plan);

    auto to_set = [&](std::size_t from) {
        return oracle::Set{{rows[from][0], rows[from][1]}, {rows[from + 1][0], rows[from + 1][1]}};
    };
    const auto x = to_set(0), y = to_set(2), A = to_set(4), B = to_set(6);
    std::vector<long double> sx, sy, all;
    for (const auto& w : x) sx.push_back(oracle::s(w, A, B));
    for (const auto& w : y) sy.push_back(oracle::s(w, A, B));
    all = sx;
    all.insert(all.end(), sy.begin(), sy.end());
    long double m = 0, ss = 0;
    for (auto v : all) m += v;
    m /= all.size();
    for (auto v : all) ss += (v - m) * (v - m);
    CHECK(e.es == doctest::Approx(static_cast<double>(oracle::cohens_d(sx, sy))).epsilon(1e-12));
    CHECK(e.v_in == doctest::Approx(static_cast<double>(ss / all.size())).epsilon(1e-12));
    CHECK(e.w == 1.0 / e.v_in);
}

TEST_CASE("fixed mode is reproducible and thread independent") {
    const auto c = fixture::make_category("C", 3);
    std::mt19937_64 g(3);
    const ContextStore store(fixture::synthetic_store(c, random_bases(g, 12, 8), 20, {{12, 0.5}}, 3));
    SamplingPlan plan;
    plan.n_samples = 200;
    plan.seed = 77;
    const auto r1 = run_ceat(c, store, plan);
    plan.threads = 8;
    const auto r2 = run_ceat(c, store, plan);
    REQUIRE(r1.samples.size() == r2.samples.size());
    for (std::size_t i = 0; i < r1.samples.size(); ++i) {
        CHECK(r1.samples[i].es == r2.samples[i].es);
        CHECK(r1.samples[i].v_in == r2.samples[i].v_in);
    }
    CHECK(r1.ces == r2.ces);
    CHECK(r1.seed == 77);
}

TEST_CASE("fixed selections are shared across models") {
    // same store layout and seed, different vectors: same sentences drawn
    const auto c = fixture::make_category("C", 2);
    std::mt19937_64 g(5);
    const ContextStore m1(fixture::synthetic_store(c, random_bases(g, 8, 4), 30, {{12, 0.5}}, 1));
    const ContextStore m2(fixture::synthetic_store(c, random_bases(g, 8, 6), 30, {{12, 0.5}}, 2));
    SamplingPlan plan;
    plan.n_samples = 10;
    plan.seed = 4;
    const CeatSampler s1(c, m1, plan), s2(c, m2, plan);
    for (Role role : kAllRoles) {
        for (const auto& s : c.set(role)) CHECK(s1.draws_for(s.surface) == s2.draws_for(s.surface));
    }
    plan.seed = 5;
    const CeatSampler s3(c, m1, plan);
    CHECK(s3.draws_for("x0") != s1.draws_for("x0"));
}

TEST_CASE("fixed mode needs a seed") {
    const auto c = fixture::make_category("C", 1);
    std::mt19937_64 g(1);
    const ContextStore store(fixture::synthetic_store(c, random_bases(g, 4, 3), 3, {{5, 0.1}}, 1));
    SamplingPlan plan;
    plan.bin = SegmentBin::up_to_9;
    CHECK_THROWS_AS(CeatSampler(c, store, plan), ValidationError);
    plan.mode = SamplingMode::random;
    plan.n_samples = 4;
    CeatSampler random_sampler(c, store, plan);
    (void)random_sampler.sample(0);
}

TEST_CASE("missing contexts name the stimulus") {
    const auto c = fixture::make_category("C", 1);
    std::mt19937_64 g(1);
    const ContextStore store(fixture::synthetic_store(c, random_bases(g, 4, 3), 3, {{5, 0.1}}, 1));
    SamplingPlan plan;
    plan.seed = 1;  // default bin 10-25 is empty
    try {
        CeatSampler(c, store, plan);
        FAIL("expected NoContextsError");
    } catch (const NoContextsError& e) {
        CHECK(std::string(e.what()).find("x0") != std::string::npos);
    }
}

TEST_CASE("degenerate draws are redrawn, then fail") {
    // every context identical except one alternate for x0: the first draw
    // may be degenerate, redraws must find the alternate
    auto c = fixture::make_category("C", 1);
    EmbeddingArchive a;
    a.dim = 2;
    auto push = [&](const std::string& s, std::uint64_t sid, std::vector<float> v) {
        a.records.push_back({a.records.size(), s, sid, 12});
        a.matrix.insert(a.matrix.end(), v.begin(), v.end());
    };
    push("x0", 0, {1, 1});
    push("x0", 1, {1, 0});
    push("y0", 2, {1, 1});
    push("a0", 3, {1, 0});
    push("b0", 4, {0, 1});
    const ContextStore store(a);
    SamplingPlan plan;
    plan.n_samples = 40;
    plan.seed = 2;
    const auto r = run_ceat(c, store, plan);
    for (const auto& s : r.samples) CHECK(s.es > 0.0);

    EmbeddingArchive flat;
    flat.dim = 2;
    for (const char* s : {"x0", "y0", "a0", "b0"}) {
        flat.records.push_back({flat.records.size(), s, flat.records.size(), 12});
        flat.matrix.insert(flat.matrix.end(), {1, 1});
    }
    const ContextStore degenerate(flat);
    plan.max_redraws = 5;
    CHECK_THROWS_AS(run_ceat(c, degenerate, plan), DegenerateSpreadError);
}

TEST_CASE("planted gap direction") {
    const auto c = fixture::make_category("C", 4);
    std::vector<std::vector<double>> bases;
    std::mt19937_64 g(12);
    std::normal_distribution<double> n(0, 0.3);
    for (int r = 0; r < 4; ++r) {
        for (int i = 0; i < 4; ++i) {
            std::vector<double> v(8);
            for (auto& x : v) x = n(g);
            v[(r == 0 || r == 2) ? 0 : 1] += 1.0;
            bases.push_back(v);
        }
    }
    const ContextStore store(fixture::synthetic_store(c, bases, 50, {{12, 0.3}}, 12));
    SamplingPlan plan;
    plan.n_samples = 300;
    plan.seed = 1;
    const auto r = run_ceat(c, store, plan);
    CHECK(r.ces > 0.8);
    CHECK(r.significant);
    CHECK(r.magnitude == Magnitude::large);
}
