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

#include "assocbias/report.hpp"

#include "../support/cli_fixtures.hpp"

#include <doctest.h>

#include <sstream>

using namespace assocbias;
using namespace assocbias::report;
using fixture::run_cli;

namespace {

ResultRow effect_row(std::string cat, Method m, double d, double p) {
    EffectSizeResult r{d, p, 20, PermutationMode::exhaustive, classify_magnitude(d)};
    return make_row(std::move(cat), m, r, default_level(m));
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

// first two whitespace-separated fields
std::string leading(const std::string& line) {
    std::istringstream in(line);
    std::string a, b;
    in >> a >> b;
    return a + " " + b;
}

} // namespace

TEST_CASE("number formatting round trips") {
    for (double v : {0.0, 1.0, -0.1, 1.0 / 3.0, 1e-300, 6.02e23, 0.31731050786291415}) {
        const auto s = format_number(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("significance follows the method level") {
    CHECK(effect_row("C", Method::weat, 0.5, 0.04).significant);
    CHECK_FALSE(effect_row("C", Method::weat, 0.5, 0.05).significant);
    ceat::CeatResult c;
    c.p_two_tailed = 0.004;
    c.significant = true;
    CHECK(make_row("C", c, ceat::SegmentBin::over_75, ceat::SamplingMode::fixed).significant);
    CHECK(default_level(Method::ceat) == 0.005);
    CHECK(default_level(Method::logprob) == 0.05);
}

TEST_CASE("effect csv round trip") {
    const std::vector<ResultRow> rows{effect_row("C1", Method::weat, 1.77, 0.001),
                                      effect_row("C,2", Method::seat, -0.03, 0.6)};
    std::ostringstream os;
    write_effect_csv(os, rows);
    CHECK(lines(os.str())[0] == kEffectHeader);
    std::istringstream in(os.str());
    const auto back = read_result_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[1].category == "C,2");
    CHECK(back[0].effect == 1.77);
    CHECK(back[0].significant);
    CHECK(back[1].magnitude == Magnitude::negligible);
}

TEST_CASE("ceat csv round trip") {
    ceat::CeatResult c;
    c.ces = 0.639;
    c.se = 0.01;
    c.p_two_tailed = 1e-9;
    c.significant = true;
    c.n = 1000;
    c.magnitude = Magnitude::medium;
    const std::vector<ResultRow> rows{make_row("C4", c, ceat::SegmentBin::from_26_to_75, ceat::SamplingMode::fixed)};
    std::ostringstream os;
    write_ceat_csv(os, rows);
    CHECK(lines(os.str())[1] == "C4,26–75,f,1000,0.639,0.01,1e-09,true,medium");
    std::istringstream in(os.str());
    const auto back = read_result_csv(in);
    CHECK(back[0].se == 0.01);
    CHECK(back[0].bin == "26–75");
}

TEST_CASE("table merge order and markers") {
    ceat::CeatResult c;
    c.ces = 1.225;
    c.p_two_tailed = 0.001;
    c.significant = true;
    c.magnitude = Magnitude::large;
    std::vector<ResultRow> rows{make_row("C2", c, ceat::SegmentBin::up_to_9, ceat::SamplingMode::random),
                                effect_row("C1", Method::seat, 0.3, 0.2), effect_row("C1", Method::weat, 1.2, 0.01)};
    const auto t = lines(render_table(rows));
    REQUIRE(t.size() == 5);
    CHECK(leading(t[1]) == "C1 weat");
    CHECK(leading(t[2]) == "C1 seat");
    CHECK(t[1].find("1.200*") != std::string::npos);
    CHECK(t[2].find("0.300 ") != std::string::npos);
    CHECK(t[2].find("light") != std::string::npos);
    CHECK(t[3].find("dark") != std::string::npos);
    CHECK(t[3].find("≤9") != std::string::npos);
    CHECK(lines(render_table({})).size() == 2);
}

TEST_CASE("cli help and usage errors") {
    CHECK(run_cli({"--help"}).code == cli::kOk);
    CHECK(run_cli({}).code == cli::kInputError);
    CHECK(run_cli({"bogus"}).code == cli::kInputError);
    CHECK(run_cli({"weat", "--lexicon"}).code == cli::kInputError);
}

TEST_CASE("cli extract golden") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    const auto lex = (dir / "lexicon.json").string();
    const auto r = run_cli({"extract", "--lexicon", lex, "--corpus", (dir / "corpus.txt").string(), "--report",
                            (dir / "report.csv").string()});
    CHECK(r.code == 0);
    const std::string golden =
        R"({"sentence_id":0,"text":"A rose by any other name.","stimulus":"rose","matched_variant":"rose","token_index":1,"word_count":6,"source":"corpus"})"
        "\n"
        R"({"sentence_id":1,"text":"The roses, and the ants!","stimulus":"rose","matched_variant":"roses","token_index":1,"word_count":5,"source":"corpus"})"
        "\n"
        R"({"sentence_id":1,"text":"The roses, and the ants!","stimulus":"ant","matched_variant":"ants","token_index":4,"word_count":5,"source":"corpus"})"
        "\n"
        R"({"sentence_id":2,"text":"antsy wasps were everywhere","stimulus":"wasp","matched_variant":"wasps","token_index":1,"word_count":4,"source":"corpus"})"
        "\n"
        R"({"sentence_id":4,"text":"\"Moths\" love the lily","stimulus":"love","matched_variant":"love","token_index":1,"word_count":4,"source":"corpus"})"
        "\n"
        R"({"sentence_id":4,"text":"\"Moths\" love the lily","stimulus":"lily","matched_variant":"lily","token_index":3,"word_count":4,"source":"corpus"})"
        "\n"
        R"({"sentence_id":5,"text":"a kind man and a cruel boy met a girl","stimulus":"kind","matched_variant":"kind","token_index":1,"word_count":10,"source":"corpus"})"
        "\n"
        R"({"sentence_id":5,"text":"a kind man and a cruel boy met a girl","stimulus":"man","matched_variant":"man","token_index":2,"word_count":10,"source":"corpus"})"
        "\n"
        R"({"sentence_id":5,"text":"a kind man and a cruel boy met a girl","stimulus":"cruel","matched_variant":"cruel","token_index":5,"word_count":10,"source":"corpus"})"
        "\n"
        R"({"sentence_id":5,"text":"a kind man and a cruel boy met a girl","stimulus":"boy","matched_variant":"boy","token_index":6,"word_count":10,"source":"corpus"})"
        "\n"
        R"({"sentence_id":5,"text":"a kind man and a cruel boy met a girl","stimulus":"girl","matched_variant":"girl","token_index":9,"word_count":10,"source":"corpus"})"
        "\n";
    CHECK(r.out == golden);
    const auto rep = lines(fixture::read_file(dir / "report.csv"));
    CHECK(rep[0] == kExtractionHeader);
    CHECK(rep.size() == 20);
    CHECK(std::find(rep.begin(), rep.end(), "rose,2,0,0,0,2,3") != rep.end());
    CHECK(std::find(rep.begin(), rep.end(), "kind,0,1,0,0,1,4") != rep.end());
    CHECK(r.err.find("note:") != std::string::npos);

    const auto again = run_cli({"extract", "--lexicon", lex, "--corpus", (dir / "corpus.txt").string()});
    CHECK(again.out == r.out);
}

TEST_CASE("cli extract with supplement") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    const auto r = run_cli({"extract", "--lexicon", (dir / "lexicon.json").string(), "--corpus",
                            (dir / "corpus.txt").string(), "--supplement", (dir / "supplement.txt").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find(R"("sentence_id":6,"text":"peace be with the tulips")") != std::string::npos);
    CHECK(r.out.find(R"("source":"supplement")") != std::string::npos);
}

TEST_CASE("cli missing lexicon") {
    fixture::TempDir dir("cli");
    const auto r = run_cli({"extract", "--lexicon", (dir / "nope.json").string(), "--corpus", "x"});
    CHECK(r.code == cli::kInputError);
    CHECK(r.out.empty());
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("cli weat on planted vectors") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    const auto r = run_cli({"weat", "--lexicon", (dir / "lexicon.json").string(), "--vectors",
                            (dir / "vectors.txt").string(), "--category", "E1"});
    REQUIRE(r.code == 0);
    const auto out = lines(r.out);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == kEffectHeader);
    std::istringstream in(r.out);
    const auto rows = read_result_csv(in);
    CHECK(rows[0].effect > 1.0);
    // 3 vs 3 targets: the smallest attainable p is 1/20
    CHECK(rows[0].p == doctest::Approx(0.05));
    CHECK_FALSE(rows[0].significant);
    CHECK(rows[0].permutation_mode == "exhaustive");
    CHECK(rows[0].n == 20);
}

TEST_CASE("cli weat with identical target embeddings") {
    fixture::TempDir dir("cli");
    fixture::write_file(dir / "lexicon.json", fixture::kEnglishLexicon);
    fixture::write_file(dir / "v.txt",
                        "rose 1 0.2\nlily 0.3 1\ntulip 1 1\nant 1 0.2\nwasp 0.3 1\nmoth 1 1\n"
                        "love 1 0\npeace 0.9 0.1\nfilth 0 1\nugly 0.1 0.9\n");
    const auto r = run_cli({"weat", "--lexicon", (dir / "lexicon.json").string(), "--vectors",
                            (dir / "v.txt").string(), "--category", "E1"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    CHECK(read_result_csv(in)[0].effect == 0.0);
}

TEST_CASE("cli weat missing vectors") {
    fixture::TempDir dir("cli");
    fixture::write_file(dir / "lexicon.json", fixture::kEnglishLexicon);
    fixture::write_file(dir / "v.txt", "rose 1 0\nant 0 1\nlove 1 0.1\nfilth 0.1 1\n");
    auto r = run_cli({"weat", "--lexicon", (dir / "lexicon.json").string(), "--vectors", (dir / "v.txt").string(),
                      "--category", "E1"});
    CHECK(r.code == 0);
    CHECK(r.err.find("'lily'") != std::string::npos);
    r = run_cli({"weat", "--lexicon", (dir / "lexicon.json").string(), "--vectors", (dir / "v.txt").string(),
                 "--category", "E2"});
    CHECK(r.code == cli::kInputError);
}

TEST_CASE("cli seat") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    const auto r = run_cli({"seat", "--lexicon", (dir / "lexicon.json").string(), "--archive",
                            (dir / "sentences").string(), "--seed", "3"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto rows = read_result_csv(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].method == Method::seat);
    CHECK(rows[0].effect > 1.0);
}

TEST_CASE("cli ceat fixed mode") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    const std::vector<std::string> base{"ceat", "--lexicon", (dir / "lexicon.json").string(), "--archive",
                                        (dir / "words").string(), "--samples", "200", "--seed", "5"};
    const auto r1 = run_cli(base);
    REQUIRE(r1.code == 0);
    auto args8 = base;
    args8.insert(args8.end(), {"--threads", "8"});
    CHECK(run_cli(args8).out == r1.out);
    CHECK(run_cli(base).out == r1.out);
    const auto out = lines(r1.out);
    CHECK(out[0] == kCeatHeader);
    REQUIRE(out.size() == 9);  // two categories x four bins
    for (const char* bin : {"≤9", "10–25", "26–75", ">75"}) {
        CHECK(r1.out.find(std::string(",") + bin + ",f,200,") != std::string::npos);
    }
    auto no_seed = base;
    no_seed.resize(no_seed.size() - 2);
    CHECK(run_cli(no_seed).code == cli::kInputError);
}

TEST_CASE("cli ceat random mode seeds agree within noise") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    auto run = [&](const char* seed) {
        const auto r = run_cli({"ceat", "--lexicon", (dir / "lexicon.json").string(), "--archive",
                                (dir / "words").string(), "--mode", "random", "--seed", seed, "--bin", "le9",
                                "--category", "E1", "--samples", "300"});
        REQUIRE(r.code == 0);
        std::istringstream in(r.out);
        return read_result_csv(in)[0];
    };
    const auto a = run("1"), b = run("2");
    CHECK(a.mode == "r");
    CHECK(std::fabs(a.effect - b.effect) < 4 * (*a.se + *b.se) + 0.05);
}

TEST_CASE("cli ceat skips empty bins unless asked for them") {
    fixture::TempDir dir("cli");
    fixture::write_file(dir / "lexicon.json", fixture::kEnglishLexicon);
    auto a = fixture::word_archive(3);
    std::erase_if(a.records, [](const ArchiveRecord& r) { return r.word_count == 90; });
    std::vector<float> m;
    for (auto& r : a.records) {
        m.insert(m.end(), a.matrix.begin() + r.row * a.dim, a.matrix.begin() + (r.row + 1) * a.dim);
    }
    for (std::size_t i = 0; i < a.records.size(); ++i) a.records[i].row = i;
    a.matrix = m;
    write_archive(dir / "w", a);
    const std::vector<std::string> base{"ceat", "--lexicon", (dir / "lexicon.json").string(), "--archive",
                                        (dir / "w").string(), "--samples", "20", "--seed", "1"};
    const auto r = run_cli(base);
    CHECK(r.code == 0);
    CHECK(lines(r.out).size() == 7);
    CHECK(r.err.find(">75") != std::string::npos);
    auto explicit_bin = base;
    explicit_bin.insert(explicit_bin.end(), {"--bin", "gt75"});
    CHECK(run_cli(explicit_bin).code == cli::kComputationError);
}

TEST_CASE("cli logprob emit and score") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    const auto lex = (dir / "lexicon.json").string(), tpl = (dir / "templates.json").string();
    const auto q = run_cli({"logprob", "emit", "--lexicon", lex, "--category", "E2", "--templates", tpl});
    REQUIRE(q.code == 0);
    CHECK(lines(q.out).size() == 2 * 2 * 4 * 5);
    fixture::write_file(dir / "answers.jsonl", fixture::stub_answer_text(q.out, {"man", "boy"},
                                                                         {"kind", "calm", "brave"}));
    const auto s = run_cli({"logprob", "score", "--lexicon", lex, "--category", "E2", "--templates", tpl,
                            "--answers", (dir / "answers.jsonl").string(), "--scatter", (dir / "sc.csv").string()});
    REQUIRE(s.code == 0);
    // A attributes score 1.0, B attributes 0.0; observed split is the best of C(5,3) = 10
    std::istringstream in(s.out);
    const auto row = read_result_csv(in).at(0);
    CHECK(row.effect == doctest::Approx(1.0 / std::sqrt(0.24)).epsilon(1e-14));
    CHECK(row.p == 0.1);
    CHECK(row.n == 10);
    CHECK_FALSE(row.significant);
    const auto sc = lines(fixture::read_file(dir / "sc.csv"));
    CHECK(sc[0] == kScatterHeader);
    CHECK(sc.size() == 1 + 2 * 4 * 5);
    CHECK(sc[1] == "S1,0.125,1");

    std::string partial = fixture::read_file(dir / "answers.jsonl");
    partial = partial.substr(0, partial.rfind('\n', partial.size() - 2) + 1);
    fixture::write_file(dir / "partial.jsonl", partial);
    const auto m = run_cli({"logprob", "score", "--lexicon", lex, "--category", "E2", "--templates", tpl,
                            "--answers", (dir / "partial.jsonl").string()});
    CHECK(m.code == cli::kComputationError);
    CHECK(m.err.find("girl") != std::string::npos);
    CHECK(m.err.find("weak") != std::string::npos);
}

TEST_CASE("cli report merges inputs") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    const auto lex = (dir / "lexicon.json").string();
    REQUIRE(run_cli({"weat", "--lexicon", lex, "--vectors", (dir / "vectors.txt").string(), "--out",
                     (dir / "w.csv").string()})
                .code == 0);
    REQUIRE(run_cli({"ceat", "--lexicon", lex, "--archive", (dir / "words").string(), "--samples", "50", "--seed",
                     "1", "--bin", "le9", "--out", (dir / "c.csv").string()})
                .code == 0);
    const auto r = run_cli({"report", "--in", (dir / "c.csv").string(), "--in", (dir / "w.csv").string()});
    REQUIRE(r.code == 0);
    const auto t = lines(r.out);
    REQUIRE(t.size() == 6);
    CHECK(leading(t[1]) == "E1 weat");
    CHECK(leading(t[2]) == "E1 ceat");
    CHECK(leading(t[3]) == "E2 weat");
    CHECK(run_cli({"report"}).out == render_table({}));
}

TEST_CASE("cli config file with flags winning") {
    fixture::TempDir dir("cli");
    fixture::write_cli_inputs(dir);
    fixture::write_file(dir / "cfg.json", R"({"lexicon": ")" + (dir / "lexicon.json").string() +
                                              R"(", "archive": ")" + (dir / "words").string() +
                                              R"(", "samples": 40, "seed": 9, "bin": ["le9", "gt75"], "category": "E1"})");
    const auto via_config = run_cli({"ceat", "--config", (dir / "cfg.json").string()});
    REQUIRE(via_config.code == 0);
    const auto explicit_flags = run_cli({"ceat", "--lexicon", (dir / "lexicon.json").string(), "--archive",
                                         (dir / "words").string(), "--samples", "40", "--seed", "9", "--bin", "le9",
                                         "--bin", "gt75", "--category", "E1"});
    CHECK(via_config.out == explicit_flags.out);
    const auto override_seed = run_cli({"ceat", "--config", (dir / "cfg.json").string(), "--seed", "10"});
    CHECK(override_seed.out != via_config.out);
    fixture::write_file(dir / "bad.json", "[1]");
    CHECK(run_cli({"ceat", "--config", (dir / "bad.json").string()}).code == cli::kInputError);
}
