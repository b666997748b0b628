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

#include "assocbias/cli.hpp"

#include "assocbias/archive.hpp"
#include "assocbias/assoc_stats.hpp"
#include "assocbias/ceat.hpp"
#include "assocbias/corpus.hpp"
#include "assocbias/embedding.hpp"
#include "assocbias/error.hpp"
#include "assocbias/lexicon.hpp"
#include "assocbias/mlm_probe.hpp"
#include "assocbias/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace assocbias::cli {

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<double> level;
    unsigned threads = 1;
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

// Writes `text` to `path`, or to the result stream when no path was given.
void emit(const std::string& path, const std::string& text, const Streams& io) {
    if (path.empty() || path == "-") {
        io.out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f << text;
    if (!f) throw IoError("write failed: " + path);
}

std::vector<const Category*> select_categories(const Lexicon& lex, const std::vector<std::string>& ids) {
    std::vector<const Category*> out;
    if (ids.empty()) {
        for (const auto& c : lex.categories) out.push_back(&c);
        return out;
    }
    for (const auto& id : ids) {
        const Category* c = lex.find_category(id);
        if (!c) throw ValidationError("lexicon has no category '" + id + "'");
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> surfaces(const std::vector<Stimulus>& set) {
    std::vector<std::string> out;
    out.reserve(set.size());
    for (const auto& s : set) out.push_back(s.surface);
    return out;
}

Spread parse_spread(const std::string& s) {
    if (s == "population") return Spread::population;
    if (s == "sample") return Spread::sample;
    throw ValidationError("--spread must be population or sample");
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
    std::string lexicon;
    std::string corpus;
    std::string supplement;
    std::string report;
    std::uint64_t threshold = corpus::kDefaultMinSentences;
    unsigned shards = 1;
};

int cmd_extract(const Common& common, const ExtractArgs& args, const Streams& io) {
    const Lexicon lex = load_lexicon(args.lexicon);
    const auto index = corpus::VariantIndex::from_lexicon(lex);

    std::vector<corpus::SentenceRecord> store;
    corpus::ExtractOptions options;
    options.shards = args.shards;
    options.threads = common.threads;
    const auto stats = corpus::extract_file(
        args.corpus, index, [&](corpus::SentenceRecord&& r) { store.push_back(std::move(r)); }, options);
    if (stats.malformed > 0) {
        io.err << "warning: skipped " << stats.malformed << " malformed UTF-8 line(s) in " << args.corpus << '\n';
    }
    if (!args.supplement.empty()) {
        const auto before = store.size();
        const auto sup = corpus::ingest_supplement(store, args.supplement, index);
        if (store.size() == before) {
            io.err << "warning: supplement " << args.supplement << " added no matching sentences\n";
        }
        if (sup.malformed > 0) {
            io.err << "warning: skipped " << sup.malformed << " malformed UTF-8 line(s) in " << args.supplement
                   << '\n';
        }
    }

    std::ostringstream records;
    for (const auto& r : store) corpus::write_record(records, r);
    emit(common.out, records.str(), io);

    const auto rep = corpus::report(store, index, args.threshold);
    if (!args.report.empty()) {
        std::ostringstream csv;
        report::write_extraction_csv(csv, rep);
        emit(args.report, csv.str(), io);
    }
    for (const auto& d : rep.below_threshold) {
        io.err << "note: '" << d.stimulus << "' has " << d.count << " sentence(s), " << d.missing
               << " short of " << rep.threshold << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// weat / seat

struct EffectArgs {
    std::string lexicon;
    std::string source;  // vectors file (weat) or sentence archive (seat)
    std::vector<std::string> categories;
    std::uint64_t max_exhaustive = 200'000;
    std::uint64_t samples = 10'000;
    std::string spread = "population";
};

PermutationOptions permutation_options(const Common& common, const EffectArgs& args) {
    PermutationOptions o;
    o.max_exhaustive = args.max_exhaustive;
    o.n_samples = args.samples;
    o.seed = common.seed.value_or(0);
    o.threads = common.threads;
    o.spread = parse_spread(args.spread);
    return o;
}

int cmd_weat(const Common& common, const EffectArgs& args, const Streams& io) {
    const Lexicon lex = load_lexicon(args.lexicon);
    const EmbeddingTable table = load_text_vectors(args.source);
    const auto options = permutation_options(common, args);
    const double level = common.level.value_or(report::default_level(report::Method::weat));

    std::vector<report::ResultRow> rows;
    for (const Category* c : select_categories(lex, args.categories)) {
        std::array<VectorSet, 4> sets;
        for (Role role : kAllRoles) {
            for (const auto& s : c->set(role)) {
                if (auto i = table.find(s.surface)) {
                    sets[static_cast<std::size_t>(role)].push_back(table.row(*i));
                } else {
                    io.err << "warning: " << c->id << ": no vector for '" << s.surface << "'\n";
                }
            }
            if (sets[static_cast<std::size_t>(role)].empty()) {
                throw ValidationError("category " + c->id + ": no vectors for any stimulus in " +
                                      std::string(to_string(role)));
            }
        }
        const auto r = weat(sets[0], sets[1], sets[2], sets[3], options);
        rows.push_back(report::make_row(c->id, report::Method::weat, r, level));
    }
    std::ostringstream csv;
    report::write_effect_csv(csv, rows);
    emit(common.out, csv.str(), io);
    return kOk;
}

int cmd_seat(const Common& common, const EffectArgs& args, const Streams& io) {
    const Lexicon lex = load_lexicon(args.lexicon);
    const EmbeddingArchive archive = read_archive(args.source);
    const auto options = permutation_options(common, args);
    const double level = common.level.value_or(report::default_level(report::Method::seat));

    // sentence vectors per stimulus, in sentence-id order
    std::map<std::string, std::vector<std::pair<std::uint64_t, std::uint64_t>>, std::less<>> by_stimulus;
    for (const auto& r : archive.records) by_stimulus[r.stimulus].emplace_back(r.sentence_id, r.row);
    for (auto& [_, rows] : by_stimulus) std::sort(rows.begin(), rows.end());

    std::vector<report::ResultRow> rows;
    for (const Category* c : select_categories(lex, args.categories)) {
        SeatGroups groups;
        std::array<std::vector<VectorSet>*, 4> slots{&groups.x, &groups.y, &groups.a, &groups.b};
        for (Role role : kAllRoles) {
            auto& slot = *slots[static_cast<std::size_t>(role)];
            for (const auto& s : c->set(role)) {
                auto it = by_stimulus.find(s.surface);
                if (it == by_stimulus.end()) {
                    io.err << "warning: " << c->id << ": no sentence vectors for '" << s.surface << "'\n";
                    continue;
                }
                VectorSet vs;
                for (const auto& [sid, row] : it->second) vs.push_back(archive.row(row));
                slot.push_back(std::move(vs));
            }
            if (slot.empty()) {
                throw ValidationError("category " + c->id + ": no sentence vectors for any stimulus in " +
                                      std::string(to_string(role)));
            }
        }
        const auto r = seat_effect_size(groups, options);
        rows.push_back(report::make_row(c->id, report::Method::seat, r, level));
    }
    std::ostringstream csv;
    report::write_effect_csv(csv, rows);
    emit(common.out, csv.str(), io);
    return kOk;
}

// ---------------------------------------------------------------------------
// ceat

struct CeatArgs {
    std::string lexicon;
    std::string archive;
    std::string json;
    std::vector<std::string> categories;
    std::vector<std::string> bins;
    std::uint64_t samples = 1000;
    std::string mode = "fixed";
};

int cmd_ceat(const Common& common, const CeatArgs& args, const Streams& io) {
    const Lexicon lex = load_lexicon(args.lexicon);
    ceat::SamplingMode mode;
    if (args.mode == "fixed" || args.mode == "f") mode = ceat::SamplingMode::fixed;
    else if (args.mode == "random" || args.mode == "r") mode = ceat::SamplingMode::random;
    else throw ValidationError("--mode must be fixed or random");
    if (mode == ceat::SamplingMode::fixed && !common.seed) {
        throw ValidationError("fixed sampling mode requires --seed");
    }

    std::vector<ceat::SegmentBin> bins;
    for (const auto& b : args.bins) {
        auto parsed = ceat::parse_bin(b);
        if (!parsed) throw ValidationError("unknown segment bin '" + b + "'");
        bins.push_back(*parsed);
    }
    const bool explicit_bins = !bins.empty();
    if (!explicit_bins) bins.assign(ceat::kAllBins.begin(), ceat::kAllBins.end());

    const ceat::ContextStore store(read_archive(args.archive));
    std::optional<std::uint64_t> seed = common.seed;
    if (!seed) {
        // one fresh seed per run, reported so the run can be replayed
        std::random_device rd;
        seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        io.err << "note: random mode seed " << *seed << '\n';
    }

    std::vector<report::ResultRow> rows;
    std::ostringstream json;
    for (const Category* c : select_categories(lex, args.categories)) {
        for (ceat::SegmentBin bin : bins) {
            ceat::SamplingPlan plan;
            plan.n_samples = args.samples;
            plan.mode = mode;
            plan.seed = seed;
            plan.bin = bin;
            plan.threads = common.threads;
            plan.level = common.level.value_or(report::default_level(report::Method::ceat));
            ceat::CeatResult r;
            try {
                r = ceat::run_ceat(*c, store, plan);
            } catch (const NoContextsError& e) {
                if (explicit_bins) throw;
                io.err << "note: skipping " << c->id << " bin " << ceat::label(bin) << ": " << e.what() << '\n';
                continue;
            }
            rows.push_back(report::make_row(c->id, r, bin, mode));
            json << report::ceat_json(c->id, r, bin, mode) << '\n';
        }
    }
    std::ostringstream csv;
    report::write_ceat_csv(csv, rows);
    emit(common.out, csv.str(), io);
    if (!args.json.empty()) emit(args.json, json.str(), io);
    return kOk;
}

// ---------------------------------------------------------------------------
// logprob

struct LogprobArgs {
    std::string lexicon;
    std::string category;
    std::string templates;
    std::string answers;
    std::string scatter;
    std::uint64_t max_exhaustive = 200'000;
    std::uint64_t samples = 10'000;
};

struct ProbeSets {
    std::vector<std::string> male, female, a, b, targets, attributes;
};

ProbeSets probe_sets(const Lexicon& lex, const std::string& id) {
    const Category* c = lex.find_category(id);
    if (!c) throw ValidationError("lexicon has no category '" + id + "'");
    ProbeSets p{surfaces(c->targets_x), surfaces(c->targets_y), surfaces(c->attributes_a),
                surfaces(c->attributes_b), {}, {}};
    p.targets = p.male;
    p.targets.insert(p.targets.end(), p.female.begin(), p.female.end());
    p.attributes = p.a;
    p.attributes.insert(p.attributes.end(), p.b.begin(), p.b.end());
    return p;
}

int cmd_logprob_emit(const Common& common, const LogprobArgs& args, const Streams& io) {
    const Lexicon lex = load_lexicon(args.lexicon);
    const auto sets = probe_sets(lex, args.category);
    const auto templates = mlm::load_templates(args.templates);
    std::ostringstream os;
    for (const auto& t : templates) {
        const auto queries = mlm::build_queries(t, sets.targets, sets.attributes);
        mlm::write_queries(os, queries);
    }
    emit(common.out, os.str(), io);
    return kOk;
}

int cmd_logprob_score(const Common& common, const LogprobArgs& args, const Streams& io) {
    const Lexicon lex = load_lexicon(args.lexicon);
    const auto sets = probe_sets(lex, args.category);
    const auto templates = mlm::load_templates(args.templates);
    std::ifstream in(args.answers, std::ios::binary);
    if (!in) throw IoError("cannot open answers file " + args.answers);
    const auto answers = mlm::read_answers(in);

    const auto scores = mlm::score_answers(templates, sets.targets, sets.attributes, answers);
    PermutationOptions options;
    options.max_exhaustive = args.max_exhaustive;
    options.n_samples = args.samples;
    options.seed = common.seed.value_or(0);
    options.threads = common.threads;
    const auto r = mlm::aggregate(scores, sets.male, sets.female, sets.a, sets.b, options);
    const double level = common.level.value_or(report::default_level(report::Method::logprob));

    const std::vector<report::ResultRow> rows{report::make_row(args.category, report::Method::logprob, r, level)};
    std::ostringstream csv;
    report::write_effect_csv(csv, rows);
    emit(common.out, csv.str(), io);
    if (!args.scatter.empty()) {
        std::ostringstream sc;
        report::write_scatter_csv(sc, mlm::scatter_data(scores));
        emit(args.scatter, sc.str(), io);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const Common& common, const std::vector<std::string>& inputs, const Streams& io) {
    std::vector<report::ResultRow> rows;
    for (const auto& path : inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open result file " + path);
        auto part = report::read_result_csv(in);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    emit(common.out, report::render_table(std::move(rows)), io);
    return kOk;
}

// ---------------------------------------------------------------------------
// config file: a flat JSON object whose keys are long option names. Values
// become "--key value" tokens placed before the user's own options, and keys
// the user passed explicitly are skipped, so flags win.

bool user_has(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

std::string scalar_token(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return report::format_number(v.get<double>());
    throw ValidationError("config key '" + key + "' must be a string, number, boolean or array");
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    const auto path = find_config(args);
    if (!path) return args;
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + *path);
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!cfg.is_object()) throw ParseError("config: expected a JSON object");

    std::vector<std::string> tokens;
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        const std::string& key = it.key();
        if (key == "config" || user_has(args, key)) continue;
        const auto& v = it.value();
        if (v.is_boolean()) {
            if (v.get<bool>()) tokens.push_back("--" + key);
        } else if (v.is_array()) {
            for (const auto& item : v) {
                tokens.push_back("--" + key);
                tokens.push_back(scalar_token(item, key));
            }
        } else {
            tokens.push_back("--" + key);
            tokens.push_back(scalar_token(v, key));
        }
    }
    // config options go right after the subcommand words
    std::size_t insert_at = 1;
    while (insert_at < args.size() && args[insert_at].rfind("-", 0) != 0) ++insert_at;
    std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(insert_at));
    out.insert(out.end(), tokens.begin(), tokens.end());
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_at), args.end());
    return out;
}

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config, "JSON file of option values; explicit flags win");
    cmd->add_option("--seed", common.seed, "Seed for permutation and context sampling");
    cmd->add_option("--out", common.out, "Output path (default: stdout)");
    cmd->add_option("--level", common.level, "Significance level (default 0.05, ceat 0.005)")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
}

} // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    const Streams io{out, err};
    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    CLI::App app{"Association-bias measurement for word, sentence and contextual embeddings"};
    app.name(raw_args.empty() ? "assocbias" : raw_args.front());
    app.require_subcommand(1);

    Common common;
    ExtractArgs ex;
    EffectArgs weat_args;
    EffectArgs seat_args;
    CeatArgs ceat_args;
    LogprobArgs lp;
    std::vector<std::string> report_inputs;

    auto* extract = app.add_subcommand("extract", "Extract stimulus sentences from a corpus");
    add_common(extract, common);
    extract->add_option("--lexicon", ex.lexicon, "Lexicon JSON")->required();
    extract->add_option("--corpus", ex.corpus, "Corpus, one sentence per line")->required();
    extract->add_option("--supplement", ex.supplement, "Supplemental sentences for low-count stimuli");
    extract->add_option("--report", ex.report, "Per-stimulus count CSV");
    extract->add_option("--threshold", ex.threshold, "Minimum sentences per stimulus");
    extract->add_option("--shards", ex.shards, "Line-aligned corpus shards")->check(CLI::PositiveNumber);

    auto add_effect = [&](const char* name, const char* help, EffectArgs& a, const char* source_flag,
                          const char* source_help) {
        auto* cmd = app.add_subcommand(name, help);
        add_common(cmd, common);
        cmd->add_option("--lexicon", a.lexicon, "Lexicon JSON")->required();
        cmd->add_option(source_flag, a.source, source_help)->required();
        cmd->add_option("--category", a.categories, "Category id (repeatable; default all)");
        cmd->add_option("--max-exhaustive", a.max_exhaustive, "Largest partition count enumerated exactly");
        cmd->add_option("--samples", a.samples, "Monte-Carlo partitions beyond that");
        cmd->add_option("--spread", a.spread, "population or sample standard deviation");
        return cmd;
    };
    auto* weat_cmd = add_effect("weat", "Word embedding association test over static vectors", weat_args,
                                "--vectors", "Text vectors file");
    auto* seat_cmd = add_effect("seat", "Sentence embedding association test over a sentence archive", seat_args,
                                "--archive", "Sentence embedding archive directory");

    auto* ceat_cmd = app.add_subcommand("ceat", "Contextualized association test with random-effects pooling");
    add_common(ceat_cmd, common);
    ceat_cmd->add_option("--lexicon", ceat_args.lexicon, "Lexicon JSON")->required();
    ceat_cmd->add_option("--archive", ceat_args.archive, "Word embedding archive directory")->required();
    ceat_cmd->add_option("--json", ceat_args.json, "Full results as JSON lines");
    ceat_cmd->add_option("--category", ceat_args.categories, "Category id (repeatable; default all)");
    ceat_cmd->add_option("--bin", ceat_args.bins, "Segment bin: le9, 10-25, 26-75, gt75 (repeatable)");
    ceat_cmd->add_option("--samples", ceat_args.samples, "Draws per run (N)")->check(CLI::Range(2ULL, 1ULL << 32));
    ceat_cmd->add_option("--mode", ceat_args.mode, "fixed or random");

    auto* logprob = app.add_subcommand("logprob", "Log-probability bias probing");
    logprob->require_subcommand(1);
    auto add_logprob = [&](const char* name, const char* help) {
        auto* cmd = logprob->add_subcommand(name, help);
        add_common(cmd, common);
        cmd->add_option("--lexicon", lp.lexicon, "Lexicon JSON")->required();
        cmd->add_option("--category", lp.category, "Category: targets_x male, targets_y female terms")->required();
        cmd->add_option("--templates", lp.templates, "Templates JSON")->required();
        return cmd;
    };
    auto* emit_cmd = add_logprob("emit", "Write masked-probability queries");
    auto* score_cmd = add_logprob("score", "Score answered queries");
    score_cmd->add_option("--answers", lp.answers, "Answers JSON lines")->required();
    score_cmd->add_option("--scatter", lp.scatter, "Prior vs corrected scatter CSV");
    score_cmd->add_option("--max-exhaustive", lp.max_exhaustive, "Largest partition count enumerated exactly");
    score_cmd->add_option("--samples", lp.samples, "Monte-Carlo partitions beyond that");

    auto* report_cmd = app.add_subcommand("report", "Merge result CSVs into one table");
    add_common(report_cmd, common);
    report_cmd->add_option("--in", report_inputs, "Result CSV (repeatable)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (extract->parsed()) return cmd_extract(common, ex, io);
        if (weat_cmd->parsed()) return cmd_weat(common, weat_args, io);
        if (seat_cmd->parsed()) return cmd_seat(common, seat_args, io);
        if (ceat_cmd->parsed()) return cmd_ceat(common, ceat_args, io);
        if (emit_cmd->parsed()) return cmd_logprob_emit(common, lp, io);
        if (score_cmd->parsed()) return cmd_logprob_score(common, lp, io);
        if (report_cmd->parsed()) return cmd_report(common, report_inputs, io);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kComputationError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kInputError;
}

} // namespace assocbias::cli
