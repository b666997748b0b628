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

#include "assocbias/corpus.hpp"

#include "assocbias/ceat.hpp"
#include "assocbias/error.hpp"
#include "assocbias/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>

namespace assocbias::corpus {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Source s) {
    return s == Source::corpus ? "corpus" : "supplement";
}

std::set<std::string> generate_variants(const Stimulus& stimulus, std::span<const SuffixGroup> groups) {
    const std::string root = unicode::nfc(stimulus.surface);
    std::set<std::string> out{root};
    if (!stimulus.suffix_group) return out;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const SuffixGroup& g) { return g.id == *stimulus.suffix_group; });
    if (it == groups.end()) {
        throw DanglingGroupError("stimulus '" + stimulus.surface + "' references undefined suffix group '" +
                                 *stimulus.suffix_group + "'");
    }
    for (const auto& suffix : it->suffixes) out.insert(unicode::nfc(root + suffix));
    return out;
}

VariantIndex::VariantIndex(std::span<const Stimulus> stimuli, std::span<const SuffixGroup> groups) {
    std::map<std::string, std::optional<std::string>> roots;
    for (const auto& s : stimuli) {
        const std::string surface = unicode::nfc(s.surface);
        auto [it, inserted] = roots.emplace(surface, s.suffix_group);
        if (!inserted && it->second != s.suffix_group) {
            throw ValidationError("stimulus '" + surface + "' is linked to more than one suffix group");
        }
    }
    for (const auto& [surface, group] : roots) stimuli_.push_back(surface);

    for (std::size_t i = 0; i < stimuli_.size(); ++i) {
        const Stimulus s{stimuli_[i], roots[stimuli_[i]], {}};
        for (const auto& v : generate_variants(s, groups)) {
            auto [it, inserted] = variants_.emplace(v, i);
            if (!inserted && it->second != i) {
                throw VariantCollisionError("variant '" + v + "' is produced by both '" + stimuli_[it->second] +
                                            "' and '" + stimuli_[i] + "'");
            }
        }
    }
}

VariantIndex VariantIndex::from_lexicon(const Lexicon& lexicon) {
    std::vector<Stimulus> all;
    for (const auto& c : lexicon.categories) {
        for (Role role : kAllRoles) {
            const auto& set = c.set(role);
            all.insert(all.end(), set.begin(), set.end());
        }
    }
    return VariantIndex(all, lexicon.suffix_groups);
}

const std::string* VariantIndex::lookup(const std::string& token) const {
    auto it = variants_.find(token);
    return it == variants_.end() ? nullptr : &stimuli_[it->second];
}

std::vector<SentenceRecord> match_sentence(std::string_view text, std::uint64_t sentence_id,
                                           const VariantIndex& index, Source source) {
    std::vector<SentenceRecord> out;
    const auto tokens = unicode::split_whitespace(text);
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto stripped = unicode::strip_edge_punct(tokens[i]);
        if (stripped.empty()) continue;
        key.assign(stripped);
        const std::string* stimulus = index.lookup(key);
        if (!stimulus) continue;
        const bool seen = std::any_of(out.begin(), out.end(),
                                      [&](const SentenceRecord& r) { return r.stimulus == *stimulus; });
        if (seen) continue;
        SentenceRecord r;
        r.sentence_id = sentence_id;
        r.text = std::string(text);
        r.stimulus = *stimulus;
        r.matched_variant = key;
        r.token_index = static_cast<std::uint32_t>(i);
        r.word_count = static_cast<std::uint32_t>(tokens.size());
        r.source = source;
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

// Handles one raw line; returns false if it was skipped as malformed.
bool process_line(std::string& line, std::uint64_t id, const VariantIndex& index, const ExtractOptions& options,
                  std::vector<SentenceRecord>& out) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!unicode::is_valid_utf8(line)) return false;
    const std::string text = options.normalizer ? options.normalizer(line) : line;
    auto recs = match_sentence(text, id, index, options.source);
    for (auto& r : recs) out.push_back(std::move(r));
    return true;
}

struct ShardResult {
    std::vector<SentenceRecord> records;
    ExtractStats stats;
};

} // namespace

ExtractStats extract(std::istream& in, const VariantIndex& index, const RecordSink& sink,
                     const ExtractOptions& options) {
    ExtractStats stats;
    std::string line;
    std::vector<SentenceRecord> recs;
    while (std::getline(in, line)) {
        recs.clear();
        if (!process_line(line, options.id_base + stats.lines, index, options, recs)) ++stats.malformed;
        ++stats.lines;
        for (auto& r : recs) {
            ++stats.records;
            sink(std::move(r));
        }
    }
    return stats;
}

ExtractStats extract_file(const fs::path& path, const VariantIndex& index, const RecordSink& sink,
                          const ExtractOptions& options) {
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) throw IoError("cannot stat corpus " + path.string() + ": " + ec.message());

    // Line-aligned byte ranges: each boundary moves forward past the next newline.
    const unsigned shards = std::max(1u, options.shards);
    std::vector<std::uint64_t> bounds{0};
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open corpus " + path.string());
        for (unsigned s = 1; s < shards; ++s) {
            std::uint64_t pos = std::max<std::uint64_t>(bounds.back(), size * s / shards);
            if (pos > 0 && pos < size) {
                in.clear();
                in.seekg(static_cast<std::streamoff>(pos - 1));
                char c;
                while (in.get(c) && c != '\n') {
                }
                pos = in ? static_cast<std::uint64_t>(in.tellg()) : size;
            }
            bounds.push_back(std::min<std::uint64_t>(pos, size));
        }
        bounds.push_back(size);
    }
    const std::size_t n_shards = bounds.size() - 1;

    // Pass 1: line counts give each shard its first sentence id.
    std::vector<std::uint64_t> line_counts(n_shards, 0);
    parallel_for(n_shards, options.threads, [&](std::size_t s) {
        std::ifstream in(path, std::ios::binary);
        in.seekg(static_cast<std::streamoff>(bounds[s]));
        std::uint64_t remaining = bounds[s + 1] - bounds[s];
        std::vector<char> buf(1 << 16);
        std::uint64_t newlines = 0;
        char last = '\n';
        while (remaining > 0) {
            const auto want = static_cast<std::streamsize>(std::min<std::uint64_t>(remaining, buf.size()));
            in.read(buf.data(), want);
            const auto got = in.gcount();
            if (got <= 0) break;
            newlines += static_cast<std::uint64_t>(std::count(buf.data(), buf.data() + got, '\n'));
            last = buf[static_cast<std::size_t>(got - 1)];
            remaining -= static_cast<std::uint64_t>(got);
        }
        line_counts[s] = newlines + (bounds[s + 1] > bounds[s] && last != '\n' ? 1 : 0);
    });
    std::vector<std::uint64_t> first_line(n_shards, 0);
    for (std::size_t s = 1; s < n_shards; ++s) first_line[s] = first_line[s - 1] + line_counts[s - 1];

    // Pass 2 in waves of `threads` shards, emitted in shard order.
    ExtractStats total;
    const std::size_t wave = std::max(1u, options.threads);
    for (std::size_t start = 0; start < n_shards; start += wave) {
        const std::size_t count = std::min(wave, n_shards - start);
        std::vector<ShardResult> results(count);
        parallel_for(count, options.threads, [&](std::size_t k) {
            const std::size_t s = start + k;
            std::ifstream in(path, std::ios::binary);
            in.seekg(static_cast<std::streamoff>(bounds[s]));
            std::uint64_t remaining = bounds[s + 1] - bounds[s];
            std::string line;
            auto& res = results[k];
            while (remaining > 0 && std::getline(in, line)) {
                const std::uint64_t consumed = line.size() + (in.eof() ? 0 : 1);
                remaining -= std::min(remaining, consumed);
                const std::uint64_t id = options.id_base + first_line[s] + res.stats.lines;
                if (!process_line(line, id, index, options, res.records)) ++res.stats.malformed;
                ++res.stats.lines;
            }
        });
        for (auto& res : results) {
            total.lines += res.stats.lines;
            total.malformed += res.stats.malformed;
            for (auto& r : res.records) {
                ++total.records;
                sink(std::move(r));
            }
        }
    }
    return total;
}

ExtractionReport report(std::span<const SentenceRecord> store, const VariantIndex& index, std::uint64_t threshold) {
    ExtractionReport rep;
    rep.threshold = threshold;
    std::map<std::string, StimulusCounts, std::less<>> counts;
    for (const auto& s : index.stimuli()) counts[s].stimulus = s;
    for (const auto& r : store) {
        auto& c = counts[r.stimulus];
        c.stimulus = r.stimulus;
        c.per_bin[static_cast<std::size_t>(ceat::bin_segment(r.word_count))] += 1;
        c.total += 1;
        ++rep.total_records;
    }
    for (auto& [name, c] : counts) {
        if (c.total < threshold) rep.below_threshold.push_back({name, c.total, threshold - c.total});
        rep.stimuli.push_back(std::move(c));
    }
    return rep;
}

ExtractStats ingest_supplement(std::vector<SentenceRecord>& store, const fs::path& path, const VariantIndex& index,
                               const unicode::Normalizer& normalizer) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open supplement file " + path.string());
    ExtractOptions options;
    options.source = Source::supplement;
    options.normalizer = normalizer;
    options.id_base = 0;
    for (const auto& r : store) options.id_base = std::max(options.id_base, r.sentence_id + 1);
    return extract(in, index, [&](SentenceRecord&& r) { store.push_back(std::move(r)); }, options);
}

void write_record(std::ostream& out, const SentenceRecord& r) {
    ojson j;
    j["sentence_id"] = r.sentence_id;
    j["text"] = r.text;
    j["stimulus"] = r.stimulus;
    j["matched_variant"] = r.matched_variant;
    j["token_index"] = r.token_index;
    j["word_count"] = r.word_count;
    j["source"] = std::string(to_string(r.source));
    out << j.dump() << '\n';
}

void write_records(const fs::path& path, std::span<const SentenceRecord> records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write record store " + path.string());
    for (const auto& r : records) write_record(out, r);
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SentenceRecord> read_records(std::istream& in) {
    std::vector<SentenceRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string at = "record store line " + std::to_string(line_no);
        try {
            const ojson j = ojson::parse(line);
            if (!j.is_object() || j.size() != 7) throw ParseError(at + ": unexpected key set");
            SentenceRecord r;
            r.sentence_id = j.at("sentence_id").get<std::uint64_t>();
            r.text = j.at("text").get<std::string>();
            r.stimulus = j.at("stimulus").get<std::string>();
            r.matched_variant = j.at("matched_variant").get<std::string>();
            r.token_index = j.at("token_index").get<std::uint32_t>();
            r.word_count = j.at("word_count").get<std::uint32_t>();
            const auto src = j.at("source").get<std::string>();
            if (src == "corpus") r.source = Source::corpus;
            else if (src == "supplement") r.source = Source::supplement;
            else throw ParseError(at + ": unknown source '" + src + "'");
            out.push_back(std::move(r));
        } catch (const ojson::exception& e) {
            throw ParseError(at + ": " + e.what());
        }
    }
    return out;
}

std::vector<SentenceRecord> read_records(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open record store " + path.string());
    return read_records(in);
}

bool verify_record(const SentenceRecord& r) {
    const auto tokens = unicode::split_whitespace(r.text);
    if (tokens.size() != r.word_count || r.token_index >= tokens.size()) return false;
    return unicode::strip_edge_punct(tokens[r.token_index]) == r.matched_variant;
}

} // namespace assocbias::corpus
