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

// Suffix-aware sentence extraction.
//
// Each stimulus expands to its root plus root+suffix for every suffix in its
// group. A sentence matches when one of its whitespace tokens, after edge
// punctuation is stripped, equals a variant exactly.

#include "assocbias/lexicon.hpp"
#include "assocbias/unicode.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace assocbias::corpus {

enum class Source { corpus, supplement };
std::string_view to_string(Source s);

struct SentenceRecord {
    std::uint64_t sentence_id = 0;
    std::string text;               // normalized sentence
    std::string stimulus;           // root surface
    std::string matched_variant;
    std::uint32_t token_index = 0;  // 0-based whitespace token position
    std::uint32_t word_count = 0;
    Source source = Source::corpus;

    bool operator==(const SentenceRecord&) const = default;
};

/// {root} u {root + s : s in the stimulus's suffix group}, NFC-normalized.
/// Throws DanglingGroupError when the referenced group is missing.
std::set<std::string> generate_variants(const Stimulus& stimulus, std::span<const SuffixGroup> groups);

/// Immutable variant -> stimulus map over every stimulus of a lexicon.
class VariantIndex {
public:
    /// Throws VariantCollisionError when two different stimuli produce the same
    /// variant, and ValidationError when one surface is linked to two groups.
    VariantIndex(std::span<const Stimulus> stimuli, std::span<const SuffixGroup> groups);
    static VariantIndex from_lexicon(const Lexicon& lexicon);

    /// Root surface owning `token`, or nullptr.
    const std::string* lookup(const std::string& token) const;

    /// Sorted, unique root surfaces.
    const std::vector<std::string>& stimuli() const noexcept { return stimuli_; }
    std::size_t variant_count() const noexcept { return variants_.size(); }

private:
    std::vector<std::string> stimuli_;
    std::unordered_map<std::string, std::size_t> variants_;
};

/// Records for one already-normalized sentence, ordered by first matching token.
std::vector<SentenceRecord> match_sentence(std::string_view text, std::uint64_t sentence_id,
                                           const VariantIndex& index, Source source = Source::corpus);

struct ExtractOptions {
    unsigned shards = 1;
    unsigned threads = 1;
    Source source = Source::corpus;
    /// Added to the 0-based line number to form sentence ids.
    std::uint64_t id_base = 0;
    unicode::Normalizer normalizer = unicode::default_normalizer();
};

struct ExtractStats {
    std::uint64_t lines = 0;
    std::uint64_t malformed = 0;  // invalid UTF-8 lines, skipped
    std::uint64_t records = 0;
};

using RecordSink = std::function<void(SentenceRecord&&)>;

/// Serial streaming extraction, one sentence per line.
ExtractStats extract(std::istream& in, const VariantIndex& index, const RecordSink& sink,
                     const ExtractOptions& options = {});

/// Sharded extraction over line-aligned byte ranges. Output order and content
/// equal extract() on the same bytes for any shard or thread count.
ExtractStats extract_file(const std::filesystem::path& path, const VariantIndex& index, const RecordSink& sink,
                          const ExtractOptions& options = {});

struct StimulusCounts {
    std::string stimulus;
    std::array<std::uint64_t, 4> per_bin{};  // indexed by ceat::SegmentBin
    std::uint64_t total = 0;
};

struct Deficit {
    std::string stimulus;
    std::uint64_t count;
    std::uint64_t missing;
};

struct ExtractionReport {
    std::uint64_t threshold = 0;
    std::uint64_t total_records = 0;
    std::vector<StimulusCounts> stimuli;  // one per index stimulus, sorted
    std::vector<Deficit> below_threshold;
};

inline constexpr std::uint64_t kDefaultMinSentences = 5;

ExtractionReport report(std::span<const SentenceRecord> store, const VariantIndex& index,
                        std::uint64_t threshold = kDefaultMinSentences);

/// Matches a supplemental sentence file and appends hits tagged
/// Source::supplement, with ids continuing after the largest id in `store`.
ExtractStats ingest_supplement(std::vector<SentenceRecord>& store, const std::filesystem::path& path,
                               const VariantIndex& index,
                               const unicode::Normalizer& normalizer = unicode::default_normalizer());

// Record store: JSON lines.
void write_record(std::ostream& out, const SentenceRecord& record);
void write_records(const std::filesystem::path& path, std::span<const SentenceRecord> records);
std::vector<SentenceRecord> read_records(std::istream& in);
std::vector<SentenceRecord> read_records(const std::filesystem::path& path);

/// Re-tokenizes the stored text and checks the token invariant.
bool verify_record(const SentenceRecord& record);

} // namespace assocbias::corpus
