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

// Log-probability bias probing of masked language models. Queries are
// exchanged with an external model bridge as JSON-lines files.

#include "assocbias/assoc_stats.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace assocbias::mlm {

inline constexpr std::string_view kTargetSlot = "[TARGET]";
inline constexpr std::string_view kAttributeSlot = "[ATTRIBUTE]";
inline constexpr std::string_view kMask = "[MASK]";

/// Sentence structures with increasing context, S1 (none) to S5 (multi-sentence, natural text).
enum class Structure { S1, S2, S3, S4, S5 };
enum class Polarity { positive_trait, negative_trait, none };

std::string_view to_string(Structure s);
std::string_view to_string(Polarity p);
std::optional<Structure> parse_structure(std::string_view text);
std::optional<Polarity> parse_polarity(std::string_view text);

struct Template {
    std::string id;
    Structure structure = Structure::S1;
    std::string text;
    Polarity polarity = Polarity::none;
};

/// Throws PlaceholderError unless `text` holds exactly one [TARGET], exactly
/// one [ATTRIBUTE] and no literal [MASK].
void validate_template(const Template& t);

std::string instantiate(const Template& t, std::string_view target, std::string_view attribute);

/// Templates file: {"version":1,"templates":[{"id","structure","text","polarity"},...]}.
std::vector<Template> parse_templates(std::string_view json_text);
std::vector<Template> load_templates(const std::filesystem::path& path);

enum class MaskRole { target_only, target_and_attribute };
std::string_view to_string(MaskRole r);

struct ProbQuery {
    std::string id;
    std::string masked_text;
    std::string candidate;
    MaskRole mask_role = MaskRole::target_only;
    /// Which [MASK] occurrence (0-based) is the target slot.
    int target_mask = 0;
};

struct ProbAnswer {
    std::string id;
    double probability = 0.0;
};

/// Two queries per (target, attribute) pair, target-major: the fill query
/// (only the target masked) then the prior query (both masked). Ids are
/// "<template>:<target index>:<attribute index>:fill|prior".
std::vector<ProbQuery> build_queries(const Template& t, std::span<const std::string> targets,
                                     std::span<const std::string> attributes);

/// ln(p_tgt / p_prior). Throws NonPositiveProbabilityError for p <= 0 and
/// ValidationError for p > 1 or NaN.
double corrected_score(double p_tgt, double p_prior);

struct LogProbScore {
    std::string template_id;
    Structure structure = Structure::S1;
    std::string target;
    std::string attribute;
    double p_tgt = 0.0;
    double p_prior = 0.0;
    double corrected = 0.0;
};

/// Joins answers back onto the queries build_queries would emit for the same
/// inputs. Throws MissingScoreError naming the first uncovered pair.
std::vector<LogProbScore> score_answers(std::span<const Template> templates,
                                        std::span<const std::string> targets,
                                        std::span<const std::string> attributes,
                                        std::span<const ProbAnswer> answers);

/// Category effect size from corrected scores. Per attribute word w,
///   s(w) = mean_{t in male} score(t, w) - mean_{t in female} score(t, w)
/// (averaged over templates), then Cohen's d of s over A versus B with the
/// permutation test reassigning attribute words between A and B.
EffectSizeResult aggregate(std::span<const LogProbScore> scores, std::span<const std::string> male_terms,
                           std::span<const std::string> female_terms, std::span<const std::string> attributes_a,
                           std::span<const std::string> attributes_b, const PermutationOptions& options = {});

struct ScatterRow {
    Structure structure;
    double p_prior;
    double corrected;
};

/// One row per score ordered by (structure, template id, target, attribute).
std::vector<ScatterRow> scatter_data(std::span<const LogProbScore> scores);

void write_queries(std::ostream& out, std::span<const ProbQuery> queries);
std::vector<ProbQuery> read_queries(std::istream& in);
void write_answers(std::ostream& out, std::span<const ProbAnswer> answers);
/// Throws ParseError on malformed lines, duplicate ids or probabilities outside (0, 1].
std::vector<ProbAnswer> read_answers(std::istream& in);

} // namespace assocbias::mlm
