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

// Result rows and their CSV / table renderings.

#include "assocbias/assoc_stats.hpp"
#include "assocbias/ceat.hpp"
#include "assocbias/corpus.hpp"
#include "assocbias/mlm_probe.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace assocbias::report {

enum class Method { weat, seat, ceat, logprob };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view text);

/// 0.005 for ceat, 0.05 otherwise.
double default_level(Method m);

struct ResultRow {
    std::string category;
    Method method = Method::weat;
    std::string bin;   // ceat only
    std::string mode;  // ceat only: "f" or "r"
    std::uint64_t n = 0;  // permutations, or pooled samples for ceat
    double effect = 0.0;  // d, or CES
    std::optional<double> se;  // ceat only
    double p = 1.0;
    bool significant = false;
    Magnitude magnitude = Magnitude::negligible;
    std::string permutation_mode;  // weat/seat/logprob only
};

ResultRow make_row(std::string category, Method method, const EffectSizeResult& r, double level);
ResultRow make_row(std::string category, const ceat::CeatResult& r, ceat::SegmentBin bin, ceat::SamplingMode mode);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

inline constexpr std::string_view kEffectHeader =
    "category,method,d,p,n_permutations,permutation_mode,significant,magnitude";
inline constexpr std::string_view kCeatHeader = "category,bin,mode,N,CES,SE,p,significant,magnitude";
inline constexpr std::string_view kScatterHeader = "structure,p_prior,corrected";
inline constexpr std::string_view kExtractionHeader = "stimulus,≤9,10–25,26–75,>75,total,deficit";

void write_effect_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_ceat_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_scatter_csv(std::ostream& out, std::span<const mlm::ScatterRow> rows);
void write_extraction_csv(std::ostream& out, const corpus::ExtractionReport& rep);

/// Reads either CSV layout above, chosen by its header line.
std::vector<ResultRow> read_result_csv(std::istream& in);

/// Plain-text table of rows sorted by (category, method). Significant
/// effects carry a trailing '*'; the shade column maps small/medium/large
/// magnitudes to light/medium/dark.
std::string render_table(std::vector<ResultRow> rows);

/// Full pooled result including per-sample effects.
std::string ceat_json(const std::string& category, const ceat::CeatResult& r, ceat::SegmentBin bin,
                      ceat::SamplingMode mode);

} // namespace assocbias::report
