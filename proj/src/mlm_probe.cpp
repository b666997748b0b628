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

#include "assocbias/mlm_probe.hpp"

#include "assocbias/error.hpp"
#include "assocbias/unicode.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace assocbias::mlm {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Structure s) {
    static constexpr std::string_view names[] = {"S1", "S2", "S3", "S4", "S5"};
    return names[static_cast<int>(s)];
}

std::string_view to_string(Polarity p) {
    switch (p) {
    case Polarity::positive_trait: return "positive_trait";
    case Polarity::negative_trait: return "negative_trait";
    case Polarity::none: return "none";
    }
    return "none";
}

std::string_view to_string(MaskRole r) {
    return r == MaskRole::target_only ? "target_only" : "target_and_attribute";
}

std::optional<Structure> parse_structure(std::string_view text) {
    for (int i = 0; i < 5; ++i) {
        if (text == to_string(static_cast<Structure>(i))) return static_cast<Structure>(i);
    }
    return std::nullopt;
}

std::optional<Polarity> parse_polarity(std::string_view text) {
    for (Polarity p : {Polarity::positive_trait, Polarity::negative_trait, Polarity::none}) {
        if (text == to_string(p)) return p;
    }
    return std::nullopt;
}

namespace {

std::size_t count_of(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

} // namespace

void validate_template(const Template& t) {
    const auto targets = count_of(t.text, kTargetSlot);
    const auto attributes = count_of(t.text, kAttributeSlot);
    if (targets != 1 || attributes != 1) {
        throw PlaceholderError("template '" + t.id + "' must hold exactly one " + std::string(kTargetSlot) +
                               " and one " + std::string(kAttributeSlot) + " (found " + std::to_string(targets) +
                               " and " + std::to_string(attributes) + ")");
    }
    if (count_of(t.text, kMask) != 0) {
        throw PlaceholderError("template '" + t.id + "' already contains " + std::string(kMask));
    }
}

std::string instantiate(const Template& t, std::string_view target, std::string_view attribute) {
    validate_template(t);
    const std::string_view text = t.text;
    const auto tpos = text.find(kTargetSlot);
    const auto apos = text.find(kAttributeSlot);
    std::string out;
    out.reserve(text.size() + target.size() + attribute.size());
    if (tpos < apos) {
        out.append(text.substr(0, tpos)).append(target);
        out.append(text.substr(tpos + kTargetSlot.size(), apos - tpos - kTargetSlot.size())).append(attribute);
        out.append(text.substr(apos + kAttributeSlot.size()));
    } else {
        out.append(text.substr(0, apos)).append(attribute);
        out.append(text.substr(apos + kAttributeSlot.size(), tpos - apos - kAttributeSlot.size())).append(target);
        out.append(text.substr(tpos + kTargetSlot.size()));
    }
    return out;
}

std::vector<Template> parse_templates(std::string_view json_text) {
    ojson root;
    try {
        root = ojson::parse(json_text);
    } catch (const ojson::parse_error& e) {
        throw ParseError(std::string("templates: ") + e.what());
    }
    if (!root.is_object() || root.size() != 2 || !root.contains("version") || !root.contains("templates")) {
        throw ParseError("templates: expected {\"version\":1,\"templates\":[...]}");
    }
    if (root["version"] != 1) throw ParseError("templates: unsupported version");
    const ojson& arr = root["templates"];
    if (!arr.is_array()) throw ParseError("templates: \"templates\" must be an array");

    std::vector<Template> out;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const ojson& jt = arr[i];
        const std::string at = "templates[" + std::to_string(i) + "]";
        if (!jt.is_object() || jt.size() != 4) throw ParseError(at + ": expected id, structure, text, polarity");
        for (const char* key : {"id", "structure", "text", "polarity"}) {
            if (!jt.contains(key) || !jt[key].is_string()) throw ParseError(at + ": missing string \"" + key + "\"");
        }
        Template t;
        t.id = jt["id"].get<std::string>();
        auto s = parse_structure(jt["structure"].get<std::string>());
        if (!s) throw ParseError(at + ": structure must be one of S1..S5");
        t.structure = *s;
        t.text = unicode::nfc(jt["text"].get<std::string>());
        auto p = parse_polarity(jt["polarity"].get<std::string>());
        if (!p) throw ParseError(at + ": polarity must be positive_trait, negative_trait or none");
        t.polarity = *p;
        if (t.id.empty() || t.id.find(':') != std::string::npos) {
            throw ParseError(at + ": id must be non-empty and free of ':'");
        }
        if (!ids.insert(t.id).second) throw ValidationError("templates: duplicate id '" + t.id + "'");
        validate_template(t);
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Template> load_templates(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open templates file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_templates(buf.str());
}

std::vector<ProbQuery> build_queries(const Template& t, std::span<const std::string> targets,
                                     std::span<const std::string> attributes) {
    if (targets.empty() || attributes.empty()) throw EmptySetError("build_queries needs targets and attributes");
    validate_template(t);
    const bool target_first = t.text.find(kTargetSlot) < t.text.find(kAttributeSlot);
    const std::string prior_text = instantiate(t, kMask, kMask);

    std::vector<ProbQuery> out;
    out.reserve(2 * targets.size() * attributes.size());
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        for (std::size_t ai = 0; ai < attributes.size(); ++ai) {
            const std::string stem = t.id + ":" + std::to_string(ti) + ":" + std::to_string(ai) + ":";
            out.push_back({stem + "fill", instantiate(t, kMask, attributes[ai]), targets[ti],
                           MaskRole::target_only, 0});
            out.push_back({stem + "prior", prior_text, targets[ti], MaskRole::target_and_attribute,
                           target_first ? 0 : 1});
        }
    }
    return out;
}

double corrected_score(double p_tgt, double p_prior) {
    if (std::isnan(p_tgt) || std::isnan(p_prior)) throw ValidationError("probability is NaN");
    if (p_tgt <= 0.0 || p_prior <= 0.0) {
        throw NonPositiveProbabilityError("corrected score needs positive probabilities");
    }
    if (p_tgt > 1.0 || p_prior > 1.0) throw ValidationError("probability exceeds 1");
    return std::log(p_tgt / p_prior);
}

std::vector<LogProbScore> score_answers(std::span<const Template> templates,
                                        std::span<const std::string> targets,
                                        std::span<const std::string> attributes,
                                        std::span<const ProbAnswer> answers) {
    std::unordered_map<std::string_view, double> by_id;
    by_id.reserve(answers.size());
    for (const auto& a : answers) by_id.emplace(a.id, a.probability);

    std::vector<LogProbScore> out;
    out.reserve(templates.size() * targets.size() * attributes.size());
    for (const Template& t : templates) {
        const auto queries = build_queries(t, targets, attributes);
        for (std::size_t q = 0; q < queries.size(); q += 2) {
            const std::size_t ti = (q / 2) / attributes.size();
            const std::size_t ai = (q / 2) % attributes.size();
            const auto fill = by_id.find(queries[q].id);
            const auto prior = by_id.find(queries[q + 1].id);
            if (fill == by_id.end() || prior == by_id.end()) {
                const auto& missing = fill == by_id.end() ? queries[q].id : queries[q + 1].id;
                throw MissingScoreError("no answer for template '" + t.id + "', target '" + targets[ti] +
                                        "', attribute '" + attributes[ai] + "' (query " + missing + ")");
            }
            LogProbScore s;
            s.template_id = t.id;
            s.structure = t.structure;
            s.target = targets[ti];
            s.attribute = attributes[ai];
            s.p_tgt = fill->second;
            s.p_prior = prior->second;
            s.corrected = corrected_score(s.p_tgt, s.p_prior);
            out.push_back(std::move(s));
        }
    }
    return out;
}

EffectSizeResult aggregate(std::span<const LogProbScore> scores, std::span<const std::string> male_terms,
                           std::span<const std::string> female_terms, std::span<const std::string> attributes_a,
                           std::span<const std::string> attributes_b, const PermutationOptions& options) {
    if (male_terms.empty() || female_terms.empty() || attributes_a.empty() || attributes_b.empty()) {
        throw EmptySetError("aggregate needs non-empty target and attribute sets");
    }
    // (target, attribute) -> (sum, count) over templates
    std::map<std::pair<std::string_view, std::string_view>, std::pair<double, int>> cells;
    for (const auto& s : scores) {
        auto& cell = cells[{s.target, s.attribute}];
        cell.first += s.corrected;
        cell.second += 1;
    }
    auto cell_mean = [&](const std::string& t, const std::string& w) {
        auto it = cells.find({t, w});
        if (it == cells.end()) {
            throw MissingScoreError("no score for target '" + t + "' with attribute '" + w + "'");
        }
        return it->second.first / it->second.second;
    };
    auto differential = [&](const std::string& w) {
        double male = 0.0;
        for (const auto& t : male_terms) male += cell_mean(t, w);
        double female = 0.0;
        for (const auto& t : female_terms) female += cell_mean(t, w);
        return male / static_cast<double>(male_terms.size()) - female / static_cast<double>(female_terms.size());
    };
    std::vector<double> sa;
    for (const auto& w : attributes_a) sa.push_back(differential(w));
    std::vector<double> sb;
    for (const auto& w : attributes_b) sb.push_back(differential(w));
    return weat_from_scores(sa, sb, options);
}

std::vector<ScatterRow> scatter_data(std::span<const LogProbScore> scores) {
    std::vector<const LogProbScore*> order;
    order.reserve(scores.size());
    for (const auto& s : scores) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const LogProbScore* l, const LogProbScore* r) {
        return std::tie(l->structure, l->template_id, l->target, l->attribute) <
               std::tie(r->structure, r->template_id, r->target, r->attribute);
    });
    std::vector<ScatterRow> out;
    out.reserve(order.size());
    for (const auto* s : order) out.push_back({s->structure, s->p_prior, s->corrected});
    return out;
}

void write_queries(std::ostream& out, std::span<const ProbQuery> queries) {
    for (const auto& q : queries) {
        ojson j;
        j["id"] = q.id;
        j["masked_text"] = q.masked_text;
        j["candidate"] = q.candidate;
        j["mask_role"] = std::string(to_string(q.mask_role));
        j["target_mask"] = q.target_mask;
        out << j.dump() << '\n';
    }
}

std::vector<ProbQuery> read_queries(std::istream& in) {
    std::vector<ProbQuery> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string at = "queries line " + std::to_string(line_no);
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const ojson::parse_error& e) {
            throw ParseError(at + ": " + e.what());
        }
        ProbQuery q;
        try {
            q.id = j.at("id").get<std::string>();
            q.masked_text = j.at("masked_text").get<std::string>();
            q.candidate = j.at("candidate").get<std::string>();
            const auto role = j.at("mask_role").get<std::string>();
            if (role == "target_only") q.mask_role = MaskRole::target_only;
            else if (role == "target_and_attribute") q.mask_role = MaskRole::target_and_attribute;
            else throw ParseError(at + ": unknown mask_role '" + role + "'");
            q.target_mask = j.contains("target_mask") ? j["target_mask"].get<int>() : 0;
        } catch (const ojson::exception& e) {
            throw ParseError(at + ": " + e.what());
        }
        out.push_back(std::move(q));
    }
    return out;
}

void write_answers(std::ostream& out, std::span<const ProbAnswer> answers) {
    for (const auto& a : answers) {
        ojson j;
        j["id"] = a.id;
        j["probability"] = a.probability;
        out << j.dump() << '\n';
    }
}

std::vector<ProbAnswer> read_answers(std::istream& in) {
    std::vector<ProbAnswer> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string at = "answers line " + std::to_string(line_no);
        ProbAnswer a;
        try {
            const ojson j = ojson::parse(line);
            if (!j.is_object() || j.size() != 2) throw ParseError(at + ": expected {\"id\",\"probability\"}");
            a.id = j.at("id").get<std::string>();
            if (!j.at("probability").is_number()) throw ParseError(at + ": probability must be a number");
            a.probability = j.at("probability").get<double>();
        } catch (const ojson::exception& e) {
            throw ParseError(at + ": " + e.what());
        }
        if (!(a.probability > 0.0 && a.probability <= 1.0)) {
            throw ParseError(at + ": probability must lie in (0, 1]");
        }
        if (!seen.insert(a.id).second) throw ParseError(at + ": duplicate id '" + a.id + "'");
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace assocbias::mlm
