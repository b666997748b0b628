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

#include "assocbias/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace assocbias::report {

std::string_view to_string(Method m) {
    switch (m) {
    case Method::weat: return "weat";
    case Method::seat: return "seat";
    case Method::ceat: return "ceat";
    case Method::logprob: return "logprob";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view text) {
    for (Method m : {Method::weat, Method::seat, Method::ceat, Method::logprob}) {
        if (text == to_string(m)) return m;
    }
    return std::nullopt;
}

double default_level(Method m) {
    return m == Method::ceat ? 0.005 : 0.05;
}

ResultRow make_row(std::string category, Method method, const EffectSizeResult& r, double level) {
    ResultRow row;
    row.category = std::move(category);
    row.method = method;
    row.n = r.n_permutations;
    row.effect = r.d;
    row.p = r.p_value;
    row.significant = r.p_value < level;
    row.magnitude = r.magnitude;
    row.permutation_mode = std::string(to_string(r.permutation_mode));
    return row;
}

ResultRow make_row(std::string category, const ceat::CeatResult& r, ceat::SegmentBin bin, ceat::SamplingMode mode) {
    ResultRow row;
    row.category = std::move(category);
    row.method = Method::ceat;
    row.bin = std::string(ceat::label(bin));
    row.mode = std::string(ceat::to_string(mode));
    row.n = r.n;
    row.effect = r.ces;
    row.se = r.se;
    row.p = r.p_two_tailed;
    row.significant = r.significant;
    row.magnitude = r.magnitude;
    return row;
}

std::string format_number(double v) {
    return fmt::format("{}", v);
}

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(where + ": bad number '" + s + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& where) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(where + ": bad integer '" + s + "'");
    return v;
}

Magnitude parse_magnitude(const std::string& s, const std::string& where) {
    for (Magnitude m : {Magnitude::negligible, Magnitude::small, Magnitude::medium, Magnitude::large}) {
        if (s == to_string(m)) return m;
    }
    throw ParseError(where + ": unknown magnitude '" + s + "'");
}

bool parse_bool(const std::string& s, const std::string& where) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError(where + ": expected true or false, got '" + s + "'");
}

std::string_view shade(Magnitude m) {
    switch (m) {
    case Magnitude::small: return "light";
    case Magnitude::medium: return "medium";
    case Magnitude::large: return "dark";
    case Magnitude::negligible: return "-";
    }
    return "-";
}

// display width in code points
std::size_t width(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xc0) != 0x80; }));
}

} // namespace

void write_effect_csv(std::ostream& out, std::span<const ResultRow> rows) {
    out << kEffectHeader << '\n';
    for (const auto& r : rows) {
        out << csv_field(r.category) << ',' << to_string(r.method) << ',' << format_number(r.effect) << ','
            << format_number(r.p) << ',' << r.n << ',' << r.permutation_mode << ','
            << (r.significant ? "true" : "false") << ',' << to_string(r.magnitude) << '\n';
    }
}

void write_ceat_csv(std::ostream& out, std::span<const ResultRow> rows) {
    out << kCeatHeader << '\n';
    for (const auto& r : rows) {
        out << csv_field(r.category) << ',' << csv_field(r.bin) << ',' << r.mode << ',' << r.n << ','
            << format_number(r.effect) << ',' << format_number(r.se.value_or(NAN)) << ',' << format_number(r.p)
            << ',' << (r.significant ? "true" : "false") << ',' << to_string(r.magnitude) << '\n';
    }
}

void write_scatter_csv(std::ostream& out, std::span<const mlm::ScatterRow> rows) {
    out << kScatterHeader << '\n';
    for (const auto& r : rows) {
        out << mlm::to_string(r.structure) << ',' << format_number(r.p_prior) << ',' << format_number(r.corrected)
            << '\n';
    }
}

void write_extraction_csv(std::ostream& out, const corpus::ExtractionReport& rep) {
    out << kExtractionHeader << '\n';
    for (const auto& s : rep.stimuli) {
        const std::uint64_t deficit = s.total < rep.threshold ? rep.threshold - s.total : 0;
        out << csv_field(s.stimulus) << ',' << s.per_bin[0] << ',' << s.per_bin[1] << ',' << s.per_bin[2] << ','
            << s.per_bin[3] << ',' << s.total << ',' << deficit << '\n';
    }
}

std::vector<ResultRow> read_result_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) return {};
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const bool is_ceat = header == kCeatHeader;
    if (!is_ceat && header != kEffectHeader) throw ParseError("unrecognized result CSV header: " + header);

    std::vector<ResultRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string at = "result CSV line " + std::to_string(line_no);
        const auto f = split_csv(line);
        ResultRow r;
        if (is_ceat) {
            if (f.size() != 9) throw ParseError(at + ": expected 9 fields");
            r.category = f[0];
            r.method = Method::ceat;
            r.bin = f[1];
            r.mode = f[2];
            r.n = parse_uint(f[3], at);
            r.effect = parse_double(f[4], at);
            r.se = parse_double(f[5], at);
            r.p = parse_double(f[6], at);
            r.significant = parse_bool(f[7], at);
            r.magnitude = parse_magnitude(f[8], at);
        } else {
            if (f.size() != 8) throw ParseError(at + ": expected 8 fields");
            r.category = f[0];
            auto m = parse_method(f[1]);
            if (!m) throw ParseError(at + ": unknown method '" + f[1] + "'");
            r.method = *m;
            r.effect = parse_double(f[2], at);
            r.p = parse_double(f[3], at);
            r.n = parse_uint(f[4], at);
            r.permutation_mode = f[5];
            r.significant = parse_bool(f[6], at);
            r.magnitude = parse_magnitude(f[7], at);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_table(std::vector<ResultRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& l, const ResultRow& r) {
        return std::tie(l.category, l.method) < std::tie(r.category, r.method);
    });

    std::vector<std::array<std::string, 8>> cells;
    cells.push_back({"category", "method", "bin", "mode", "effect", "p", "magnitude", "shade"});
    for (const auto& r : rows) {
        cells.push_back({r.category, std::string(to_string(r.method)), r.bin.empty() ? "-" : r.bin,
                         r.mode.empty() ? "-" : r.mode,
                         fmt::format("{:.3f}{}", r.effect, r.significant ? "*" : ""), fmt::format("{:.3g}", r.p),
                         std::string(to_string(r.magnitude)), std::string(shade(r.magnitude))});
    }
    std::array<std::size_t, 8> widths{};
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
    }
    std::ostringstream os;
    for (const auto& row : cells) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) line += "  ";
            line += row[c];
            line.append(widths[c] - width(row[c]), ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        os << line << '\n';
    }
    os << "* significant at the run's level (default p < 0.05 for weat/seat/logprob, p < 0.005 for ceat)\n";
    return os.str();
}

std::string ceat_json(const std::string& category, const ceat::CeatResult& r, ceat::SegmentBin bin,
                      ceat::SamplingMode mode) {
    nlohmann::ordered_json j;
    j["category"] = category;
    j["bin"] = std::string(ceat::label(bin));
    j["mode"] = std::string(ceat::to_string(mode));
    j["seed"] = r.seed;
    j["n"] = r.n;
    j["ces"] = r.ces;
    j["se"] = r.se;
    j["p"] = r.p_two_tailed;
    j["significant"] = r.significant;
    j["magnitude"] = std::string(to_string(r.magnitude));
    j["sigma2_between"] = r.sigma2_between;
    j["q"] = r.q;
    j["c"] = r.c;
    auto& samples = j["samples"] = nlohmann::ordered_json::array();
    for (const auto& s : r.samples) {
        samples.push_back({{"es", s.es}, {"v_in", s.v_in}, {"w", s.w}, {"weight", s.weight}});
    }
    return j.dump();
}

} // namespace assocbias::report
