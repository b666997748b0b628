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

#include "assocbias/embedding.hpp"

#include "assocbias/error.hpp"
#include "assocbias/simd/kernels.hpp"
#include "assocbias/unicode.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

namespace assocbias {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string key, std::span<const float> vec) {
    if (vec.size() != dim_) {
        throw DimMismatchError("vector for '" + key + "' has " + std::to_string(vec.size()) +
                               " components, expected " + std::to_string(dim_));
    }
    for (float x : vec) {
        if (!std::isfinite(x)) throw NonFiniteError("vector for '" + key + "' has a non-finite component");
    }
    if (simd::sum_squares(vec) == 0.0) throw ZeroNormError("vector for '" + key + "' has zero norm");
    if (index_.contains(key)) throw ValidationError("duplicate embedding key '" + key + "'");
    index_.emplace(key, keys_.size());
    keys_.push_back(std::move(key));
    data_.insert(data_.end(), vec.begin(), vec.end());
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view key) const {
    auto it = index_.find(std::string(key));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

} // namespace

EmbeddingTable parse_text_vectors(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<EmbeddingTable> table;
    std::optional<std::size_t> declared_count;
    std::vector<float> buf;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split_spaces(line);
        if (fields.empty()) continue;

        if (line_no == 1 && fields.size() == 2) {
            std::size_t count = 0;
            std::size_t dim = 0;
            if (parse_number(fields[0], count) && parse_number(fields[1], dim)) {
                declared_count = count;
                table.emplace(dim);
                continue;
            }
        }
        if (fields.size() < 2) {
            throw ParseError("vectors line " + std::to_string(line_no) + ": expected a word and components");
        }
        const std::size_t dim = fields.size() - 1;
        if (!table) table.emplace(dim);
        if (dim != table->dim()) {
            throw DimMismatchError("vectors line " + std::to_string(line_no) + ": " + std::to_string(dim) +
                                   " components, expected " + std::to_string(table->dim()));
        }
        buf.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            if (!parse_number(fields[k + 1], buf[k])) {
                throw ParseError("vectors line " + std::to_string(line_no) + ": bad number '" +
                                 std::string(fields[k + 1]) + "'");
            }
        }
        std::string key;
        try {
            key = unicode::nfc(fields[0]);
        } catch (const ParseError&) {
            throw ParseError("vectors line " + std::to_string(line_no) + ": malformed UTF-8 word");
        }
        table->add(std::move(key), buf);
    }
    if (!table) throw ParseError("vectors file is empty");
    if (declared_count && *declared_count != table->size()) {
        throw ParseError("vectors header declares " + std::to_string(*declared_count) +
                         " records, found " + std::to_string(table->size()));
    }
    return std::move(*table);
}

EmbeddingTable load_text_vectors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vectors file: " + path.string());
    return parse_text_vectors(in);
}

} // namespace assocbias
