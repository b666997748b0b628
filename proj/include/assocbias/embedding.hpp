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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace assocbias {

/// Keyed table of float32 vectors with a common dimension. Every row has a
/// non-zero norm and keys are unique.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return keys_.size(); }

    /// Throws DimMismatchError, ZeroNormError, NonFiniteError, or ValidationError on a duplicate key.
    void add(std::string key, std::span<const float> vec);

    std::span<const float> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    const std::string& key(std::size_t i) const { return keys_[i]; }
    std::optional<std::size_t> find(std::string_view key) const;

private:
    std::size_t dim_;
    std::vector<std::string> keys_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Reads the word2vec/GloVe text layout: one "word f1 ... fD" record per
/// line, with an optional leading "count dim" line. Keys are NFC-normalized.
EmbeddingTable parse_text_vectors(std::istream& in);
EmbeddingTable load_text_vectors(const std::filesystem::path& path);

} // namespace assocbias
