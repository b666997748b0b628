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

// Embedding archive: a directory holding manifest.json and matrix.bin
// (count x dim little-endian float32, row-major). Round trips are bit-exact.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace assocbias {

struct ArchiveRecord {
    std::uint64_t row = 0;
    std::string stimulus;
    std::uint64_t sentence_id = 0;
    std::uint32_t word_count = 0;

    bool operator==(const ArchiveRecord&) const = default;
};

struct EmbeddingArchive {
    std::size_t dim = 0;
    std::vector<ArchiveRecord> records;
    std::vector<float> matrix;

    std::size_t count() const noexcept { return records.size(); }
    std::span<const float> row(std::size_t i) const { return {matrix.data() + i * dim, dim}; }
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kMatrixFile = "matrix.bin";

/// Creates `dir` if needed and writes both files.
void write_archive(const std::filesystem::path& dir, const EmbeddingArchive& archive);

/// Throws IoError, ParseError (malformed manifest) or ValidationError
/// (count/dim/byte-length disagreement, duplicate or out-of-range rows).
EmbeddingArchive read_archive(const std::filesystem::path& dir);

} // namespace assocbias
