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

#include "assocbias/archive.hpp"

#include "assocbias/error.hpp"
#include "assocbias/unicode.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace assocbias {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

void check_shape(const EmbeddingArchive& a) {
    if (a.dim == 0) throw ValidationError("archive dim must be positive");
    if (a.matrix.size() != a.records.size() * a.dim) {
        throw ValidationError("archive matrix holds " + std::to_string(a.matrix.size()) +
                              " floats, expected count x dim = " +
                              std::to_string(a.records.size() * a.dim));
    }
    std::vector<bool> used(a.records.size(), false);
    for (const auto& r : a.records) {
        if (r.row >= a.records.size()) throw ValidationError("archive record row out of range");
        if (used[r.row]) throw ValidationError("archive record row " + std::to_string(r.row) + " repeated");
        used[r.row] = true;
    }
}

} // namespace

void write_archive(const fs::path& dir, const EmbeddingArchive& archive) {
    check_shape(archive);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create archive directory " + dir.string() + ": " + ec.message());

    ojson manifest;
    manifest["version"] = 1;
    manifest["dim"] = archive.dim;
    manifest["count"] = archive.records.size();
    manifest["dtype"] = "f32le";
    manifest["records"] = ojson::array();
    for (const auto& r : archive.records) {
        ojson jr;
        jr["row"] = r.row;
        jr["stimulus"] = r.stimulus;
        jr["sentence_id"] = r.sentence_id;
        jr["word_count"] = r.word_count;
        manifest["records"].push_back(std::move(jr));
    }
    {
        std::ofstream out(dir / kManifestFile, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + (dir / kManifestFile).string());
        out << manifest.dump(1) << '\n';
        if (!out) throw IoError("write failed: " + (dir / kManifestFile).string());
    }
    std::ofstream out(dir / kMatrixFile, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / kMatrixFile).string());
    std::vector<char> buf(archive.matrix.size() * 4);
    for (std::size_t i = 0; i < archive.matrix.size(); ++i) {
        const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(archive.matrix[i]));
        std::memcpy(buf.data() + i * 4, &bits, 4);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + (dir / kMatrixFile).string());
}

namespace {

void expect_keys(const ojson& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
    if (!obj.is_object()) throw ParseError("manifest " + where + ": expected an object");
    if (obj.size() != keys.size()) throw ParseError("manifest " + where + ": unexpected key set");
    for (auto k : keys) {
        if (!obj.contains(std::string(k))) {
            throw ParseError("manifest " + where + ": missing key \"" + std::string(k) + "\"");
        }
    }
}

template <typename T>
T get_uint(const ojson& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ParseError("manifest " + where + ": expected a non-negative integer");
    }
    return v.get<T>();
}

} // namespace

EmbeddingArchive read_archive(const fs::path& dir) {
    std::ifstream min(dir / kManifestFile, std::ios::binary);
    if (!min) throw IoError("cannot open " + (dir / kManifestFile).string());
    std::ostringstream text;
    text << min.rdbuf();

    ojson manifest;
    try {
        manifest = ojson::parse(text.str());
    } catch (const ojson::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    expect_keys(manifest, {"version", "dim", "count", "dtype", "records"}, "root");
    if (get_uint<int>(manifest["version"], "version") != 1) throw ParseError("manifest: unsupported version");
    if (manifest["dtype"] != "f32le") throw ParseError("manifest: dtype must be \"f32le\"");

    EmbeddingArchive a;
    a.dim = get_uint<std::size_t>(manifest["dim"], "dim");
    const auto count = get_uint<std::size_t>(manifest["count"], "count");
    const ojson& recs = manifest["records"];
    if (!recs.is_array()) throw ParseError("manifest records: expected an array");
    if (recs.size() != count) {
        throw ValidationError("manifest count " + std::to_string(count) + " disagrees with " +
                              std::to_string(recs.size()) + " records");
    }
    a.records.reserve(count);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const std::string at = "records[" + std::to_string(i) + "]";
        expect_keys(recs[i], {"row", "stimulus", "sentence_id", "word_count"}, at);
        ArchiveRecord r;
        r.row = get_uint<std::uint64_t>(recs[i]["row"], at + ".row");
        if (!recs[i]["stimulus"].is_string()) throw ParseError("manifest " + at + ".stimulus: expected a string");
        r.stimulus = unicode::nfc(recs[i]["stimulus"].get<std::string>());
        r.sentence_id = get_uint<std::uint64_t>(recs[i]["sentence_id"], at + ".sentence_id");
        r.word_count = get_uint<std::uint32_t>(recs[i]["word_count"], at + ".word_count");
        a.records.push_back(std::move(r));
    }

    std::ifstream bin(dir / kMatrixFile, std::ios::binary);
    if (!bin) throw IoError("cannot open " + (dir / kMatrixFile).string());
    std::vector<char> raw((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    const std::size_t expected = count * a.dim * 4;
    if (raw.size() != expected) {
        throw ValidationError("matrix.bin holds " + std::to_string(raw.size()) + " bytes, manifest implies " +
                              std::to_string(expected));
    }
    a.matrix.resize(count * a.dim);
    for (std::size_t i = 0; i < a.matrix.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, raw.data() + i * 4, 4);
        a.matrix[i] = std::bit_cast<float>(to_le(bits));
    }
    check_shape(a);
    return a;
}

} // namespace assocbias
