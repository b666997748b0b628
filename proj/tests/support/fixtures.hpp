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

#include "assocbias/archive.hpp"
#include "assocbias/assoc_stats.hpp"
#include "assocbias/lexicon.hpp"

#include "oracles.hpp"

#include <atomic>
#include <deque>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace fixture {

/// Owns float copies of oracle vectors and hands out spans over them.
class FloatSets {
public:
    assocbias::VectorSet add(const oracle::Set& set) {
        assocbias::VectorSet out;
        for (const auto& v : set) {
            store_.push_back(std::vector<float>(v.begin(), v.end()));
        }
        for (std::size_t i = store_.size() - set.size(); i < store_.size(); ++i) out.emplace_back(store_[i]);
        return out;
    }

private:
    std::deque<std::vector<float>> store_;
};

class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("assocbias-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline assocbias::Stimulus stim(std::string surface) {
    return {std::move(surface), std::nullopt, {}};
}

/// Category with stimuli named <prefix><role letter><index>.
inline assocbias::Category make_category(const std::string& id, std::size_t per_set) {
    assocbias::Category c;
    c.id = id;
    c.label = id;
    const char* letters = "xyab";
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t i = 0; i < per_set; ++i) {
            c.set(assocbias::kAllRoles[r]).push_back(stim(std::string(1, letters[r]) + std::to_string(i)));
        }
    }
    return c;
}

/// Per-stimulus context populations for CEAT. Each stimulus gets `contexts`
/// rows of base + noise in every requested word count.
struct ContextSpec {
    std::uint32_t word_count;
    double noise;
};

inline assocbias::EmbeddingArchive synthetic_store(
    const assocbias::Category& c, const std::vector<std::vector<double>>& bases, std::size_t contexts,
    const std::vector<ContextSpec>& lengths, std::uint64_t seed) {
    assocbias::EmbeddingArchive a;
    a.dim = bases.front().size();
    std::mt19937_64 g(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uint64_t sid = 0;
    std::size_t k = 0;
    for (assocbias::Role role : assocbias::kAllRoles) {
        for (const auto& s : c.set(role)) {
            const auto& base = bases[k++];
            for (const auto& spec : lengths) {
                for (std::size_t i = 0; i < contexts; ++i) {
                    assocbias::ArchiveRecord r;
                    r.row = a.records.size();
                    r.stimulus = s.surface;
                    r.sentence_id = sid++;
                    r.word_count = spec.word_count;
                    a.records.push_back(r);
                    for (double b : base) a.matrix.push_back(static_cast<float>(b + spec.noise * n(g)));
                }
            }
        }
    }
    return a;
}

} // namespace fixture
