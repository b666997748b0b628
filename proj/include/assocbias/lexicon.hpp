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

// Stimulus vocabulary: categories of target/attribute word sets and the
// suffix groups used to expand root words into surface variants.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace assocbias {

struct SuffixGroup {
    std::string id;
    std::vector<std::string> suffixes;

    bool operator==(const SuffixGroup&) const = default;
};

struct Stimulus {
    std::string surface;
    std::optional<std::string> suffix_group;
    std::string notes;

    bool operator==(const Stimulus&) const = default;
};

enum class Role { targets_x, targets_y, attributes_a, attributes_b };

inline constexpr std::array<Role, 4> kAllRoles{Role::targets_x, Role::targets_y,
                                               Role::attributes_a, Role::attributes_b};

std::string_view to_string(Role role);

struct Category {
    std::string id;
    std::string label;
    std::vector<Stimulus> targets_x;
    std::vector<Stimulus> targets_y;
    std::vector<Stimulus> attributes_a;
    std::vector<Stimulus> attributes_b;

    const std::vector<Stimulus>& set(Role role) const;
    std::vector<Stimulus>& set(Role role);

    bool operator==(const Category&) const = default;
};

/// A diagnostic from validation. `set` is a role name (or a suffix group id
/// for group diagnostics); `surface` is empty for set-level findings.
struct Warning {
    std::string code;
    std::string set;
    std::string surface;
    std::string message;

    bool operator==(const Warning&) const = default;
};

struct Lexicon {
    std::vector<Category> categories;
    std::vector<SuffixGroup> suffix_groups;

    const Category* find_category(std::string_view id) const;
    const SuffixGroup* find_group(std::string_view id) const;

    bool operator==(const Lexicon&) const = default;
};

/// Parses and validates lexicon JSON. Surfaces and suffixes are NFC-normalized.
/// Throws ParseError for malformed input, ValidationError for broken invariants.
Lexicon parse_lexicon(std::string_view json_text);
Lexicon load_lexicon(const std::filesystem::path& path);

/// Canonical JSON text; parse_lexicon(serialize_lexicon(x)) == x.
std::string serialize_lexicon(const Lexicon& lexicon);

/// Diagnostics for one category, ordered by (set name, surface). Empty iff
/// the category is well formed with balanced set sizes.
std::vector<Warning> validate_category(const Category& category);

/// Diagnostics for a suffix group (empty/duplicate suffixes, count outside 2..15).
std::vector<Warning> validate_suffix_group(const SuffixGroup& group);

/// Codes that make a lexicon unusable; everything else is advisory.
bool is_fatal(const Warning& w);

} // namespace assocbias
