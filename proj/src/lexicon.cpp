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

#include "assocbias/lexicon.hpp"

#include "assocbias/error.hpp"
#include "assocbias/unicode.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace assocbias {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Role role) {
    switch (role) {
    case Role::targets_x: return "targets_x";
    case Role::targets_y: return "targets_y";
    case Role::attributes_a: return "attributes_a";
    case Role::attributes_b: return "attributes_b";
    }
    return "unknown";
}

const std::vector<Stimulus>& Category::set(Role role) const {
    switch (role) {
    case Role::targets_x: return targets_x;
    case Role::targets_y: return targets_y;
    case Role::attributes_a: return attributes_a;
    case Role::attributes_b: return attributes_b;
    }
    return targets_x;
}

std::vector<Stimulus>& Category::set(Role role) {
    return const_cast<std::vector<Stimulus>&>(std::as_const(*this).set(role));
}

const Category* Lexicon::find_category(std::string_view id) const {
    auto it = std::find_if(categories.begin(), categories.end(),
                           [&](const Category& c) { return c.id == id; });
    return it == categories.end() ? nullptr : &*it;
}

const SuffixGroup* Lexicon::find_group(std::string_view id) const {
    auto it = std::find_if(suffix_groups.begin(), suffix_groups.end(),
                           [&](const SuffixGroup& g) { return g.id == id; });
    return it == suffix_groups.end() ? nullptr : &*it;
}

bool is_fatal(const Warning& w) {
    static const std::set<std::string, std::less<>> fatal{
        "empty_set", "empty_surface", "shared_stimulus", "duplicate_stimulus",
        "empty_group", "empty_suffix", "duplicate_suffix"};
    return fatal.contains(w.code);
}

std::vector<Warning> validate_category(const Category& c) {
    std::vector<Warning> out;
    std::map<std::string, Role> first_role;

    for (Role role : kAllRoles) {
        const auto& members = c.set(role);
        const std::string set_name(to_string(role));
        if (members.empty()) {
            out.push_back({"empty_set", set_name, "", "set is empty"});
        }
        for (const Stimulus& s : members) {
            if (s.surface.empty()) {
                out.push_back({"empty_surface", set_name, "", "stimulus has an empty surface"});
                continue;
            }
            auto [it, inserted] = first_role.emplace(s.surface, role);
            if (inserted) continue;
            if (it->second == role) {
                out.push_back({"duplicate_stimulus", set_name, s.surface,
                               "stimulus listed twice in " + set_name});
            } else {
                out.push_back({"shared_stimulus", set_name, s.surface,
                               "stimulus also appears in " + std::string(to_string(it->second))});
            }
        }
    }

    auto imbalance = [&](Role a, Role b, const char* pair) {
        const auto na = c.set(a).size();
        const auto nb = c.set(b).size();
        if (na == 0 || nb == 0 || na == nb) return;
        const Role smaller = na < nb ? a : b;
        out.push_back({"size_imbalance", std::string(to_string(smaller)), "",
                       std::string(pair) + " sets differ in size (" + std::to_string(na) + " vs " +
                           std::to_string(nb) + ")"});
    };
    imbalance(Role::targets_x, Role::targets_y, "target");
    imbalance(Role::attributes_a, Role::attributes_b, "attribute");

    std::stable_sort(out.begin(), out.end(), [](const Warning& l, const Warning& r) {
        return std::tie(l.set, l.surface) < std::tie(r.set, r.surface);
    });
    return out;
}

std::vector<Warning> validate_suffix_group(const SuffixGroup& g) {
    std::vector<Warning> out;
    if (g.suffixes.empty()) {
        out.push_back({"empty_group", g.id, "", "suffix group has no suffixes"});
        return out;
    }
    std::set<std::string> seen;
    for (const auto& s : g.suffixes) {
        if (s.empty()) {
            out.push_back({"empty_suffix", g.id, "", "empty suffix"});
        } else if (!seen.insert(s).second) {
            out.push_back({"duplicate_suffix", g.id, s, "suffix listed twice"});
        }
    }
    if (g.suffixes.size() < 2 || g.suffixes.size() > 15) {
        out.push_back({"suffix_count", g.id, "",
                       "suffix count outside 2..15 (" + std::to_string(g.suffixes.size()) + ")"});
    }
    return out;
}

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
    throw ParseError("lexicon: " + where + ": " + what);
}

void require_keys(const ojson& obj, const std::string& where,
                  std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional = {}) {
    if (!obj.is_object()) parse_fail(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const auto& key = it.key();
        const bool known =
            std::find(required.begin(), required.end(), key) != required.end() ||
            std::find(optional.begin(), optional.end(), key) != optional.end();
        if (!known) parse_fail(where, "unknown key \"" + key + "\"");
    }
    for (auto key : required) {
        if (!obj.contains(std::string(key))) parse_fail(where, "missing key \"" + std::string(key) + "\"");
    }
}

std::string get_string(const ojson& v, const std::string& where) {
    if (!v.is_string()) parse_fail(where, "expected a string");
    try {
        return unicode::nfc(v.get_ref<const std::string&>());
    } catch (const ParseError& e) {
        parse_fail(where, e.what());
    }
}

std::vector<Stimulus> parse_set(const ojson& arr, const std::string& where) {
    if (!arr.is_array()) parse_fail(where, "expected an array");
    std::vector<Stimulus> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = where + "[" + std::to_string(i) + "]";
        const ojson& item = arr[i];
        require_keys(item, at, {"surface", "suffix_group"}, {"notes"});
        Stimulus s;
        s.surface = get_string(item["surface"], at + ".surface");
        const ojson& g = item["suffix_group"];
        if (!g.is_null()) s.suffix_group = get_string(g, at + ".suffix_group");
        if (item.contains("notes")) s.notes = get_string(item["notes"], at + ".notes");
        out.push_back(std::move(s));
    }
    return out;
}

std::string render(const std::vector<Warning>& ws) {
    std::ostringstream os;
    bool first = true;
    for (const auto& w : ws) {
        if (!first) os << "; ";
        first = false;
        os << w.set;
        if (!w.surface.empty()) os << " '" << w.surface << "'";
        os << ": " << w.message;
    }
    return os.str();
}

} // namespace

Lexicon parse_lexicon(std::string_view json_text) {
    ojson root;
    try {
        root = ojson::parse(json_text);
    } catch (const ojson::parse_error& e) {
        throw ParseError(std::string("lexicon: ") + e.what());
    }
    require_keys(root, "root", {"version", "suffix_groups", "categories"});
    if (!root["version"].is_number_integer() || root["version"].get<int>() != 1) {
        parse_fail("version", "unsupported lexicon version");
    }

    Lexicon lex;
    const ojson& groups = root["suffix_groups"];
    if (!groups.is_array()) parse_fail("suffix_groups", "expected an array");
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const std::string at = "suffix_groups[" + std::to_string(i) + "]";
        require_keys(groups[i], at, {"id", "suffixes"});
        SuffixGroup g;
        g.id = get_string(groups[i]["id"], at + ".id");
        const ojson& sfx = groups[i]["suffixes"];
        if (!sfx.is_array()) parse_fail(at + ".suffixes", "expected an array");
        for (std::size_t k = 0; k < sfx.size(); ++k) {
            g.suffixes.push_back(get_string(sfx[k], at + ".suffixes[" + std::to_string(k) + "]"));
        }
        lex.suffix_groups.push_back(std::move(g));
    }

    const ojson& cats = root["categories"];
    if (!cats.is_array()) parse_fail("categories", "expected an array");
    for (std::size_t i = 0; i < cats.size(); ++i) {
        const std::string at = "categories[" + std::to_string(i) + "]";
        require_keys(cats[i], at,
                     {"id", "label", "targets_x", "targets_y", "attributes_a", "attributes_b"});
        Category c;
        c.id = get_string(cats[i]["id"], at + ".id");
        c.label = get_string(cats[i]["label"], at + ".label");
        for (Role role : kAllRoles) {
            const std::string key(to_string(role));
            c.set(role) = parse_set(cats[i][key], at + "." + key);
        }
        lex.categories.push_back(std::move(c));
    }

    // structural validation
    std::set<std::string> group_ids;
    for (const auto& g : lex.suffix_groups) {
        if (!group_ids.insert(g.id).second) {
            throw ValidationError("lexicon: duplicate suffix group id '" + g.id + "'");
        }
        std::vector<Warning> ws = validate_suffix_group(g);
        std::erase_if(ws, [](const Warning& w) { return !is_fatal(w); });
        if (!ws.empty()) throw ValidationError("lexicon: suffix group " + render(ws));
    }
    std::set<std::string> cat_ids;
    for (const auto& c : lex.categories) {
        if (!cat_ids.insert(c.id).second) {
            throw ValidationError("lexicon: duplicate category id '" + c.id + "'");
        }
        std::vector<Warning> ws = validate_category(c);
        std::erase_if(ws, [](const Warning& w) { return !is_fatal(w); });
        if (!ws.empty()) throw ValidationError("lexicon: category " + c.id + ": " + render(ws));
        for (Role role : kAllRoles) {
            for (const auto& s : c.set(role)) {
                if (s.suffix_group && !group_ids.contains(*s.suffix_group)) {
                    throw ValidationError("lexicon: category " + c.id + ": stimulus '" + s.surface +
                                          "' references undefined suffix group '" +
                                          *s.suffix_group + "'");
                }
            }
        }
    }
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open lexicon file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str());
}

std::string serialize_lexicon(const Lexicon& lex) {
    ojson root;
    root["version"] = 1;
    root["suffix_groups"] = ojson::array();
    for (const auto& g : lex.suffix_groups) {
        root["suffix_groups"].push_back({{"id", g.id}, {"suffixes", g.suffixes}});
    }
    root["categories"] = ojson::array();
    for (const auto& c : lex.categories) {
        ojson jc;
        jc["id"] = c.id;
        jc["label"] = c.label;
        for (Role role : kAllRoles) {
            ojson arr = ojson::array();
            for (const auto& s : c.set(role)) {
                ojson js;
                js["surface"] = s.surface;
                js["suffix_group"] = s.suffix_group ? ojson(*s.suffix_group) : ojson(nullptr);
                if (!s.notes.empty()) js["notes"] = s.notes;
                arr.push_back(std::move(js));
            }
            jc[std::string(to_string(role))] = std::move(arr);
        }
        root["categories"].push_back(std::move(jc));
    }
    return root.dump(2) + "\n";
}

} // namespace assocbias
