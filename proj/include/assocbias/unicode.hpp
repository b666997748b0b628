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

// UTF-8 helpers backed by ICU: canonical normalization, whitespace
// tokenization, and edge-punctuation stripping.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace assocbias::unicode {

bool is_valid_utf8(std::string_view text);

/// NFC form of `text`. Throws ParseError on malformed UTF-8.
std::string nfc(std::string_view text);

/// Text normalization hook. The default is NFC; an external normalizer may be
/// plugged in as long as it is deterministic.
using Normalizer = std::function<std::string(std::string_view)>;
Normalizer default_normalizer();

/// Unicode White_Space property.
bool is_space(char32_t cp);

/// General categories Po, Ps, Pe, Pi, Pf, Pd plus the Bengali danda and double danda.
bool is_edge_punct(char32_t cp);

/// Splits on runs of Unicode whitespace. Views point into `text`, which must be valid UTF-8.
std::vector<std::string_view> split_whitespace(std::string_view text);

/// Removes leading and trailing edge punctuation; interior punctuation stays.
std::string_view strip_edge_punct(std::string_view token);

} // namespace assocbias::unicode
