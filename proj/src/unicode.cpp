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

#include "assocbias/unicode.hpp"

#include "assocbias/error.hpp"

#include <unicode/bytestream.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace assocbias::unicode {

namespace {

const icu::Normalizer2& nfc_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
        throw Error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
    }
    return *n;
}

// Decodes the code point starting at byte i and advances i. Returns <0 on malformed input.
UChar32 next_cp(std::string_view s, int32_t& i) {
    UChar32 c;
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
    return c;
}

UChar32 prev_cp(std::string_view s, int32_t& i) {
    UChar32 c;
    U8_PREV(reinterpret_cast<const uint8_t*>(s.data()), 0, i, c);
    return c;
}

} // namespace

bool is_valid_utf8(std::string_view text) {
    int32_t i = 0;
    const auto n = static_cast<int32_t>(text.size());
    while (i < n) {
        const auto b = static_cast<unsigned char>(text[i]);
        if (b < 0x80) {
            ++i;
            continue;
        }
        if (next_cp(text, i) < 0) return false;
    }
    return true;
}

std::string nfc(std::string_view text) {
    if (!is_valid_utf8(text)) throw ParseError("malformed UTF-8");
    const icu::Normalizer2& norm = nfc_instance();
    UErrorCode status = U_ZERO_ERROR;
    const icu::StringPiece piece(text.data(), static_cast<int32_t>(text.size()));
    if (norm.isNormalizedUTF8(piece, status) && U_SUCCESS(status)) {
        return std::string(text);
    }
    status = U_ZERO_ERROR;
    std::string out;
    icu::StringByteSink<std::string> sink(&out, static_cast<int32_t>(text.size()));
    norm.normalizeUTF8(0, piece, sink, nullptr, status);
    if (U_FAILURE(status)) {
        throw ParseError(std::string("NFC normalization failed: ") + u_errorName(status));
    }
    return out;
}

Normalizer default_normalizer() {
    return [](std::string_view s) { return nfc(s); };
}

bool is_space(char32_t cp) {
    return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

bool is_edge_punct(char32_t cp) {
    if (cp == 0x0964 || cp == 0x0965) return true;
    switch (u_charType(static_cast<UChar32>(cp))) {
    case U_OTHER_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_DASH_PUNCTUATION:
        return true;
    default:
        return false;
    }
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> tokens;
    const auto n = static_cast<int32_t>(text.size());
    int32_t i = 0;
    int32_t start = -1;
    while (i < n) {
        const int32_t at = i;
        const auto b = static_cast<unsigned char>(text[i]);
        bool space;
        if (b < 0x80) {
            ++i;
            space = b == ' ' || (b >= 0x09 && b <= 0x0d);
        } else {
            const UChar32 c = next_cp(text, i);
            space = c >= 0 && u_isUWhiteSpace(c);
        }
        if (space) {
            if (start >= 0) {
                tokens.push_back(text.substr(start, at - start));
                start = -1;
            }
        } else if (start < 0) {
            start = at;
        }
    }
    if (start >= 0) tokens.push_back(text.substr(start));
    return tokens;
}

std::string_view strip_edge_punct(std::string_view token) {
    int32_t begin = 0;
    const auto n = static_cast<int32_t>(token.size());
    while (begin < n) {
        int32_t next = begin;
        const UChar32 c = next_cp(token, next);
        if (c < 0 || !is_edge_punct(static_cast<char32_t>(c))) break;
        begin = next;
    }
    int32_t end = n;
    while (end > begin) {
        int32_t prev = end;
        const UChar32 c = prev_cp(token, prev);
        if (c < 0 || !is_edge_punct(static_cast<char32_t>(c))) break;
        end = prev;
    }
    return token.substr(begin, end - begin);
}

} // namespace assocbias::unicode
