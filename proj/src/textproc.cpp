#include "cefr/textproc.hpp"

#include <array>
#include <string_view>

#include "cefr/utf8.hpp"

namespace cefr {

namespace {

bool is_ws(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
           cp == U'\v' || cp == 0x00A0;
}

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// ASCII letters plus Latin-1 Supplement and Latin Extended-A, which cover
// all accented letters used in French (including œ/Œ).
bool is_letter(char32_t cp) {
    if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) return true;
    if (cp >= 0x00C0 && cp <= 0x00FF) return cp != 0x00D7 && cp != 0x00F7;
    return cp >= 0x0100 && cp <= 0x017F;
}

bool is_vowel(char32_t cp) {
    switch (cp) {
        case U'a': case U'e': case U'i': case U'o': case U'u': case U'y':
        case U'A': case U'E': case U'I': case U'O': case U'U': case U'Y':
        case 0x00E9: case 0x00E8: case 0x00EA: case 0x00EB:  // é è ê ë
        case 0x00E0: case 0x00E2:                            // à â
        case 0x00EE: case 0x00EF:                            // î ï
        case 0x00F4: case 0x00FB: case 0x00F9: case 0x00FC:  // ô û ù ü
        case 0x0153:                                         // œ
        case 0x00C9: case 0x00C8: case 0x00CA: case 0x00CB:
        case 0x00C0: case 0x00C2:
        case 0x00CE: case 0x00CF:
        case 0x00D4: case 0x00DB: case 0x00D9: case 0x00DC:
        case 0x0152:                                         // Œ
            return true;
        default:
            return false;
    }
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == 0x2019; }

bool is_terminal(char32_t cp) {
    return cp == U'.' || cp == U'!' || cp == U'?' || cp == 0x2026;
}

bool is_abbreviation(std::u32string_view word) {
    static const std::array<std::u32string_view, 15> kAbbrevs = {
        U"M",  U"MM",  U"Mme", U"Mlle", U"Dr", U"Pr", U"St", U"Ste",
        U"etc", U"cf", U"ex",  U"p",    U"pp", U"vol", U"no"};
    for (auto a : kAbbrevs) {
        if (word == a) return true;
    }
    return false;
}

std::string trimmed_slice(const std::vector<char32_t>& cps, std::size_t begin,
                          std::size_t end) {
    while (begin < end && is_ws(cps[begin])) ++begin;
    while (end > begin && is_ws(cps[end - 1])) --end;
    std::string out;
    for (std::size_t i = begin; i < end; ++i) utf8::append(out, cps[i]);
    return out;
}

}  // namespace

std::vector<std::string> segment_sentences(const std::string& text) {
    const std::vector<char32_t> cps = utf8::decode(text);
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (!is_terminal(cps[i])) continue;
        const bool at_break = i + 1 == cps.size() || is_ws(cps[i + 1]);
        if (!at_break) continue;
        if (cps[i] == U'.') {
            // The word directly before the period decides the abbreviation case.
            std::size_t w = i;
            while (w > start && is_letter(cps[w - 1])) --w;
            if (is_abbreviation(std::u32string_view(cps.data() + w, i - w))) {
                continue;
            }
        }
        std::string sentence = trimmed_slice(cps, start, i + 1);
        if (!sentence.empty()) sentences.push_back(std::move(sentence));
        start = i + 1;
    }
    std::string tail = trimmed_slice(cps, start, cps.size());
    if (!tail.empty()) sentences.push_back(std::move(tail));
    return sentences;
}

std::vector<std::string> tokenize_words(const std::string& text) {
    const std::vector<char32_t> cps = utf8::decode(text);
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < cps.size()) {
        if (!is_letter(cps[i])) {
            ++i;
            continue;
        }
        std::string word;
        utf8::append(word, cps[i]);
        ++i;
        while (i < cps.size()) {
            if (is_letter(cps[i])) {
                utf8::append(word, cps[i]);
                ++i;
            } else if ((is_apostrophe(cps[i]) || cps[i] == U'-') && i + 1 < cps.size() &&
                       is_letter(cps[i + 1])) {
                utf8::append(word, cps[i]);
                ++i;
            } else {
                break;
            }
        }
        words.push_back(std::move(word));
    }
    return words;
}

std::size_t count_syllables(const std::string& word) {
    const std::vector<char32_t> cps = utf8::decode(word);
    std::size_t groups = 0;
    bool in_group = false;
    bool has_letter = false;
    for (char32_t cp : cps) {
        has_letter = has_letter || is_letter(cp);
        if (is_vowel(cp)) {
            if (!in_group) ++groups;
            in_group = true;
        } else {
            in_group = false;
        }
    }
    if (!has_letter) return groups;
    return groups > 0 ? groups : 1;
}

TextStats compute_stats(const std::string& text) {
    TextStats stats;
    stats.n_sentences = segment_sentences(text).size();
    const std::vector<std::string> words = tokenize_words(text);
    stats.n_words = words.size();
    for (const std::string& w : words) {
        const std::size_t syl = count_syllables(w);
        stats.n_syllables += syl;
        if (syl >= 3) ++stats.n_complex_words;
    }
    for (char32_t cp : utf8::decode(text)) {
        if (is_letter(cp) || is_digit(cp)) ++stats.n_chars;
    }
    return stats;
}

}  // namespace cefr
