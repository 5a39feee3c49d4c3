#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cefr {

struct TextStats {
    std::size_t n_sentences = 0;
    std::size_t n_words = 0;
    std::size_t n_chars = 0;  // letters and digits only (ARI convention)
    std::size_t n_syllables = 0;
    std::size_t n_complex_words = 0;  // words with >= 3 syllables
};

// Splits on {. ! ? ...} followed by whitespace or end of input. A short
// fixed list of French abbreviations (M., Mme., etc., cf., ...) does not
// terminate a sentence. Trailing text without terminal punctuation forms
// a final sentence.
std::vector<std::string> segment_sentences(const std::string& text);

// Maximal runs of letters; internal apostrophes and hyphens stay inside
// one token ("aujourd'hui", "porte-clés"). Digit runs are not words.
std::vector<std::string> tokenize_words(const std::string& text);

// Vowel-group heuristic: counts maximal runs of French vowel characters,
// at least 1 for any token containing a letter. Undercounts hiatus
// ("créativité" -> 4, phonetically 5); adequate for relative scoring.
std::size_t count_syllables(const std::string& word);

TextStats compute_stats(const std::string& text);

}  // namespace cefr
