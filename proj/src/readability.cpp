#include "cefr/readability.hpp"

#include "cefr/errors.hpp"

namespace cefr {

namespace {

void require_nondegenerate(const TextStats& stats) {
    if (stats.n_sentences < 1 || stats.n_words < 1) {
        throw DataError("readability formulas need at least 1 sentence and 1 word");
    }
}

}  // namespace

double gfi(const TextStats& stats, const ReadabilityCoefficients& c) {
    require_nondegenerate(stats);
    const double words = static_cast<double>(stats.n_words);
    return c.gfi_scale * (words / static_cast<double>(stats.n_sentences) +
                          100.0 * static_cast<double>(stats.n_complex_words) / words);
}

double fkgl(const TextStats& stats, const ReadabilityCoefficients& c) {
    require_nondegenerate(stats);
    const double words = static_cast<double>(stats.n_words);
    return c.fkgl_wps * (words / static_cast<double>(stats.n_sentences)) +
           c.fkgl_spw * (static_cast<double>(stats.n_syllables) / words) + c.fkgl_offset;
}

double ari(const TextStats& stats, const ReadabilityCoefficients& c) {
    require_nondegenerate(stats);
    const double words = static_cast<double>(stats.n_words);
    return c.ari_cpw * (static_cast<double>(stats.n_chars) / words) +
           c.ari_wps * (words / static_cast<double>(stats.n_sentences)) + c.ari_offset;
}

ReadabilityScores readability_scores(const TextStats& stats,
                                     const ReadabilityCoefficients& c) {
    return {gfi(stats, c), fkgl(stats, c), ari(stats, c)};
}

}  // namespace cefr
