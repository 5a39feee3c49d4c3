#pragma once

#include "cefr/textproc.hpp"

namespace cefr {

struct ReadabilityScores {
    double gfi = 0.0;
    double fkgl = 0.0;
    double ari = 0.0;
};

// Coefficients are kept in a record so French-recalibrated variants can be
// swapped in; the calibration layer absorbs affine differences anyway.
struct ReadabilityCoefficients {
    double gfi_scale = 0.4;
    double fkgl_wps = 0.39;
    double fkgl_spw = 11.8;
    double fkgl_offset = -15.59;
    double ari_cpw = 4.71;
    double ari_wps = 0.5;
    double ari_offset = -21.43;
};

double gfi(const TextStats& stats, const ReadabilityCoefficients& c = {});
double fkgl(const TextStats& stats, const ReadabilityCoefficients& c = {});
double ari(const TextStats& stats, const ReadabilityCoefficients& c = {});

ReadabilityScores readability_scores(const TextStats& stats,
                                     const ReadabilityCoefficients& c = {});

}  // namespace cefr
