#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cefr/corpus.hpp"
#include "cefr/difficulty.hpp"
#include "cefr/providers.hpp"

namespace cefr {

class Simplifier {
public:
    virtual ~Simplifier() = default;
    // current_level, when known, is the proxy's level of the input text.
    virtual std::string simplify(const std::string& text,
                                 const std::optional<std::string>& current_level) const = 0;
};

// Prompt template for the remote simplifier. Versioned and snapshot-tested
// so metric changes stay attributable to template changes.
extern const char* const kSimplifyPromptVersion;
std::string simplification_system_prompt(const LabelScheme& scheme,
                                         const std::optional<std::string>& current_level);

class RemoteSimplifier : public Simplifier {
public:
    RemoteSimplifier(LabelScheme scheme, std::shared_ptr<const ChatBackend> backend);
    std::string simplify(const std::string& text,
                         const std::optional<std::string>& current_level) const override;

private:
    LabelScheme scheme_;
    std::shared_ptr<const ChatBackend> backend_;
};

// Offline rule: every word of >= 3 syllables becomes the marker word
// "simple"; everything else (punctuation, spacing) is copied verbatim.
class RuleMockSimplifier : public Simplifier {
public:
    std::string simplify(const std::string& text,
                         const std::optional<std::string>& current_level) const override;
};

class IdentitySimplifier : public Simplifier {
public:
    std::string simplify(const std::string& text,
                         const std::optional<std::string>&) const override {
        return text;
    }
};

// Mock proxy whose successive classify calls walk down one level at a time
// from a start level, clamping at the lowest. Pairs with any simplifier to
// form the "perfect" mock pipeline. Stateful: serial use only.
class StaircaseClassifier : public DifficultyClassifier {
public:
    StaircaseClassifier(LabelScheme scheme, const std::string& start_label);
    ClassifierOutput classify(const std::string& text) const override;
    const LabelScheme& scheme() const override { return scheme_; }
    void reset(const std::string& start_label);

private:
    LabelScheme scheme_;
    mutable std::size_t current_rank_;
};

enum class SimplificationOutcome { NotSimplified, Simplified, Skipped };

// A = 1 iff the proxy puts the simplified text exactly one rank below the
// original; Skipped iff the proxy puts the original at the lowest rank.
// Gold labels are never consulted: the proxy difference is authoritative.
SimplificationOutcome simplification_accuracy(const DifficultyClassifier& proxy,
                                              const std::string& original,
                                              const std::string& simplified);

enum class WScoreVariant {
    HarmonicMean,   // A*S / (w1*S + w2*A); default, reproduces reported tables
    PaperLiteral,   // 2*(w1*A * w2*S) / (w1*A + w2*S); kept for comparison
};

// Weighted combination of mean accuracy and mean similarity, w2 = 1 - w1.
// Negative similarity is clamped to 0; returns 0 when either input is 0.
double w_score(double mean_accuracy, double mean_similarity, double w1,
               WScoreVariant variant = WScoreVariant::HarmonicMean);

struct SimplificationRecord {
    std::string id;
    std::string original;
    std::string simplified;
    std::optional<std::string> gold_level;
    std::string proxy_level_original;
    std::string proxy_level_simplified;
    int accuracy = 0;           // 0 or 1
    double similarity = 0.0;    // raw cosine in [-1,1]
};

struct SimplificationReport {
    double mean_accuracy = 0.0;
    double mean_similarity = 0.0;  // negatives clamped to 0 before averaging
    double w_score = 0.0;
    std::size_t n_pairs = 0;    // evaluated (non-skipped) pairs
    std::size_t n_skipped = 0;  // proxy said original is lowest level

    std::string to_json() const;
};

std::string records_to_jsonl(const std::vector<SimplificationRecord>& records);

// Per item: simplify, judge with the proxy, embed both sides for cosine.
// Skipped items are excluded from means. The w-Score is computed from the
// corpus-level means (matching the reported tables' construction).
std::pair<SimplificationReport, std::vector<SimplificationRecord>> evaluate_simplification(
    const Simplifier& simplifier, const DifficultyClassifier& proxy,
    const Embedder& embedder, const Corpus& eval_set, double w1 = 0.5,
    WScoreVariant variant = WScoreVariant::HarmonicMean);

struct IterationStep {
    std::size_t iteration = 0;
    std::string text;
    std::string proxy_level;
    double similarity_to_step0 = 0.0;
};

struct IterationTrace {
    std::vector<IterationStep> steps;
    bool complete = true;  // false when a provider failure cut the run short
    std::string error;
};

// Step 0 is the original; then exactly max_iters simplification steps, each
// recording the proxy level and cosine against the step-0 text.
IterationTrace iterate_simplify(const Simplifier& simplifier,
                                const DifficultyClassifier& proxy,
                                const Embedder& embedder, const std::string& sentence,
                                std::size_t max_iters);

struct IterationAggregate {
    std::size_t iteration = 0;
    double mean_rank = 0.0;
    double mean_similarity = 0.0;
};

std::vector<IterationAggregate> aggregate_traces(const std::vector<IterationTrace>& traces,
                                                 const LabelScheme& scheme);

// Plot-ready CSV: iteration,mean_rank,mean_similarity
std::string aggregates_to_csv(const std::vector<IterationAggregate>& aggregates);

}  // namespace cefr
