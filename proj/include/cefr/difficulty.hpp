#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cefr/calibration.hpp"
#include "cefr/corpus.hpp"
#include "cefr/providers.hpp"
#include "cefr/readability.hpp"
#include "cefr/softmax.hpp"

namespace cefr {

// f : D -> Y. Implementations must be safe for concurrent classify calls
// unless documented otherwise (the staircase mock in simplify.hpp is not).
class DifficultyClassifier {
public:
    virtual ~DifficultyClassifier() = default;
    virtual ClassifierOutput classify(const std::string& text) const = 0;
    virtual const LabelScheme& scheme() const = 0;
};

enum class ReadabilityMetric { Gfi, Fkgl, Ari };

ReadabilityMetric readability_metric_from_name(const std::string& name);
double readability_score(ReadabilityMetric metric, const TextStats& stats);

// compute_stats -> chosen readability score -> calibrated prediction.
class ReadabilityClassifier : public DifficultyClassifier {
public:
    ReadabilityClassifier(ReadabilityMetric metric, CalibrationModel model);
    ClassifierOutput classify(const std::string& text) const override;
    const LabelScheme& scheme() const override { return model_.scheme(); }
    ReadabilityMetric metric() const { return metric_; }

private:
    ReadabilityMetric metric_;
    CalibrationModel model_;
};

// Softmax head over embedding vectors.
class EmbeddingHeadClassifier : public DifficultyClassifier {
public:
    EmbeddingHeadClassifier(LabelScheme scheme, SoftmaxModel head,
                            std::shared_ptr<const Embedder> embedder);
    ClassifierOutput classify(const std::string& text) const override;
    const LabelScheme& scheme() const override { return scheme_; }
    const SoftmaxModel& head() const { return head_; }

    std::string to_json() const;
    static EmbeddingHeadClassifier from_json(const std::string& text,
                                             std::shared_ptr<const Embedder> embedder);
    void save(const std::string& path) const;
    static EmbeddingHeadClassifier load(const std::string& path,
                                        std::shared_ptr<const Embedder> embedder);

private:
    LabelScheme scheme_;
    SoftmaxModel head_;
    std::shared_ptr<const Embedder> embedder_;
};

EmbeddingHeadClassifier train_embedding_head(const Corpus& train,
                                             std::shared_ptr<const Embedder> embedder,
                                             const FitOptions& hyper = {});

// CEFR assessor system prompt used by the remote classifier.
std::string assessor_system_prompt(const LabelScheme& scheme);

// Finds the first standalone scheme label in a free-text reply
// (case-insensitive). Throws DataError when no label occurs.
std::string parse_level_response(const std::string& reply, const LabelScheme& scheme);

// Prompts a chat backend with the assessor prompt, parses the reply.
// with_context=false drops the system prompt (Table-2 "context" toggle).
class RemoteClassifier : public DifficultyClassifier {
public:
    RemoteClassifier(LabelScheme scheme, std::shared_ptr<const ChatBackend> backend,
                     bool with_context = true);
    ClassifierOutput classify(const std::string& text) const override;
    const LabelScheme& scheme() const override { return scheme_; }

private:
    LabelScheme scheme_;
    std::shared_ptr<const ChatBackend> backend_;
    bool with_context_;
};

struct DifficultyReport {
    std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
    std::vector<double> per_class_f1;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    std::size_t n_evaluated = 0;
    std::size_t n_parse_errors = 0;  // remote misparses, excluded from F1

    std::string to_json(const LabelScheme& scheme) const;
    std::string confusion_csv(const LabelScheme& scheme) const;
};

// Builds per-class F1 from a confusion matrix; shared with the report path
// so tests can cross-check against independent recomputation.
DifficultyReport report_from_confusion(std::vector<std::vector<std::size_t>> confusion,
                                       std::size_t n_parse_errors = 0);

// Classifies every item of a fully labeled corpus. Remote misparses
// (DataError from reply parsing) are counted, not propagated.
DifficultyReport evaluate_difficulty(const DifficultyClassifier& classifier,
                                     const Corpus& test, std::size_t parallelism = 1);

}  // namespace cefr
