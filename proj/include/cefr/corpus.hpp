#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cefr {

// An ordered set of difficulty labels. Rank is the 0-based position:
// lower rank = easier text.
class LabelScheme {
public:
    LabelScheme(std::string name, std::vector<std::string> labels);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }

    bool contains(const std::string& label) const;
    // Throws DataError for labels outside the scheme.
    std::size_t rank(const std::string& label) const;
    const std::string& label_at(std::size_t rank) const;

    bool operator==(const LabelScheme&) const = default;

    // Built-in schemes: "cefr" (A1..C2) and "ljl" (level1..level4).
    static LabelScheme cefr();
    static LabelScheme ljl();
    static LabelScheme by_name(const std::string& name);

private:
    std::string name_;
    std::vector<std::string> labels_;
};

struct LabeledText {
    std::string id;
    std::string text;
    std::optional<std::string> label;
    std::string source;

    bool operator==(const LabeledText&) const = default;
};

struct Corpus {
    LabelScheme scheme;
    std::vector<LabeledText> items;
};

struct CorpusStats {
    std::size_t n_items = 0;
    std::size_t n_words = 0;
    std::size_t n_chars = 0;  // code points, all characters
    std::map<std::string, std::size_t> per_label_counts;
};

enum class CorpusFormat { Csv, Jsonl };

CorpusFormat format_from_name(const std::string& name);
CorpusFormat format_from_path(const std::string& path);

Corpus load_corpus(const std::string& path, CorpusFormat format, const LabelScheme& scheme);
void save_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format);

CorpusStats corpus_stats(const Corpus& corpus);

// Stratified split. Per label, round(train_fraction * stratum size) items go
// to train, the rest to test. Item order within each half follows the input.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_fraction,
                                       std::uint64_t seed);

// Samples per_level items per (level, source corpus) pair without
// replacement. All corpora must share one scheme; ids must not collide.
Corpus sample_eval_set(const std::vector<Corpus>& corpora, std::size_t per_level,
                       const std::vector<std::string>& levels, std::uint64_t seed);

}  // namespace cefr
