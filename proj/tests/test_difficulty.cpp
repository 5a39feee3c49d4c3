#include <doctest.h>

#include <memory>
#include <random>

#include "cefr/calibration.hpp"
#include "cefr/difficulty.hpp"
#include "cefr/errors.hpp"

using namespace cefr;

namespace {

// Classifies by the gold label encoded in the text, e.g. "[B2] un texte".
class TaggedTextClassifier : public DifficultyClassifier {
public:
    explicit TaggedTextClassifier(LabelScheme scheme) : scheme_(std::move(scheme)) {}
    ClassifierOutput classify(const std::string& text) const override {
        return {parse_level_response(text, scheme_), {}};
    }
    const LabelScheme& scheme() const override { return scheme_; }

private:
    LabelScheme scheme_;
};

class ConstantClassifier : public DifficultyClassifier {
public:
    ConstantClassifier(LabelScheme scheme, std::string label)
        : scheme_(std::move(scheme)), label_(std::move(label)) {}
    ClassifierOutput classify(const std::string&) const override { return {label_, {}}; }
    const LabelScheme& scheme() const override { return scheme_; }

private:
    LabelScheme scheme_;
    std::string label_;
};

class ScriptedChatBackend : public ChatBackend {
public:
    explicit ScriptedChatBackend(std::string reply) : reply_(std::move(reply)) {}
    std::string complete(const std::string& system, const std::string&) const override {
        last_system_ = system;
        return reply_;
    }
    mutable std::string last_system_;

private:
    std::string reply_;
};

// Independent brute-force F1: recompute precision/recall per class from
// scratch, entirely apart from report_from_confusion.
void brute_force_f1(const std::vector<std::vector<std::size_t>>& confusion,
                    std::vector<double>& f1s, double& macro, double& weighted) {
    const std::size_t k = confusion.size();
    f1s.assign(k, 0.0);
    macro = 0.0;
    weighted = 0.0;
    double total = 0.0;
    for (const auto& row : confusion) {
        for (std::size_t c : row) total += static_cast<double>(c);
    }
    for (std::size_t c = 0; c < k; ++c) {
        double tp = static_cast<double>(confusion[c][c]);
        double fp = 0.0, fn = 0.0, support = 0.0;
        for (std::size_t g = 0; g < k; ++g) {
            if (g != c) fp += static_cast<double>(confusion[g][c]);
        }
        for (std::size_t p = 0; p < k; ++p) {
            support += static_cast<double>(confusion[c][p]);
            if (p != c) fn += static_cast<double>(confusion[c][p]);
        }
        const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        f1s[c] = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        macro += f1s[c] / static_cast<double>(k);
        if (total > 0) weighted += f1s[c] * support / total;
    }
}

Corpus tagged_corpus(const LabelScheme& scheme, std::size_t per_label) {
    Corpus corpus{scheme, {}};
    std::size_t id = 0;
    for (const std::string& label : scheme.labels()) {
        for (std::size_t i = 0; i < per_label; ++i) {
            corpus.items.push_back({"t" + std::to_string(id++), "[" + label + "] un texte.",
                                    label, "fixture"});
        }
    }
    return corpus;
}

}  // namespace

TEST_CASE("parse_level_response rules") {
    const LabelScheme scheme = LabelScheme::cefr();
    CHECK(parse_level_response("The text is B2 level.", scheme) == "B2");
    CHECK(parse_level_response("Between B1 and B2, I'd say B1.", scheme) == "B1");
    CHECK(parse_level_response("niveau c1", scheme) == "C1");
    CHECK_THROWS_AS(parse_level_response("intermediate", scheme), DataError);
    // substrings inside words do not count
    CHECK_THROWS_AS(parse_level_response("CAB1X", scheme), DataError);
    CHECK(parse_level_response("level2 text", LabelScheme::ljl()) == "level2");
}

TEST_CASE("remote classifier via scripted backend") {
    const LabelScheme scheme = LabelScheme::cefr();
    auto backend = std::make_shared<ScriptedChatBackend>("B2");
    RemoteClassifier classifier(scheme, backend);
    CHECK(classifier.classify("un texte difficile").label == "B2");
    CHECK(backend->last_system_ == assessor_system_prompt(scheme));

    auto refusing = std::make_shared<ScriptedChatBackend>("I cannot assess this");
    RemoteClassifier failing(scheme, refusing);
    CHECK_THROWS_AS(failing.classify("texte"), DataError);
}

TEST_CASE("context toggle drops the system prompt") {
    const LabelScheme scheme = LabelScheme::cefr();
    auto backend = std::make_shared<ScriptedChatBackend>("A2");
    RemoteClassifier classifier(scheme, backend, /*with_context=*/false);
    classifier.classify("texte");
    CHECK(backend->last_system_.empty());
}

TEST_CASE("readability classifier on the separable calibration fixture") {
    std::vector<std::pair<double, std::string>> pairs;
    // low FKGL scores labeled A1, high labeled C2
    const std::string easy = "Le chat dort. Il est la. Tout va bien.";
    const std::string hard =
        "L'institutionnalisation considérable des réglementations internationales "
        "particulièrement sophistiquées caractérise incontestablement notre "
        "fonctionnement institutionnel contemporain.";
    const double low = fkgl(compute_stats(easy));
    const double high = fkgl(compute_stats(hard));
    REQUIRE(low < high);
    for (int i = 0; i < 20; ++i) {
        pairs.emplace_back(low, "A1");
        pairs.emplace_back(high, "C2");
    }
    ReadabilityClassifier classifier(ReadabilityMetric::Fkgl,
                                     fit_calibration(pairs, LabelScheme::cefr()));
    CHECK(classifier.classify(easy).label == "A1");
    CHECK(classifier.classify(hard).label == "C2");
}

TEST_CASE("embedding head separable fixture reaches accuracy 1.0") {
    const LabelScheme scheme("two", {"easy", "hard"});
    Corpus train{scheme, {}};
    // disjoint alphabets -> disjoint trigram buckets -> linearly separable
    for (int i = 0; i < 10; ++i) {
        train.items.push_back({"e" + std::to_string(i),
                               "aaaa bbbb aabb" + std::string(i, 'a'), "easy", "t"});
        train.items.push_back({"h" + std::to_string(i),
                               "zzzz yyyy zzyy" + std::string(i, 'z'), "hard", "t"});
    }
    auto embedder = std::make_shared<MockEmbedder>(64);
    const EmbeddingHeadClassifier head = train_embedding_head(train, embedder);
    for (const auto& item : train.items) {
        CHECK(head.classify(item.text).label == *item.label);
    }
}

TEST_CASE("zero-epoch embedding head gives uniform probabilities") {
    const LabelScheme scheme("two", {"easy", "hard"});
    Corpus train{scheme,
                 {{"a", "aaaa", "easy", "t"}, {"b", "zzzz", "hard", "t"}}};
    FitOptions hyper;
    hyper.max_epochs = 0;
    const EmbeddingHeadClassifier head =
        train_embedding_head(train, std::make_shared<MockEmbedder>(32), hyper);
    const ClassifierOutput out = head.classify("nimporte quoi");
    for (const auto& [label, p] : out.probabilities) {
        CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("embedding head JSON round trip") {
    const LabelScheme scheme("two", {"easy", "hard"});
    Corpus train{scheme, {{"a", "aaaa", "easy", "t"}, {"b", "zzzz", "hard", "t"}}};
    auto embedder = std::make_shared<MockEmbedder>(32);
    const EmbeddingHeadClassifier head = train_embedding_head(train, embedder);
    const EmbeddingHeadClassifier reloaded =
        EmbeddingHeadClassifier::from_json(head.to_json(), embedder);
    CHECK(reloaded.classify("aaaa").label == head.classify("aaaa").label);
}

TEST_CASE("train_embedding_head rejects single-class and unlabeled data") {
    const LabelScheme scheme("two", {"easy", "hard"});
    auto embedder = std::make_shared<MockEmbedder>(32);
    Corpus single{scheme, {{"a", "aaaa", "easy", "t"}, {"b", "aaab", "easy", "t"}}};
    CHECK_THROWS_AS(train_embedding_head(single, embedder), DataError);
    Corpus unlabeled{scheme, {{"a", "aaaa", std::nullopt, "t"}, {"b", "zzzz", "hard", "t"}}};
    CHECK_THROWS_AS(train_embedding_head(unlabeled, embedder), DataError);
}

TEST_CASE("perfect classifier gives macro F1 = 1 and diagonal confusion") {
    const LabelScheme scheme = LabelScheme::cefr();
    const Corpus corpus = tagged_corpus(scheme, 3);
    const TaggedTextClassifier classifier(scheme);
    const DifficultyReport report = evaluate_difficulty(classifier, corpus);
    CHECK(report.macro_f1 == doctest::Approx(1.0));
    CHECK(report.weighted_f1 == doctest::Approx(1.0));
    CHECK(report.n_evaluated == corpus.items.size());
    for (std::size_t g = 0; g < scheme.size(); ++g) {
        for (std::size_t p = 0; p < scheme.size(); ++p) {
            CHECK(report.confusion[g][p] == (g == p ? 3 : 0));
        }
    }
}

TEST_CASE("constant classifier on balanced 2-class set: macro F1 = 1/3") {
    const LabelScheme scheme("two", {"easy", "hard"});
    Corpus corpus{scheme, {}};
    for (int i = 0; i < 10; ++i) {
        corpus.items.push_back({"e" + std::to_string(i), "x.", "easy", "t"});
        corpus.items.push_back({"h" + std::to_string(i), "y.", "hard", "t"});
    }
    const ConstantClassifier classifier(scheme, "easy");
    const DifficultyReport report = evaluate_difficulty(classifier, corpus);
    CHECK(report.per_class_f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.per_class_f1[1] == doctest::Approx(0.0));
    CHECK(report.macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("F1 matches brute-force recomputation on 100 random confusion matrices") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng() % 5;
        std::vector<std::vector<std::size_t>> confusion(k, std::vector<std::size_t>(k));
        for (auto& row : confusion) {
            for (auto& cell : row) cell = rng() % 10;
        }
        const DifficultyReport report = report_from_confusion(confusion);
        std::vector<double> expected_f1;
        double expected_macro, expected_weighted;
        brute_force_f1(confusion, expected_f1, expected_macro, expected_weighted);
        for (std::size_t c = 0; c < k; ++c) {
            CHECK(report.per_class_f1[c] == doctest::Approx(expected_f1[c]).epsilon(1e-12));
            CHECK(report.per_class_f1[c] >= 0.0);
            CHECK(report.per_class_f1[c] <= 1.0);
        }
        CHECK(report.macro_f1 == doctest::Approx(expected_macro).epsilon(1e-12));
        CHECK(report.weighted_f1 == doctest::Approx(expected_weighted).epsilon(1e-12));

        // conservation: totals and row sums
        std::size_t total = 0;
        for (const auto& row : confusion) {
            for (auto cell : row) total += cell;
        }
        CHECK(report.n_evaluated == total);
    }
}

TEST_CASE("serial and parallel evaluation agree") {
    const LabelScheme scheme = LabelScheme::cefr();
    const Corpus corpus = tagged_corpus(scheme, 10);
    const TaggedTextClassifier classifier(scheme);
    const DifficultyReport serial = evaluate_difficulty(classifier, corpus, 1);
    const DifficultyReport parallel = evaluate_difficulty(classifier, corpus, 8);
    CHECK(serial.confusion == parallel.confusion);
    CHECK(serial.macro_f1 == doctest::Approx(parallel.macro_f1));
}

TEST_CASE("misparsed remote replies are excluded and counted") {
    const LabelScheme scheme = LabelScheme::cefr();
    Corpus corpus{scheme, {}};
    corpus.items.push_back({"good", "[B1] texte.", "B1", "t"});
    corpus.items.push_back({"bad", "aucun niveau ici.", "B2", "t"});
    const TaggedTextClassifier classifier(scheme);
    const DifficultyReport report = evaluate_difficulty(classifier, corpus);
    CHECK(report.n_evaluated == 1);
    CHECK(report.n_parse_errors == 1);
}

TEST_CASE("evaluate_difficulty validates inputs") {
    const LabelScheme scheme = LabelScheme::cefr();
    const TaggedTextClassifier classifier(scheme);
    CHECK_THROWS_AS(evaluate_difficulty(classifier, Corpus{scheme, {}}), DataError);
    Corpus unlabeled{scheme, {{"a", "[A1] x.", std::nullopt, "t"}}};
    CHECK_THROWS_AS(evaluate_difficulty(classifier, unlabeled), DataError);
}
