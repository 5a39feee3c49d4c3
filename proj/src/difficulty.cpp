#include "cefr/difficulty.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cefr/errors.hpp"

namespace cefr {

using nlohmann::json;

ReadabilityMetric readability_metric_from_name(const std::string& name) {
    if (name == "gfi") return ReadabilityMetric::Gfi;
    if (name == "fkgl") return ReadabilityMetric::Fkgl;
    if (name == "ari") return ReadabilityMetric::Ari;
    throw UsageError("unknown readability metric '" + name + "' (expected: gfi, fkgl, ari)");
}

double readability_score(ReadabilityMetric metric, const TextStats& stats) {
    switch (metric) {
        case ReadabilityMetric::Gfi: return gfi(stats);
        case ReadabilityMetric::Fkgl: return fkgl(stats);
        case ReadabilityMetric::Ari: return ari(stats);
    }
    throw UsageError("invalid readability metric");
}

ReadabilityClassifier::ReadabilityClassifier(ReadabilityMetric metric, CalibrationModel model)
    : metric_(metric), model_(std::move(model)) {}

ClassifierOutput ReadabilityClassifier::classify(const std::string& text) const {
    if (text.empty()) throw DataError("cannot classify empty text");
    return model_.predict(readability_score(metric_, compute_stats(text)));
}

EmbeddingHeadClassifier::EmbeddingHeadClassifier(LabelScheme scheme, SoftmaxModel head,
                                                 std::shared_ptr<const Embedder> embedder)
    : scheme_(std::move(scheme)), head_(std::move(head)), embedder_(std::move(embedder)) {
    if (head_.n_classes != scheme_.size()) {
        throw DataError("embedding head class count does not match scheme");
    }
    if (!embedder_) throw UsageError("embedding head classifier needs an embedder");
    if (head_.dim != embedder_->dim()) {
        throw DataError("embedding head dimension does not match embedder");
    }
}

ClassifierOutput EmbeddingHeadClassifier::classify(const std::string& text) const {
    if (text.empty()) throw DataError("cannot classify empty text");
    const std::vector<double> probs =
        softmax_probabilities(head_, embedder_->embed(text).values);
    ClassifierOutput out;
    out.label = scheme_.label_at(argmax_lowest(probs));
    out.probabilities.reserve(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) {
        out.probabilities.emplace_back(scheme_.label_at(k), probs[k]);
    }
    return out;
}

std::string EmbeddingHeadClassifier::to_json() const {
    json obj{
        {"scheme", {{"name", scheme_.name()}, {"labels", scheme_.labels()}}},
        {"dim", head_.dim},
        {"weights", head_.weights},
        {"biases", head_.biases},
    };
    return obj.dump(2);
}

EmbeddingHeadClassifier EmbeddingHeadClassifier::from_json(
    const std::string& text, std::shared_ptr<const Embedder> embedder) {
    json obj;
    try {
        obj = json::parse(text);
        LabelScheme scheme(obj.at("scheme").at("name").get<std::string>(),
                           obj.at("scheme").at("labels").get<std::vector<std::string>>());
        SoftmaxModel head;
        head.dim = obj.at("dim").get<std::size_t>();
        head.weights = obj.at("weights").get<std::vector<double>>();
        head.biases = obj.at("biases").get<std::vector<double>>();
        head.n_classes = head.biases.size();
        if (head.weights.size() != head.n_classes * head.dim) {
            throw DataError("embedding head weight matrix has wrong size");
        }
        return EmbeddingHeadClassifier(std::move(scheme), std::move(head),
                                       std::move(embedder));
    } catch (const json::exception& e) {
        throw DataError(std::string("bad embedding head JSON: ") + e.what());
    }
}

void EmbeddingHeadClassifier::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    out << to_json() << '\n';
}

EmbeddingHeadClassifier EmbeddingHeadClassifier::load(
    const std::string& path, std::shared_ptr<const Embedder> embedder) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str(), std::move(embedder));
}

EmbeddingHeadClassifier train_embedding_head(const Corpus& train,
                                             std::shared_ptr<const Embedder> embedder,
                                             const FitOptions& hyper) {
    if (!embedder) throw UsageError("train_embedding_head needs an embedder");
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
    std::set<std::size_t> distinct;
    for (const LabeledText& item : train.items) {
        if (!item.label) {
            throw DataError("unlabeled item '" + item.id + "' in training corpus");
        }
        features.push_back(embedder->embed(item.text).values);
        const std::size_t rank = train.scheme.rank(*item.label);
        labels.push_back(rank);
        distinct.insert(rank);
    }
    if (distinct.size() < 2) throw DataError("training corpus has fewer than 2 classes");
    SoftmaxModel head = fit_softmax(features, labels, train.scheme.size(), hyper);
    return EmbeddingHeadClassifier(train.scheme, std::move(head), std::move(embedder));
}

std::string assessor_system_prompt(const LabelScheme& scheme) {
    const auto& labels = scheme.labels();
    return "You are a language assessor using the Common European Framework of "
           "Reference for Languages (CEFR). Your task is to assign a language "
           "proficiency score to this text, using the levels from " +
           labels.front() + " (beginner) to " + labels.back() +
           " (advanced/native). Evaluate this text and assign it the corresponding "
           "level. Answer with the level only.";
}

std::string parse_level_response(const std::string& reply, const LabelScheme& scheme) {
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    auto is_word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    };
    const std::string haystack = lower(reply);
    std::size_t best_pos = std::string::npos;
    std::string best_label;
    for (const std::string& label : scheme.labels()) {
        const std::string needle = lower(label);
        std::size_t pos = 0;
        while ((pos = haystack.find(needle, pos)) != std::string::npos) {
            const bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
            const std::size_t end = pos + needle.size();
            const bool right_ok = end == haystack.size() || !is_word_char(haystack[end]);
            if (left_ok && right_ok) break;
            ++pos;
        }
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best_label = label;
        }
    }
    if (best_pos == std::string::npos) {
        throw DataError("no difficulty label found in reply: \"" + reply + "\"");
    }
    return best_label;
}

RemoteClassifier::RemoteClassifier(LabelScheme scheme,
                                   std::shared_ptr<const ChatBackend> backend,
                                   bool with_context)
    : scheme_(std::move(scheme)), backend_(std::move(backend)), with_context_(with_context) {
    if (!backend_) throw UsageError("remote classifier needs a chat backend");
}

ClassifierOutput RemoteClassifier::classify(const std::string& text) const {
    if (text.empty()) throw DataError("cannot classify empty text");
    const std::string system = with_context_ ? assessor_system_prompt(scheme_) : "";
    const std::string reply = backend_->complete(system, text);
    return {parse_level_response(reply, scheme_), {}};
}

DifficultyReport report_from_confusion(std::vector<std::vector<std::size_t>> confusion,
                                       std::size_t n_parse_errors) {
    const std::size_t k = confusion.size();
    DifficultyReport report;
    report.n_parse_errors = n_parse_errors;
    report.per_class_f1.assign(k, 0.0);
    std::size_t total = 0;
    std::vector<std::size_t> gold(k, 0), predicted(k, 0);
    for (std::size_t g = 0; g < k; ++g) {
        if (confusion[g].size() != k) throw DataError("confusion matrix is not square");
        for (std::size_t p = 0; p < k; ++p) {
            gold[g] += confusion[g][p];
            predicted[p] += confusion[g][p];
            total += confusion[g][p];
        }
    }
    double weighted = 0.0;
    double macro = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double tp = static_cast<double>(confusion[c][c]);
        const double precision = predicted[c] > 0 ? tp / static_cast<double>(predicted[c]) : 0.0;
        const double recall = gold[c] > 0 ? tp / static_cast<double>(gold[c]) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        report.per_class_f1[c] = f1;
        macro += f1;
        if (total > 0) weighted += f1 * static_cast<double>(gold[c]) / static_cast<double>(total);
    }
    report.macro_f1 = k > 0 ? macro / static_cast<double>(k) : 0.0;
    report.weighted_f1 = weighted;
    report.n_evaluated = total;
    report.confusion = std::move(confusion);
    return report;
}

DifficultyReport evaluate_difficulty(const DifficultyClassifier& classifier,
                                     const Corpus& test, std::size_t parallelism) {
    if (test.items.empty()) throw DataError("empty test corpus");
    if (parallelism == 0) throw UsageError("parallelism must be >= 1");
    const LabelScheme& scheme = classifier.scheme();
    const std::size_t k = scheme.size();
    const std::size_t n = test.items.size();
    for (const LabeledText& item : test.items) {
        if (!item.label) throw DataError("unlabeled item '" + item.id + "' in test corpus");
        scheme.rank(*item.label);
    }

    // -1 = parse error; otherwise predicted rank, re-associated by index.
    std::vector<long long> predictions(n, -1);
    std::vector<char> parse_error(n, 0);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                const ClassifierOutput out = classifier.classify(test.items[i].text);
                predictions[i] = static_cast<long long>(scheme.rank(out.label));
            } catch (const DataError&) {
                parse_error[i] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (parallelism <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < std::min(parallelism, n); ++t) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<std::vector<std::size_t>> confusion(k, std::vector<std::size_t>(k, 0));
    std::size_t n_parse_errors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (parse_error[i]) {
            ++n_parse_errors;
            continue;
        }
        const std::size_t g = scheme.rank(*test.items[i].label);
        confusion[g][static_cast<std::size_t>(predictions[i])] += 1;
    }
    return report_from_confusion(std::move(confusion), n_parse_errors);
}

std::string DifficultyReport::to_json(const LabelScheme& scheme) const {
    json per_class = json::object();
    json confusion_json = json::object();
    for (std::size_t c = 0; c < per_class_f1.size(); ++c) {
        per_class[scheme.label_at(c)] = per_class_f1[c];
    }
    for (std::size_t g = 0; g < confusion.size(); ++g) {
        confusion_json[scheme.label_at(g)] = confusion[g];
    }
    const json obj{
        {"labels", scheme.labels()},   {"confusion", confusion_json},
        {"per_class_f1", per_class},   {"macro_f1", macro_f1},
        {"weighted_f1", weighted_f1},  {"n_evaluated", n_evaluated},
        {"n_parse_errors", n_parse_errors},
    };
    return obj.dump(2);
}

std::string DifficultyReport::confusion_csv(const LabelScheme& scheme) const {
    std::ostringstream out;
    out << "gold\\predicted";
    for (const std::string& label : scheme.labels()) out << ',' << label;
    out << '\n';
    for (std::size_t g = 0; g < confusion.size(); ++g) {
        out << scheme.label_at(g);
        for (std::size_t p = 0; p < confusion[g].size(); ++p) out << ',' << confusion[g][p];
        out << '\n';
    }
    return out.str();
}

}  // namespace cefr
