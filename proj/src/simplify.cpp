#include "cefr/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cefr/errors.hpp"
#include "cefr/textproc.hpp"
#include "cefr/utf8.hpp"

namespace cefr {

using nlohmann::json;

const char* const kSimplifyPromptVersion = "simplify-prompt/1";

std::string simplification_system_prompt(const LabelScheme& scheme,
                                         const std::optional<std::string>& current_level) {
    std::string prompt =
        "Tu es un assistant de simplification de textes en français. Réécris le "
        "texte fourni pour qu'il soit exactement un niveau CEFR plus facile que "
        "l'original, en préservant le sens aussi fidèlement que possible. Réponds "
        "uniquement avec le texte simplifié, sans commentaire.";
    if (current_level) {
        const std::size_t rank = scheme.rank(*current_level);
        prompt += " Le texte est actuellement au niveau " + *current_level + ".";
        if (rank > 0) {
            prompt += " Le niveau cible est " + scheme.label_at(rank - 1) + ".";
        }
    }
    return prompt;
}

RemoteSimplifier::RemoteSimplifier(LabelScheme scheme,
                                   std::shared_ptr<const ChatBackend> backend)
    : scheme_(std::move(scheme)), backend_(std::move(backend)) {
    if (!backend_) throw UsageError("remote simplifier needs a chat backend");
}

std::string RemoteSimplifier::simplify(const std::string& text,
                                       const std::optional<std::string>& current_level) const {
    if (text.empty()) throw UsageError("cannot simplify empty text");
    const std::string reply =
        backend_->complete(simplification_system_prompt(scheme_, current_level), text);
    if (reply.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw ProviderError("simplification backend returned an empty completion");
    }
    return reply;
}

namespace {

bool rule_is_letter(char32_t cp) {
    if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) return true;
    if (cp >= 0x00C0 && cp <= 0x00FF) return cp != 0x00D7 && cp != 0x00F7;
    return cp >= 0x0100 && cp <= 0x017F;
}

bool rule_is_joiner(char32_t cp) { return cp == U'\'' || cp == 0x2019 || cp == U'-'; }

}  // namespace

std::string RuleMockSimplifier::simplify(const std::string& text,
                                         const std::optional<std::string>&) const {
    if (text.empty()) throw UsageError("cannot simplify empty text");
    const std::vector<char32_t> cps = utf8::decode(text);
    std::string out;
    std::size_t i = 0;
    while (i < cps.size()) {
        if (!rule_is_letter(cps[i])) {
            utf8::append(out, cps[i]);
            ++i;
            continue;
        }
        std::string word;
        utf8::append(word, cps[i]);
        ++i;
        while (i < cps.size()) {
            if (rule_is_letter(cps[i])) {
                utf8::append(word, cps[i]);
                ++i;
            } else if (rule_is_joiner(cps[i]) && i + 1 < cps.size() &&
                       rule_is_letter(cps[i + 1])) {
                utf8::append(word, cps[i]);
                ++i;
            } else {
                break;
            }
        }
        out += count_syllables(word) >= 3 ? "simple" : word;
    }
    return out;
}

StaircaseClassifier::StaircaseClassifier(LabelScheme scheme, const std::string& start_label)
    : scheme_(std::move(scheme)), current_rank_(scheme_.rank(start_label)) {}

ClassifierOutput StaircaseClassifier::classify(const std::string& text) const {
    if (text.empty()) throw DataError("cannot classify empty text");
    const std::size_t rank = current_rank_;
    if (current_rank_ > 0) --current_rank_;
    return {scheme_.label_at(rank), {}};
}

void StaircaseClassifier::reset(const std::string& start_label) {
    current_rank_ = scheme_.rank(start_label);
}

SimplificationOutcome simplification_accuracy(const DifficultyClassifier& proxy,
                                              const std::string& original,
                                              const std::string& simplified) {
    if (original.empty() || simplified.empty()) {
        throw DataError("simplification accuracy needs non-empty texts");
    }
    const LabelScheme& scheme = proxy.scheme();
    const std::size_t rank_original = scheme.rank(proxy.classify(original).label);
    if (rank_original == 0) return SimplificationOutcome::Skipped;
    const std::size_t rank_simplified = scheme.rank(proxy.classify(simplified).label);
    return rank_original - rank_simplified == 1 ? SimplificationOutcome::Simplified
                                                : SimplificationOutcome::NotSimplified;
}

double w_score(double mean_accuracy, double mean_similarity, double w1,
               WScoreVariant variant) {
    if (!(w1 > 0.0 && w1 < 1.0)) throw UsageError("w1 must be in (0,1)");
    if (!(mean_accuracy >= 0.0 && mean_accuracy <= 1.0)) {
        throw UsageError("mean accuracy must be in [0,1]");
    }
    const double a = mean_accuracy;
    const double s = std::clamp(mean_similarity, 0.0, 1.0);
    const double w2 = 1.0 - w1;
    if (variant == WScoreVariant::PaperLiteral) {
        const double denom = w1 * a + w2 * s;
        return denom > 0.0 ? 2.0 * (w1 * a) * (w2 * s) / denom : 0.0;
    }
    if (a == 0.0 || s == 0.0) return 0.0;
    return a * s / (w1 * s + w2 * a);
}

std::pair<SimplificationReport, std::vector<SimplificationRecord>> evaluate_simplification(
    const Simplifier& simplifier, const DifficultyClassifier& proxy,
    const Embedder& embedder, const Corpus& eval_set, double w1, WScoreVariant variant) {
    if (eval_set.items.empty()) throw DataError("empty evaluation set");
    const LabelScheme& scheme = proxy.scheme();

    SimplificationReport report;
    std::vector<SimplificationRecord> records;
    double sum_accuracy = 0.0;
    double sum_similarity = 0.0;

    for (const LabeledText& item : eval_set.items) {
        std::size_t rank_original;
        std::string level_original;
        try {
            level_original = proxy.classify(item.text).label;
            rank_original = scheme.rank(level_original);
        } catch (const ProviderError& e) {
            throw ProviderError("item '" + item.id + "': " + e.what());
        }
        if (rank_original == 0) {
            ++report.n_skipped;
            continue;
        }

        SimplificationRecord record;
        record.id = item.id;
        record.original = item.text;
        record.gold_level = item.label;
        record.proxy_level_original = level_original;
        try {
            record.simplified = simplifier.simplify(item.text, level_original);
            record.proxy_level_simplified = proxy.classify(record.simplified).label;
            record.similarity = cosine(embedder.embed(item.text),
                                       embedder.embed(record.simplified));
        } catch (const ProviderError& e) {
            throw ProviderError("item '" + item.id + "': " + e.what());
        }
        const std::size_t rank_simplified = scheme.rank(record.proxy_level_simplified);
        record.accuracy = rank_original - rank_simplified == 1 ? 1 : 0;

        sum_accuracy += record.accuracy;
        sum_similarity += std::clamp(record.similarity, 0.0, 1.0);
        records.push_back(std::move(record));
    }

    report.n_pairs = records.size();
    if (report.n_pairs > 0) {
        report.mean_accuracy = sum_accuracy / static_cast<double>(report.n_pairs);
        report.mean_similarity = sum_similarity / static_cast<double>(report.n_pairs);
        report.w_score = cefr::w_score(report.mean_accuracy, report.mean_similarity, w1, variant);
    }
    return {report, std::move(records)};
}

std::string SimplificationReport::to_json() const {
    const json obj{
        {"mean_accuracy", mean_accuracy}, {"mean_similarity", mean_similarity},
        {"w_score", w_score},             {"n_pairs", n_pairs},
        {"n_skipped", n_skipped},
    };
    return obj.dump(2);
}

std::string records_to_jsonl(const std::vector<SimplificationRecord>& records) {
    std::ostringstream out;
    for (const SimplificationRecord& r : records) {
        json obj{
            {"id", r.id},
            {"original", r.original},
            {"simplified", r.simplified},
            {"proxy_level_original", r.proxy_level_original},
            {"proxy_level_simplified", r.proxy_level_simplified},
            {"accuracy", r.accuracy},
            {"similarity", r.similarity},
        };
        if (r.gold_level) obj["gold_level"] = *r.gold_level;
        else obj["gold_level"] = nullptr;
        out << obj.dump() << '\n';
    }
    return out.str();
}

IterationTrace iterate_simplify(const Simplifier& simplifier,
                                const DifficultyClassifier& proxy,
                                const Embedder& embedder, const std::string& sentence,
                                std::size_t max_iters) {
    if (sentence.empty()) throw UsageError("cannot iterate on empty sentence");
    if (max_iters < 1) throw UsageError("max_iters must be >= 1");

    IterationTrace trace;
    const EmbeddingVector origin = embedder.embed(sentence);
    trace.steps.push_back(
        {0, sentence, proxy.classify(sentence).label, cosine(origin, origin)});

    std::string current = sentence;
    for (std::size_t i = 1; i <= max_iters; ++i) {
        try {
            current = simplifier.simplify(current, trace.steps.back().proxy_level);
            trace.steps.push_back({i, current, proxy.classify(current).label,
                                   cosine(origin, embedder.embed(current))});
        } catch (const ProviderError& e) {
            trace.complete = false;
            trace.error = e.what();
            break;
        }
    }
    return trace;
}

std::vector<IterationAggregate> aggregate_traces(const std::vector<IterationTrace>& traces,
                                                 const LabelScheme& scheme) {
    if (traces.empty()) throw DataError("no traces to aggregate");
    const std::size_t n_steps = traces.front().steps.size();
    for (const IterationTrace& t : traces) {
        if (t.steps.size() != n_steps) {
            throw DataError("traces have mismatched lengths; cannot aggregate");
        }
    }
    std::vector<IterationAggregate> out(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        out[i].iteration = i;
        for (const IterationTrace& t : traces) {
            out[i].mean_rank += static_cast<double>(scheme.rank(t.steps[i].proxy_level));
            out[i].mean_similarity += t.steps[i].similarity_to_step0;
        }
        out[i].mean_rank /= static_cast<double>(traces.size());
        out[i].mean_similarity /= static_cast<double>(traces.size());
    }
    return out;
}

std::string aggregates_to_csv(const std::vector<IterationAggregate>& aggregates) {
    std::ostringstream out;
    out << "iteration,mean_rank,mean_similarity\n";
    for (const IterationAggregate& a : aggregates) {
        out << a.iteration << ',' << a.mean_rank << ',' << a.mean_similarity << '\n';
    }
    return out.str();
}

}  // namespace cefr
