#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cefr/calibration.hpp"
#include "cefr/corpus.hpp"
#include "cefr/difficulty.hpp"
#include "cefr/errors.hpp"
#include "cefr/providers.hpp"
#include "cefr/readability.hpp"
#include "cefr/simplify.hpp"
#include "cefr/textproc.hpp"

namespace {

using nlohmann::json;
using namespace cefr;

// write-temp-then-rename so partially written reports never land at --out
void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + path);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

void emit(const std::optional<std::string>& out_path, const std::string& content) {
    if (out_path) {
        write_atomic(*out_path, content);
    } else {
        std::cout << content;
        if (content.empty() || content.back() != '\n') std::cout << '\n';
    }
}

struct ProviderFlags {
    std::string base_url;
    std::string model_id;
    std::string api_key_env;
    std::size_t timeout_ms = 30000;
    std::size_t max_retries = 3;
    double temperature = 0.0;
};

struct AppConfig {
    ProviderFlags generation;
    ProviderFlags embedding;
    ProviderFlags classifier;
    std::size_t embed_dim = 256;
    std::string scheme = "cefr";
    std::uint64_t seed = 0;
    std::size_t parallelism = 1;
    double w1 = 0.5;
    bool mock = false;
};

void load_provider_section(const json& obj, ProviderFlags& flags) {
    if (obj.contains("base_url")) flags.base_url = obj["base_url"].get<std::string>();
    if (obj.contains("model_id")) flags.model_id = obj["model_id"].get<std::string>();
    if (obj.contains("api_key_env")) flags.api_key_env = obj["api_key_env"].get<std::string>();
    if (obj.contains("timeout_ms")) flags.timeout_ms = obj["timeout_ms"].get<std::size_t>();
    if (obj.contains("max_retries")) flags.max_retries = obj["max_retries"].get<std::size_t>();
    if (obj.contains("temperature")) flags.temperature = obj["temperature"].get<double>();
}

// Config file first, then explicit flags override (flags win).
void load_config_file(const std::string& path, AppConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json obj;
    try {
        obj = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw DataError(std::string("bad config JSON: ") + e.what());
    }
    if (obj.contains("generation")) load_provider_section(obj["generation"], config.generation);
    if (obj.contains("embedding")) load_provider_section(obj["embedding"], config.embedding);
    if (obj.contains("classifier")) load_provider_section(obj["classifier"], config.classifier);
    if (obj.contains("embed_dim")) config.embed_dim = obj["embed_dim"].get<std::size_t>();
    if (obj.contains("scheme")) config.scheme = obj["scheme"].get<std::string>();
    if (obj.contains("seed")) config.seed = obj["seed"].get<std::uint64_t>();
    if (obj.contains("parallelism")) config.parallelism = obj["parallelism"].get<std::size_t>();
    if (obj.contains("w1")) config.w1 = obj["w1"].get<double>();
}

ProviderConfig to_provider_config(const ProviderFlags& flags) {
    ProviderConfig config;
    config.base_url = flags.base_url;
    config.model_id = flags.model_id;
    config.api_key_env = flags.api_key_env;
    config.timeout_ms = flags.timeout_ms;
    config.max_retries = flags.max_retries;
    config.temperature = flags.temperature;
    return config;
}

std::shared_ptr<const Embedder> make_embedder(const AppConfig& config) {
    if (config.mock) return std::make_shared<MockEmbedder>(config.embed_dim);
    if (config.embedding.base_url.empty()) {
        throw UsageError("embedding provider base_url required (or use --mock)");
    }
    return std::make_shared<RemoteEmbedder>(to_provider_config(config.embedding),
                                            make_http_transport(), config.embed_dim);
}

std::shared_ptr<const ChatBackend> make_generation_backend(const AppConfig& config) {
    if (config.mock) return std::make_shared<EchoChatBackend>();
    if (config.generation.base_url.empty()) {
        throw UsageError("generation provider base_url required (or use --mock)");
    }
    return std::make_shared<RemoteChatBackend>(to_provider_config(config.generation),
                                               make_http_transport());
}

std::unique_ptr<Simplifier> make_simplifier(const AppConfig& config,
                                            const LabelScheme& scheme) {
    if (config.mock) return std::make_unique<RuleMockSimplifier>();
    return std::make_unique<RemoteSimplifier>(scheme, make_generation_backend(config));
}

std::unique_ptr<DifficultyClassifier> make_classifier(const AppConfig& config,
                                                      const LabelScheme& scheme,
                                                      const std::string& kind,
                                                      const std::string& model_path,
                                                      const std::string& metric_name,
                                                      bool with_context) {
    if (kind == "readability") {
        if (model_path.empty()) throw UsageError("--model required for readability classifier");
        return std::make_unique<ReadabilityClassifier>(
            readability_metric_from_name(metric_name), CalibrationModel::load(model_path));
    }
    if (kind == "head") {
        if (model_path.empty()) throw UsageError("--model required for embedding head");
        return std::make_unique<EmbeddingHeadClassifier>(
            EmbeddingHeadClassifier::load(model_path, make_embedder(config)));
    }
    if (kind == "remote") {
        if (config.mock) {
            return std::make_unique<StaircaseClassifier>(scheme, scheme.labels().back());
        }
        if (config.classifier.base_url.empty()) {
            throw UsageError("classifier provider base_url required (or use --mock)");
        }
        return std::make_unique<RemoteClassifier>(
            scheme,
            std::make_shared<RemoteChatBackend>(to_provider_config(config.classifier),
                                                make_http_transport()),
            with_context);
    }
    throw UsageError("unknown classifier kind '" + kind +
                     "' (expected: readability, head, remote)");
}

Corpus load_input(const std::string& path, const std::string& format_name,
                  const LabelScheme& scheme) {
    const CorpusFormat format =
        format_name.empty() ? format_from_path(path) : format_from_name(format_name);
    return load_corpus(path, format, scheme);
}

std::string json_classifier_output(const std::string& id, const ClassifierOutput& out) {
    json obj{{"id", id}, {"label", out.label}};
    if (!out.probabilities.empty()) {
        json probs = json::object();
        for (const auto& [label, p] : out.probabilities) probs[label] = p;
        obj["probabilities"] = probs;
    }
    return obj.dump();
}

int run(int argc, char** argv) {
    CLI::App app{"CEFR difficulty estimation and text simplification evaluation"};
    app.require_subcommand(1);

    AppConfig config;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override it");
    app.add_option("--scheme", config.scheme, "label scheme: cefr or ljl");
    app.add_option("--seed", config.seed, "seed for all randomized behavior");
    app.add_flag("--mock", config.mock, "offline mode: deterministic mock backends");
    app.add_option("--parallelism", config.parallelism, "max concurrent provider calls")
        ->check(CLI::PositiveNumber);
    app.add_option("--w1", config.w1, "weight of accuracy in the w-Score");
    app.add_option("--embed-dim", config.embed_dim, "embedding dimension");
    app.add_option("--provider.generation.base_url", config.generation.base_url, "");
    app.add_option("--provider.generation.model_id", config.generation.model_id, "");
    app.add_option("--provider.generation.api_key_env", config.generation.api_key_env, "");
    app.add_option("--provider.generation.temperature", config.generation.temperature, "");
    app.add_option("--provider.embedding.base_url", config.embedding.base_url, "");
    app.add_option("--provider.embedding.model_id", config.embedding.model_id, "");
    app.add_option("--provider.embedding.api_key_env", config.embedding.api_key_env, "");
    app.add_option("--provider.classifier.base_url", config.classifier.base_url, "");
    app.add_option("--provider.classifier.model_id", config.classifier.model_id, "");
    app.add_option("--provider.classifier.api_key_env", config.classifier.api_key_env, "");

    std::string in_path, format_name;
    std::optional<std::string> out_path;

    // stats
    auto* cmd_stats = app.add_subcommand("stats", "corpus statistics as JSON");
    cmd_stats->add_option("--in", in_path, "corpus file")->required();
    cmd_stats->add_option("--format", format_name, "csv or jsonl");
    cmd_stats->add_option("--out", out_path, "output file (default: stdout)");

    // readability
    std::string emit_format = "json";
    auto* cmd_read = app.add_subcommand("readability", "per-item GFI/FKGL/ARI scores");
    cmd_read->add_option("--in", in_path, "corpus file")->required();
    cmd_read->add_option("--format", format_name, "csv or jsonl");
    cmd_read->add_option("--emit", emit_format, "output format: json or csv");
    cmd_read->add_option("--out", out_path, "output file");

    // split
    double fraction = 0.8;
    std::string train_out, test_out;
    auto* cmd_split = app.add_subcommand("split", "seeded stratified train/test split");
    cmd_split->add_option("--in", in_path, "corpus file")->required();
    cmd_split->add_option("--format", format_name, "csv or jsonl");
    cmd_split->add_option("--fraction", fraction, "train fraction in (0,1)");
    cmd_split->add_option("--train-out", train_out, "train corpus output")->required();
    cmd_split->add_option("--test-out", test_out, "test corpus output")->required();

    // calibrate
    std::string metric_name = "fkgl", model_out, model_path;
    FitOptions hyper;
    auto* cmd_cal = app.add_subcommand("calibrate", "fit readability-score calibration");
    cmd_cal->add_option("--in", in_path, "labeled training corpus")->required();
    cmd_cal->add_option("--format", format_name, "csv or jsonl");
    cmd_cal->add_option("--metric", metric_name, "gfi, fkgl, or ari");
    cmd_cal->add_option("--model-out", model_out, "model JSON output path")->required();
    cmd_cal->add_option("--learning-rate", hyper.learning_rate, "");
    cmd_cal->add_option("--l2", hyper.l2, "");
    cmd_cal->add_option("--max-epochs", hyper.max_epochs, "");
    cmd_cal->add_option("--tolerance", hyper.tolerance, "");

    // train-head
    auto* cmd_head = app.add_subcommand("train-head", "fit softmax head over embeddings");
    cmd_head->add_option("--in", in_path, "labeled training corpus")->required();
    cmd_head->add_option("--format", format_name, "csv or jsonl");
    cmd_head->add_option("--model-out", model_out, "model JSON output path")->required();
    cmd_head->add_option("--learning-rate", hyper.learning_rate, "");
    cmd_head->add_option("--l2", hyper.l2, "");
    cmd_head->add_option("--max-epochs", hyper.max_epochs, "");
    cmd_head->add_option("--tolerance", hyper.tolerance, "");

    // classify
    std::string text, classifier_kind = "readability";
    bool no_context = false;
    auto* cmd_classify = app.add_subcommand("classify", "classify one text or a corpus");
    cmd_classify->add_option("--text", text, "single text to classify");
    cmd_classify->add_option("--in", in_path, "corpus file to classify");
    cmd_classify->add_option("--format", format_name, "csv or jsonl");
    cmd_classify->add_option("--classifier", classifier_kind, "readability, head, or remote");
    cmd_classify->add_option("--model", model_path, "model JSON (readability/head)");
    cmd_classify->add_option("--metric", metric_name, "readability metric for calibration");
    cmd_classify->add_flag("--no-context", no_context, "drop the assessor system prompt");
    cmd_classify->add_option("--out", out_path, "output file");

    // eval-difficulty
    std::string confusion_csv_path;
    auto* cmd_evald = app.add_subcommand("eval-difficulty", "F1 report on a labeled corpus");
    cmd_evald->add_option("--in", in_path, "labeled test corpus")->required();
    cmd_evald->add_option("--format", format_name, "csv or jsonl");
    cmd_evald->add_option("--classifier", classifier_kind, "readability, head, or remote");
    cmd_evald->add_option("--model", model_path, "model JSON (readability/head)");
    cmd_evald->add_option("--metric", metric_name, "readability metric for calibration");
    cmd_evald->add_flag("--no-context", no_context, "drop the assessor system prompt");
    cmd_evald->add_option("--confusion-csv", confusion_csv_path, "confusion matrix CSV path");
    cmd_evald->add_option("--out", out_path, "report output file");

    // simplify
    std::string level;
    auto* cmd_simplify = app.add_subcommand("simplify", "simplify one text by one level");
    cmd_simplify->add_option("--text", text, "text to simplify")->required();
    cmd_simplify->add_option("--level", level, "current level, if known");
    cmd_simplify->add_option("--out", out_path, "output file");

    // eval-simplification
    std::string records_out;
    bool literal_wscore = false;
    auto* cmd_evals = app.add_subcommand("eval-simplification",
                                         "A / S / w-Score over an evaluation corpus");
    cmd_evals->add_option("--in", in_path, "evaluation corpus")->required();
    cmd_evals->add_option("--format", format_name, "csv or jsonl");
    cmd_evals->add_option("--records-out", records_out, "per-pair records JSONL path");
    cmd_evals->add_flag("--literal-wscore", literal_wscore,
                        "use the literal published w-Score expression");
    cmd_evals->add_option("--out", out_path, "report output file");

    // iterate
    std::size_t max_iters = 8;
    std::string aggregate_csv;
    auto* cmd_iter = app.add_subcommand("iterate", "iterative simplification traces");
    cmd_iter->add_option("--text", text, "single sentence to iterate on");
    cmd_iter->add_option("--in", in_path, "corpus of sentences to iterate on");
    cmd_iter->add_option("--format", format_name, "csv or jsonl");
    cmd_iter->add_option("--max-iters", max_iters, "simplification steps per sentence");
    cmd_iter->add_option("--aggregate-csv", aggregate_csv, "per-iteration means CSV path");
    cmd_iter->add_option("--out", out_path, "traces output file (JSON)");

    app.parse(argc, argv);
    if (!config_path.empty()) {
        AppConfig from_file = config;
        load_config_file(config_path, from_file);
        // re-apply flag values on top of the file
        AppConfig flags_only = config;
        config = from_file;
        for (const auto* opt : app.get_options()) {
            if (opt->count() == 0) continue;
            const std::string name = opt->get_name();
            if (name == "--scheme") config.scheme = flags_only.scheme;
            else if (name == "--seed") config.seed = flags_only.seed;
            else if (name == "--parallelism") config.parallelism = flags_only.parallelism;
            else if (name == "--w1") config.w1 = flags_only.w1;
            else if (name == "--embed-dim") config.embed_dim = flags_only.embed_dim;
            else if (name.starts_with("--provider.generation."))
                config.generation = flags_only.generation;
            else if (name.starts_with("--provider.embedding."))
                config.embedding = flags_only.embedding;
            else if (name.starts_with("--provider.classifier."))
                config.classifier = flags_only.classifier;
        }
        config.mock = flags_only.mock;
    }

    const LabelScheme scheme = LabelScheme::by_name(config.scheme);

    if (cmd_stats->parsed()) {
        const CorpusStats stats = corpus_stats(load_input(in_path, format_name, scheme));
        json counts = json::object();
        for (const auto& [label, count] : stats.per_label_counts) counts[label] = count;
        const json obj{{"n_items", stats.n_items},
                       {"n_words", stats.n_words},
                       {"n_chars", stats.n_chars},
                       {"per_label_counts", counts}};
        emit(out_path, obj.dump(2));
        return 0;
    }

    if (cmd_read->parsed()) {
        const Corpus corpus = load_input(in_path, format_name, scheme);
        std::ostringstream out;
        if (emit_format == "csv") {
            out << "id,gfi,fkgl,ari\n";
            for (const LabeledText& item : corpus.items) {
                const ReadabilityScores s = readability_scores(compute_stats(item.text));
                out << item.id << ',' << s.gfi << ',' << s.fkgl << ',' << s.ari << '\n';
            }
        } else if (emit_format == "json") {
            for (const LabeledText& item : corpus.items) {
                const ReadabilityScores s = readability_scores(compute_stats(item.text));
                out << json{{"id", item.id}, {"gfi", s.gfi}, {"fkgl", s.fkgl}, {"ari", s.ari}}
                           .dump()
                    << '\n';
            }
        } else {
            throw UsageError("unknown --emit format '" + emit_format + "'");
        }
        emit(out_path, out.str());
        return 0;
    }

    if (cmd_split->parsed()) {
        const Corpus corpus = load_input(in_path, format_name, scheme);
        auto [train, test] = split_corpus(corpus, fraction, config.seed);
        save_corpus(train, train_out, format_from_path(train_out));
        save_corpus(test, test_out, format_from_path(test_out));
        std::cerr << "train: " << train.items.size() << " items, test: " << test.items.size()
                  << " items\n";
        return 0;
    }

    if (cmd_cal->parsed()) {
        const Corpus corpus = load_input(in_path, format_name, scheme);
        const ReadabilityMetric metric = readability_metric_from_name(metric_name);
        std::vector<std::pair<double, std::string>> pairs;
        for (const LabeledText& item : corpus.items) {
            if (!item.label) throw DataError("unlabeled item '" + item.id + "' in training corpus");
            pairs.emplace_back(readability_score(metric, compute_stats(item.text)), *item.label);
        }
        const CalibrationModel model = fit_calibration(pairs, scheme, hyper);
        model.save(model_out);
        std::cerr << "calibrated " << metric_name << " on " << pairs.size() << " items, final loss "
                  << model.softmax().loss_trace.back() << '\n';
        return 0;
    }

    if (cmd_head->parsed()) {
        const Corpus corpus = load_input(in_path, format_name, scheme);
        const EmbeddingHeadClassifier head =
            train_embedding_head(corpus, make_embedder(config), hyper);
        head.save(model_out);
        std::cerr << "trained embedding head on " << corpus.items.size() << " items\n";
        return 0;
    }

    if (cmd_classify->parsed()) {
        const auto classifier = make_classifier(config, scheme, classifier_kind, model_path,
                                                metric_name, !no_context);
        std::ostringstream out;
        if (!text.empty()) {
            out << json_classifier_output("-", classifier->classify(text)) << '\n';
        } else if (!in_path.empty()) {
            const Corpus corpus = load_input(in_path, format_name, scheme);
            for (const LabeledText& item : corpus.items) {
                out << json_classifier_output(item.id, classifier->classify(item.text)) << '\n';
            }
        } else {
            throw UsageError("classify needs --text or --in");
        }
        emit(out_path, out.str());
        return 0;
    }

    if (cmd_evald->parsed()) {
        const Corpus corpus = load_input(in_path, format_name, scheme);
        const auto classifier = make_classifier(config, scheme, classifier_kind, model_path,
                                                metric_name, !no_context);
        const DifficultyReport report =
            evaluate_difficulty(*classifier, corpus, config.parallelism);
        if (!confusion_csv_path.empty()) {
            write_atomic(confusion_csv_path, report.confusion_csv(scheme));
        }
        emit(out_path, report.to_json(scheme));
        return 0;
    }

    if (cmd_simplify->parsed()) {
        const auto simplifier = make_simplifier(config, scheme);
        std::optional<std::string> current_level;
        if (!level.empty()) current_level = level;
        emit(out_path, simplifier->simplify(text, current_level));
        return 0;
    }

    if (cmd_evals->parsed()) {
        const Corpus corpus = load_input(in_path, format_name, scheme);
        const auto simplifier = make_simplifier(config, scheme);
        const auto proxy = make_classifier(config, scheme, "remote", "", "", true);
        const auto embedder = make_embedder(config);
        const WScoreVariant variant =
            literal_wscore ? WScoreVariant::PaperLiteral : WScoreVariant::HarmonicMean;
        auto [report, records] = evaluate_simplification(*simplifier, *proxy, *embedder,
                                                         corpus, config.w1, variant);
        if (!records_out.empty()) write_atomic(records_out, records_to_jsonl(records));
        emit(out_path, report.to_json());
        return 0;
    }

    if (cmd_iter->parsed()) {
        const auto simplifier = make_simplifier(config, scheme);
        const auto embedder = make_embedder(config);
        std::vector<std::string> sentences;
        if (!text.empty()) sentences.push_back(text);
        else if (!in_path.empty()) {
            for (const LabeledText& item : load_input(in_path, format_name, scheme).items) {
                sentences.push_back(item.text);
            }
        } else {
            throw UsageError("iterate needs --text or --in");
        }
        std::vector<IterationTrace> traces;
        json traces_json = json::array();
        for (const std::string& sentence : sentences) {
            // mock proxy restarts at the top level for every sentence
            const auto proxy = make_classifier(config, scheme, "remote", "", "", true);
            traces.push_back(iterate_simplify(*simplifier, *proxy, *embedder, sentence,
                                              max_iters));
            json steps = json::array();
            for (const IterationStep& s : traces.back().steps) {
                steps.push_back({{"iteration", s.iteration},
                                 {"text", s.text},
                                 {"proxy_level", s.proxy_level},
                                 {"similarity_to_step0", s.similarity_to_step0}});
            }
            traces_json.push_back(
                {{"steps", steps}, {"complete", traces.back().complete}});
        }
        if (!aggregate_csv.empty()) {
            write_atomic(aggregate_csv, aggregates_to_csv(aggregate_traces(traces, scheme)));
        }
        emit(out_path, traces_json.dump(2));
        return 0;
    }

    throw UsageError("no subcommand given");
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << e.what() << "\nuse --help for usage\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
