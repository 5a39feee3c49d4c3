#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cefr/calibration.hpp"
#include "cefr/errors.hpp"
#include "cefr/softmax.hpp"
#include "cefr/corpus.hpp"
#include "cefr/difficulty.hpp"
#include "cefr/providers.hpp"
#include "cefr/readability.hpp"
#include "cefr/simplify.hpp"
#include "cefr/textproc.hpp"

namespace py = pybind11;
using namespace cefr;

PYBIND11_MODULE(_cefr, m) {
    m.doc() = "French CEFR difficulty estimation and simplification evaluation";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ProviderError>(m, "ProviderError", PyExc_RuntimeError);

    py::class_<LabelScheme>(m, "LabelScheme")
        .def(py::init<std::string, std::vector<std::string>>(), py::arg("name"),
             py::arg("labels"))
        .def_static("cefr", &LabelScheme::cefr)
        .def_static("ljl", &LabelScheme::ljl)
        .def_static("by_name", &LabelScheme::by_name)
        .def_property_readonly("name", &LabelScheme::name)
        .def_property_readonly("labels", &LabelScheme::labels)
        .def("rank", &LabelScheme::rank)
        .def("label_at", &LabelScheme::label_at)
        .def("contains", &LabelScheme::contains)
        .def("__len__", &LabelScheme::size);

    py::class_<LabeledText>(m, "LabeledText")
        .def(py::init([](std::string id, std::string text,
                         std::optional<std::string> label, std::string source) {
                 return LabeledText{std::move(id), std::move(text), std::move(label),
                                    std::move(source)};
             }),
             py::arg("id"), py::arg("text"), py::arg("label") = std::nullopt,
             py::arg("source") = "")
        .def_readwrite("id", &LabeledText::id)
        .def_readwrite("text", &LabeledText::text)
        .def_readwrite("label", &LabeledText::label)
        .def_readwrite("source", &LabeledText::source);

    py::class_<Corpus>(m, "Corpus")
        .def(py::init<LabelScheme, std::vector<LabeledText>>(), py::arg("scheme"),
             py::arg("items"))
        .def_readwrite("scheme", &Corpus::scheme)
        .def_readwrite("items", &Corpus::items)
        .def("__len__", [](const Corpus& c) { return c.items.size(); });

    py::enum_<CorpusFormat>(m, "CorpusFormat")
        .value("Csv", CorpusFormat::Csv)
        .value("Jsonl", CorpusFormat::Jsonl);

    m.def("load_corpus", &load_corpus, py::arg("path"), py::arg("scheme"),
          py::arg("format"));
    m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("path"),
          py::arg("format"));

    py::class_<CorpusStats>(m, "CorpusStats")
        .def_readonly("n_items", &CorpusStats::n_items)
        .def_readonly("n_words", &CorpusStats::n_words)
        .def_readonly("n_chars", &CorpusStats::n_chars)
        .def_readonly("per_label_counts", &CorpusStats::per_label_counts);
    m.def("corpus_stats", &corpus_stats);
    m.def("split_corpus", &split_corpus, py::arg("corpus"), py::arg("train_fraction"),
          py::arg("seed"));
    m.def("sample_eval_set", &sample_eval_set, py::arg("corpora"), py::arg("per_level"),
          py::arg("levels"), py::arg("seed"));

    m.def("segment_sentences", &segment_sentences);
    m.def("tokenize_words", &tokenize_words);
    m.def("count_syllables", &count_syllables);

    py::class_<TextStats>(m, "TextStats")
        .def(py::init<>())
        .def_readwrite("n_sentences", &TextStats::n_sentences)
        .def_readwrite("n_words", &TextStats::n_words)
        .def_readwrite("n_syllables", &TextStats::n_syllables)
        .def_readwrite("n_chars", &TextStats::n_chars)
        .def_readwrite("n_complex_words", &TextStats::n_complex_words);
    m.def("compute_stats", &compute_stats);

    m.def("gfi", [](const TextStats& s) { return gfi(s); });
    m.def("fkgl", [](const TextStats& s) { return fkgl(s); });
    m.def("ari", [](const TextStats& s) { return ari(s); });
    py::class_<ReadabilityScores>(m, "ReadabilityScores")
        .def_readonly("gfi", &ReadabilityScores::gfi)
        .def_readonly("fkgl", &ReadabilityScores::fkgl)
        .def_readonly("ari", &ReadabilityScores::ari);
    m.def("readability_scores", [](const TextStats& s) { return readability_scores(s); });

    py::class_<ClassifierOutput>(m, "ClassifierOutput")
        .def_readonly("label", &ClassifierOutput::label)
        .def_readonly("probabilities", &ClassifierOutput::probabilities);

    py::class_<FitOptions>(m, "FitOptions")
        .def(py::init<>())
        .def_readwrite("learning_rate", &FitOptions::learning_rate)
        .def_readwrite("l2", &FitOptions::l2)
        .def_readwrite("max_epochs", &FitOptions::max_epochs)
        .def_readwrite("tolerance", &FitOptions::tolerance)
        .def("__repr__", [](const FitOptions&) { return "FitOptions()"; });

    py::class_<CalibrationModel>(m, "CalibrationModel")
        .def("predict", &CalibrationModel::predict)
        .def("save", &CalibrationModel::save)
        .def_static("load", &CalibrationModel::load);
    m.def("fit_calibration", &fit_calibration, py::arg("pairs"), py::arg("scheme"),
          py::arg("hyper") = FitOptions{});

    py::class_<EmbeddingVector>(m, "EmbeddingVector")
        .def(py::init([](std::vector<double> values) {
                 return EmbeddingVector{std::move(values)};
             }),
             py::arg("values"))
        .def_readwrite("values", &EmbeddingVector::values);
    m.def("cosine", &cosine);
    m.def("mock_embed", &mock_embed, py::arg("text"), py::arg("dim"));

    py::enum_<WScoreVariant>(m, "WScoreVariant")
        .value("HarmonicMean", WScoreVariant::HarmonicMean)
        .value("PaperLiteral", WScoreVariant::PaperLiteral);
    m.def("w_score", &w_score, py::arg("accuracy"), py::arg("similarity"),
          py::arg("w1") = 0.5, py::arg("variant") = WScoreVariant::HarmonicMean);

    m.def("parse_level_response", &parse_level_response, py::arg("response"),
          py::arg("scheme"));
    m.def("assessor_system_prompt", &assessor_system_prompt);
    m.def("simplification_system_prompt", &simplification_system_prompt,
          py::arg("scheme"), py::arg("current_level") = std::nullopt);

    py::class_<DifficultyClassifier>(m, "DifficultyClassifier")
        .def("classify", &DifficultyClassifier::classify);
    py::class_<StaircaseClassifier, DifficultyClassifier>(m, "StaircaseClassifier")
        .def(py::init<LabelScheme, std::string>(), py::arg("scheme"),
             py::arg("start_level"))
        .def("reset", &StaircaseClassifier::reset);

    py::enum_<SimplificationOutcome>(m, "SimplificationOutcome")
        .value("NotSimplified", SimplificationOutcome::NotSimplified)
        .value("Simplified", SimplificationOutcome::Simplified)
        .value("Skipped", SimplificationOutcome::Skipped);
    m.def("simplification_accuracy", &simplification_accuracy, py::arg("proxy"),
          py::arg("original"), py::arg("simplified"));

    py::class_<Simplifier>(m, "Simplifier")
        .def("simplify", &Simplifier::simplify);
    py::class_<RuleMockSimplifier, Simplifier>(m, "RuleMockSimplifier").def(py::init<>());
    py::class_<IdentitySimplifier, Simplifier>(m, "IdentitySimplifier").def(py::init<>());

    py::class_<Embedder>(m, "Embedder").def("embed", &Embedder::embed);
    py::class_<MockEmbedder, Embedder>(m, "MockEmbedder")
        .def(py::init<std::size_t>(), py::arg("dim"));

    py::class_<SimplificationRecord>(m, "SimplificationRecord")
        .def_readonly("id", &SimplificationRecord::id)
        .def_readonly("original", &SimplificationRecord::original)
        .def_readonly("simplified", &SimplificationRecord::simplified)
        .def_readonly("gold_level", &SimplificationRecord::gold_level)
        .def_readonly("proxy_level_original", &SimplificationRecord::proxy_level_original)
        .def_readonly("proxy_level_simplified",
                      &SimplificationRecord::proxy_level_simplified)
        .def_readonly("accuracy", &SimplificationRecord::accuracy)
        .def_readonly("similarity", &SimplificationRecord::similarity);
    py::class_<SimplificationReport>(m, "SimplificationReport")
        .def_readonly("mean_accuracy", &SimplificationReport::mean_accuracy)
        .def_readonly("mean_similarity", &SimplificationReport::mean_similarity)
        .def_readonly("w_score", &SimplificationReport::w_score)
        .def_readonly("n_pairs", &SimplificationReport::n_pairs)
        .def_readonly("n_skipped", &SimplificationReport::n_skipped)
        .def("to_json", &SimplificationReport::to_json);
    m.def("evaluate_simplification", &evaluate_simplification, py::arg("simplifier"),
          py::arg("proxy"), py::arg("embedder"), py::arg("corpus"), py::arg("w1") = 0.5,
          py::arg("variant") = WScoreVariant::HarmonicMean);

    py::class_<IterationStep>(m, "IterationStep")
        .def_readonly("iteration", &IterationStep::iteration)
        .def_readonly("text", &IterationStep::text)
        .def_readonly("proxy_level", &IterationStep::proxy_level)
        .def_readonly("similarity_to_step0", &IterationStep::similarity_to_step0);
    py::class_<IterationTrace>(m, "IterationTrace")
        .def_readonly("steps", &IterationTrace::steps)
        .def_readonly("complete", &IterationTrace::complete)
        .def_readonly("error", &IterationTrace::error);
    m.def("iterate_simplify", &iterate_simplify, py::arg("simplifier"), py::arg("proxy"),
          py::arg("embedder"), py::arg("text"), py::arg("max_iters"));

    py::class_<IterationAggregate>(m, "IterationAggregate")
        .def_readonly("iteration", &IterationAggregate::iteration)
        .def_readonly("mean_rank", &IterationAggregate::mean_rank)
        .def_readonly("mean_similarity", &IterationAggregate::mean_similarity);
    m.def("aggregate_traces", &aggregate_traces, py::arg("traces"), py::arg("scheme"));
}
