#include <doctest.h>

#include <cmath>
#include <random>

#include "cefr/calibration.hpp"
#include "cefr/errors.hpp"

using namespace cefr;

namespace {

std::vector<std::pair<double, std::string>> separable_fixture() {
    std::vector<std::pair<double, std::string>> pairs;
    for (int i = 0; i < 20; ++i) pairs.emplace_back(1.0, "A1");
    for (int i = 0; i < 20; ++i) pairs.emplace_back(10.0, "C2");
    return pairs;
}

}  // namespace

TEST_CASE("separable fixture reaches training accuracy 1.0") {
    const auto pairs = separable_fixture();
    const CalibrationModel model = fit_calibration(pairs, LabelScheme::cefr());
    std::size_t correct = 0;
    for (const auto& [score, label] : pairs) {
        if (model.predict(score).label == label) ++correct;
    }
    CHECK(correct == pairs.size());
    CHECK(model.predict(1.0).label == "A1");
    CHECK(model.predict(10.0).label == "C2");
}

TEST_CASE("zero-epoch fit gives uniform probabilities") {
    FitOptions hyper;
    hyper.max_epochs = 0;
    const CalibrationModel model = fit_calibration(separable_fixture(), LabelScheme::cefr(), hyper);
    const ClassifierOutput out = model.predict(3.7);
    REQUIRE(out.probabilities.size() == 6);
    for (const auto& [label, p] : out.probabilities) {
        CHECK(p == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    }
    CHECK(out.label == "A1");  // tie broken toward the lower rank
}

TEST_CASE("probabilities form a simplex") {
    const CalibrationModel model = fit_calibration(separable_fixture(), LabelScheme::cefr());
    std::mt19937 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const double score = (static_cast<double>(rng()) / rng.max()) * 20.0 - 5.0;
        double sum = 0.0;
        for (const auto& [label, p] : model.predict(score).probabilities) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("bias shift invariance of softmax") {
    const auto pairs = separable_fixture();
    CalibrationModel model = fit_calibration(pairs, LabelScheme::cefr());
    SoftmaxModel shifted = model.softmax();
    for (double& b : shifted.biases) b += 3.25;
    const CalibrationModel shifted_model(model.scheme(), std::move(shifted),
                                         model.feature_mean(), model.feature_std(),
                                         model.hyper());
    for (double score : {0.0, 1.0, 5.5, 10.0}) {
        const auto p1 = model.predict(score).probabilities;
        const auto p2 = shifted_model.predict(score).probabilities;
        for (std::size_t k = 0; k < p1.size(); ++k) {
            CHECK(p1[k].second == doctest::Approx(p2[k].second).epsilon(1e-9));
        }
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937 rng(31);
    auto unit = [&] { return static_cast<double>(rng()) / rng.max() * 2.0 - 1.0; };
    const std::size_t n_classes = 4;
    const std::size_t dim = 1;
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 25; ++i) {
        features.push_back({unit() * 3.0});
        labels.push_back(rng() % n_classes);
    }
    const double l2 = 1e-3;
    const double step = 1e-5;
    for (int point = 0; point < 10; ++point) {
        std::vector<double> weights(n_classes * dim), biases(n_classes);
        for (double& w : weights) w = unit();
        for (double& b : biases) b = unit();
        std::vector<double> gw, gb;
        softmax_gradient(features, labels, n_classes, weights, biases, l2, gw, gb);
        for (std::size_t idx = 0; idx < weights.size() + biases.size(); ++idx) {
            auto loss_at = [&](double delta) {
                auto w = weights;
                auto b = biases;
                if (idx < w.size()) w[idx] += delta;
                else b[idx - w.size()] += delta;
                return softmax_loss(features, labels, n_classes, w, b, l2);
            };
            const double numeric = (loss_at(step) - loss_at(-step)) / (2.0 * step);
            const double analytic = idx < gw.size() ? gw[idx] : gb[idx - gw.size()];
            const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
            CHECK(std::abs(numeric - analytic) / scale <= 1e-5);
        }
    }
}

TEST_CASE("loss trace is non-increasing with default hyperparameters") {
    const CalibrationModel model = fit_calibration(separable_fixture(), LabelScheme::cefr());
    const auto& trace = model.softmax().loss_trace;
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i] <= trace[i - 1] + 1e-12);
    }
}

TEST_CASE("monotone decision regions on the separable fixture") {
    const CalibrationModel model = fit_calibration(separable_fixture(), LabelScheme::cefr());
    std::size_t prev_rank = 0;
    for (double score = -2.0; score <= 13.0; score += 0.05) {
        const std::size_t rank = model.scheme().rank(model.predict(score).label);
        CHECK(rank >= prev_rank);
        prev_rank = rank;
    }
}

TEST_CASE("model reproduces its final training loss") {
    const auto pairs = separable_fixture();
    const CalibrationModel model = fit_calibration(pairs, LabelScheme::cefr());
    CHECK(model.loss(pairs) ==
          doctest::Approx(model.softmax().loss_trace.back()).epsilon(1e-12));
}

TEST_CASE("error cases") {
    CHECK_THROWS_AS(fit_calibration({{1.0, "A1"}, {2.0, "A1"}}, LabelScheme::cefr()), DataError);
    CHECK_THROWS_AS(
        fit_calibration({{std::nan(""), "A1"}, {2.0, "C2"}}, LabelScheme::cefr()), DataError);
    const CalibrationModel model = fit_calibration(separable_fixture(), LabelScheme::cefr());
    CHECK_THROWS_AS(model.predict(std::nan("")), DataError);
}

TEST_CASE("JSON round trip preserves predictions") {
    const CalibrationModel model = fit_calibration(separable_fixture(), LabelScheme::cefr());
    const CalibrationModel reloaded = CalibrationModel::from_json(model.to_json());
    for (double score : {0.5, 3.0, 9.5}) {
        CHECK(reloaded.predict(score).label == model.predict(score).label);
        const auto p1 = model.predict(score).probabilities;
        const auto p2 = reloaded.predict(score).probabilities;
        for (std::size_t k = 0; k < p1.size(); ++k) {
            CHECK(p1[k].second == doctest::Approx(p2[k].second).epsilon(1e-12));
        }
    }
}
