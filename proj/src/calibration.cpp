#include "cefr/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cefr/errors.hpp"

namespace cefr {

using nlohmann::json;

namespace {
constexpr double kStdFloor = 1e-12;
}

CalibrationModel::CalibrationModel(LabelScheme scheme, SoftmaxModel model,
                                   double feature_mean, double feature_std,
                                   FitOptions hyper)
    : scheme_(std::move(scheme)),
      model_(std::move(model)),
      feature_mean_(feature_mean),
      feature_std_(feature_std),
      hyper_(hyper) {
    if (model_.n_classes != scheme_.size()) {
        throw DataError("calibration model class count does not match scheme");
    }
    if (!(feature_std_ > 0.0)) throw DataError("feature std must be positive");
}

ClassifierOutput CalibrationModel::predict(double score) const {
    if (!std::isfinite(score)) throw DataError("non-finite readability score");
    const double x = (score - feature_mean_) / feature_std_;
    const std::vector<double> probs = softmax_probabilities(model_, {x});
    ClassifierOutput out;
    out.label = scheme_.label_at(argmax_lowest(probs));
    out.probabilities.reserve(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) {
        out.probabilities.emplace_back(scheme_.label_at(k), probs[k]);
    }
    return out;
}

double CalibrationModel::loss(
    const std::vector<std::pair<double, std::string>>& pairs) const {
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
    features.reserve(pairs.size());
    labels.reserve(pairs.size());
    for (const auto& [score, label] : pairs) {
        features.push_back({(score - feature_mean_) / feature_std_});
        labels.push_back(scheme_.rank(label));
    }
    return softmax_loss(features, labels, model_.n_classes, model_.weights,
                        model_.biases, hyper_.l2);
}

std::string CalibrationModel::to_json() const {
    json obj{
        {"scheme", {{"name", scheme_.name()}, {"labels", scheme_.labels()}}},
        {"weights", model_.weights},
        {"biases", model_.biases},
        {"feature_mean", feature_mean_},
        {"feature_std", feature_std_},
        {"hyper",
         {{"learning_rate", hyper_.learning_rate},
          {"l2", hyper_.l2},
          {"max_epochs", hyper_.max_epochs},
          {"tolerance", hyper_.tolerance}}},
    };
    return obj.dump(2);
}

CalibrationModel CalibrationModel::from_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad calibration model JSON: ") + e.what());
    }
    try {
        LabelScheme scheme(obj.at("scheme").at("name").get<std::string>(),
                           obj.at("scheme").at("labels").get<std::vector<std::string>>());
        SoftmaxModel model;
        model.weights = obj.at("weights").get<std::vector<double>>();
        model.biases = obj.at("biases").get<std::vector<double>>();
        model.n_classes = model.biases.size();
        model.dim = 1;
        if (model.weights.size() != model.n_classes) {
            throw DataError("calibration weights/biases size mismatch");
        }
        FitOptions hyper;
        hyper.learning_rate = obj.at("hyper").at("learning_rate").get<double>();
        hyper.l2 = obj.at("hyper").at("l2").get<double>();
        hyper.max_epochs = obj.at("hyper").at("max_epochs").get<std::size_t>();
        hyper.tolerance = obj.at("hyper").at("tolerance").get<double>();
        return CalibrationModel(std::move(scheme), std::move(model),
                                obj.at("feature_mean").get<double>(),
                                obj.at("feature_std").get<double>(), hyper);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad calibration model JSON: ") + e.what());
    }
}

void CalibrationModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    out << to_json() << '\n';
}

CalibrationModel CalibrationModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

CalibrationModel fit_calibration(const std::vector<std::pair<double, std::string>>& pairs,
                                 const LabelScheme& scheme, const FitOptions& hyper) {
    if (pairs.empty()) throw DataError("no (score, label) pairs to calibrate on");
    std::set<std::string> distinct;
    for (const auto& [score, label] : pairs) {
        if (!std::isfinite(score)) throw DataError("non-finite readability score");
        scheme.rank(label);  // validates
        distinct.insert(label);
    }
    if (distinct.size() < 2) throw DataError("calibration needs at least 2 distinct labels");

    double mean = 0.0;
    for (const auto& p : pairs) mean += p.first;
    mean /= static_cast<double>(pairs.size());
    double var = 0.0;
    for (const auto& p : pairs) var += (p.first - mean) * (p.first - mean);
    var /= static_cast<double>(pairs.size());
    const double std_dev = std::max(std::sqrt(var), kStdFloor);

    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
    features.reserve(pairs.size());
    labels.reserve(pairs.size());
    for (const auto& [score, label] : pairs) {
        features.push_back({(score - mean) / std_dev});
        labels.push_back(scheme.rank(label));
    }
    SoftmaxModel model = fit_softmax(features, labels, scheme.size(), hyper);
    return CalibrationModel(scheme, std::move(model), mean, std_dev, hyper);
}

}  // namespace cefr
