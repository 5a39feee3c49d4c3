#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cefr/corpus.hpp"
#include "cefr/softmax.hpp"

namespace cefr {

struct ClassifierOutput {
    std::string label;
    // label -> probability; empty when the backend gives no distribution.
    std::vector<std::pair<std::string, double>> probabilities;
};

// Maps one scalar readability score to a label: the score is standardized,
// then fed to a K-class softmax regression.
class CalibrationModel {
public:
    CalibrationModel(LabelScheme scheme, SoftmaxModel model, double feature_mean,
                     double feature_std, FitOptions hyper);

    const LabelScheme& scheme() const { return scheme_; }
    const SoftmaxModel& softmax() const { return model_; }
    double feature_mean() const { return feature_mean_; }
    double feature_std() const { return feature_std_; }
    const FitOptions& hyper() const { return hyper_; }

    ClassifierOutput predict(double score) const;

    // Training loss on the given pairs under this model's parameters.
    double loss(const std::vector<std::pair<double, std::string>>& pairs) const;

    std::string to_json() const;
    static CalibrationModel from_json(const std::string& text);

    void save(const std::string& path) const;
    static CalibrationModel load(const std::string& path);

private:
    LabelScheme scheme_;
    SoftmaxModel model_;
    double feature_mean_;
    double feature_std_;
    FitOptions hyper_;
};

CalibrationModel fit_calibration(const std::vector<std::pair<double, std::string>>& pairs,
                                 const LabelScheme& scheme, const FitOptions& hyper = {});

}  // namespace cefr
