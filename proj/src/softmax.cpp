#include "cefr/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cefr/errors.hpp"

namespace cefr {

namespace {

// Stable softmax of logits, in place.
void softmax_inplace(std::vector<double>& logits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - max_logit);
        sum += z;
    }
    for (double& z : logits) z /= sum;
}

std::vector<double> logits_for(const std::vector<double>& weights,
                               const std::vector<double>& biases, std::size_t n_classes,
                               const std::vector<double>& x) {
    const std::size_t dim = x.size();
    std::vector<double> logits(n_classes);
    for (std::size_t k = 0; k < n_classes; ++k) {
        double z = biases[k];
        const double* w = weights.data() + k * dim;
        for (std::size_t j = 0; j < dim; ++j) z += w[j] * x[j];
        logits[k] = z;
    }
    return logits;
}

void check_shapes(const std::vector<std::vector<double>>& features,
                  const std::vector<std::size_t>& labels, std::size_t n_classes) {
    if (features.empty()) throw DataError("no training examples");
    if (features.size() != labels.size()) throw DataError("feature/label count mismatch");
    const std::size_t dim = features.front().size();
    for (const auto& x : features) {
        if (x.size() != dim) throw DataError("inconsistent feature dimension");
        for (double v : x) {
            if (!std::isfinite(v)) throw DataError("non-finite feature value");
        }
    }
    for (std::size_t y : labels) {
        if (y >= n_classes) throw DataError("label index out of range");
    }
}

}  // namespace

double softmax_loss(const std::vector<std::vector<double>>& features,
                    const std::vector<std::size_t>& labels, std::size_t n_classes,
                    const std::vector<double>& weights, const std::vector<double>& biases,
                    double l2) {
    const std::size_t n = features.size();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p = logits_for(weights, biases, n_classes, features[i]);
        softmax_inplace(p);
        loss -= std::log(std::max(p[labels[i]], std::numeric_limits<double>::min()));
    }
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return loss + 0.5 * l2 * reg;
}

void softmax_gradient(const std::vector<std::vector<double>>& features,
                      const std::vector<std::size_t>& labels, std::size_t n_classes,
                      const std::vector<double>& weights, const std::vector<double>& biases,
                      double l2, std::vector<double>& grad_weights,
                      std::vector<double>& grad_biases) {
    const std::size_t n = features.size();
    const std::size_t dim = features.front().size();
    grad_weights.assign(n_classes * dim, 0.0);
    grad_biases.assign(n_classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p = logits_for(weights, biases, n_classes, features[i]);
        softmax_inplace(p);
        p[labels[i]] -= 1.0;
        for (std::size_t k = 0; k < n_classes; ++k) {
            grad_biases[k] += p[k];
            double* gw = grad_weights.data() + k * dim;
            const double* x = features[i].data();
            for (std::size_t j = 0; j < dim; ++j) gw[j] += p[k] * x[j];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& g : grad_biases) g *= inv_n;
    for (std::size_t idx = 0; idx < grad_weights.size(); ++idx) {
        grad_weights[idx] = grad_weights[idx] * inv_n + l2 * weights[idx];
    }
}

SoftmaxModel fit_softmax(const std::vector<std::vector<double>>& features,
                         const std::vector<std::size_t>& labels, std::size_t n_classes,
                         const FitOptions& options) {
    check_shapes(features, labels, n_classes);
    const std::size_t dim = features.front().size();
    SoftmaxModel model;
    model.n_classes = n_classes;
    model.dim = dim;
    model.weights.assign(n_classes * dim, 0.0);
    model.biases.assign(n_classes, 0.0);

    double prev_loss = std::numeric_limits<double>::infinity();
    bool stepped = false;
    std::vector<double> gw, gb;
    for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
        const double loss = softmax_loss(features, labels, n_classes, model.weights,
                                         model.biases, options.l2);
        model.loss_trace.push_back(loss);
        stepped = false;
        if (prev_loss - loss < options.tolerance && epoch > 0) break;
        prev_loss = loss;
        stepped = true;
        softmax_gradient(features, labels, n_classes, model.weights, model.biases,
                         options.l2, gw, gb);
        for (std::size_t idx = 0; idx < model.weights.size(); ++idx) {
            model.weights[idx] -= options.learning_rate * gw[idx];
        }
        for (std::size_t k = 0; k < n_classes; ++k) {
            model.biases[k] -= options.learning_rate * gb[k];
        }
    }
    if (stepped) {
        // the budget ran out after a step: record the loss the model ends at
        model.loss_trace.push_back(softmax_loss(features, labels, n_classes,
                                                model.weights, model.biases, options.l2));
    }
    return model;
}

std::vector<double> softmax_probabilities(const SoftmaxModel& model,
                                          const std::vector<double>& feature) {
    if (feature.size() != model.dim) throw DataError("feature dimension mismatch");
    std::vector<double> p = logits_for(model.weights, model.biases, model.n_classes, feature);
    softmax_inplace(p);
    return p;
}

std::size_t argmax_lowest(const std::vector<double>& probabilities) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < probabilities.size(); ++k) {
        if (probabilities[k] > probabilities[best]) best = k;
    }
    return best;
}

}  // namespace cefr
