#pragma once

#include <cstdint>
#include <vector>

namespace cefr {

struct FitOptions {
    double learning_rate = 0.1;
    double l2 = 1e-4;
    std::size_t max_epochs = 5000;
    double tolerance = 1e-9;
};

// Softmax (multinomial logistic) regression parameters for K classes over
// d-dimensional features. Flat row-major weights: weights[k * dim + j].
struct SoftmaxModel {
    std::size_t n_classes = 0;
    std::size_t dim = 0;
    std::vector<double> weights;
    std::vector<double> biases;
    std::vector<double> loss_trace;  // loss before each step, then the final loss
};

// Mean cross-entropy plus (l2/2)*||W||^2; biases are not regularized.
double softmax_loss(const std::vector<std::vector<double>>& features,
                    const std::vector<std::size_t>& labels, std::size_t n_classes,
                    const std::vector<double>& weights, const std::vector<double>& biases,
                    double l2);

// Gradient of softmax_loss, same layout as (weights, biases) concatenated.
void softmax_gradient(const std::vector<std::vector<double>>& features,
                      const std::vector<std::size_t>& labels, std::size_t n_classes,
                      const std::vector<double>& weights, const std::vector<double>& biases,
                      double l2, std::vector<double>& grad_weights,
                      std::vector<double>& grad_biases);

// Full-batch gradient descent from zero init. Stops at max_epochs or when
// the loss improves by less than tolerance.
SoftmaxModel fit_softmax(const std::vector<std::vector<double>>& features,
                         const std::vector<std::size_t>& labels, std::size_t n_classes,
                         const FitOptions& options);

// Class probabilities for one feature vector; sums to 1.
std::vector<double> softmax_probabilities(const SoftmaxModel& model,
                                          const std::vector<double>& feature);

// Argmax with ties broken toward the lower index.
std::size_t argmax_lowest(const std::vector<double>& probabilities);

}  // namespace cefr
