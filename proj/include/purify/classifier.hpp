#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "purify/gmm.hpp"
#include "purify/purifier.hpp"
#include "purify/rng.hpp"

namespace purify {

enum class Activation { Tanh, ReLU };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

// Dense feed-forward classifier. Hidden layers use `activation`; the last
// layer is affine and produces one logit per class.
class MlpClassifier {
public:
    // All weights and biases zero.
    MlpClassifier(std::vector<int> layer_dims, Activation activation);

    // Glorot-uniform weights, zero biases.
    static MlpClassifier random_init(std::vector<int> layer_dims, Activation activation,
                                     std::uint64_t seed);

    const std::vector<int>& layer_dims() const { return dims_; }
    Activation activation() const { return activation_; }
    int input_dim() const { return dims_.front(); }
    int num_classes() const { return dims_.back(); }
    std::size_t layers() const { return weights_.size(); }

    // weights(l) maps layer l's input (cols) to its output (rows).
    const Mat& weights(std::size_t l) const { return weights_[l]; }
    const Vec& biases(std::size_t l) const { return biases_[l]; }
    Mat& weights(std::size_t l) { return weights_[l]; }
    Vec& biases(std::size_t l) { return biases_[l]; }

    Vec logits(const Vec& x) const;
    int predict(const Vec& x) const;

    struct Gradients {
        std::vector<Mat> weights;
        std::vector<Vec> biases;
        Vec input;
    };

    // Backpropagates `upstream` (d objective / d logits) through the net.
    // Parameter gradients are skipped unless want_params is set.
    Gradients backward(const Vec& x, const Vec& upstream, bool want_params) const;

    bool operator==(const MlpClassifier&) const;

private:
    double act(double v) const;
    double act_grad(double pre) const;

    std::vector<int> dims_;
    Activation activation_;
    std::vector<Mat> weights_;
    std::vector<Vec> biases_;
};

Vec softmax(const Vec& logits);

struct LossGradient {
    double loss;
    Vec grad;
};

// Cross-entropy loss and its gradient with respect to the input.
LossGradient loss_and_input_gradient(const MlpClassifier& clf, const Vec& x, int label);

// Logit margin z_label - max_{k != label} z_k and its input gradient.
LossGradient margin_and_input_gradient(const MlpClassifier& clf, const Vec& x, int label);

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 200;
    int batch_size = 32;
    std::uint64_t seed = 7;

    void validate() const;
};

struct TrainResult {
    MlpClassifier model;
    // Mean dataset loss before training, then after every epoch.
    std::vector<double> loss_trace;
};

// Mini-batch gradient descent on mean cross-entropy. Throws DivergedError
// (step = epoch) on a non-finite loss.
TrainResult train(MlpClassifier clf, const LabeledDataset& data, const TrainConfig& cfg);

struct Purification {
    PurifierConfig config;
    ScoreFn score;
};

struct AccuracyResult {
    double value;
    // Set when the dataset was empty and the value 1.0 is vacuous.
    bool vacuous = false;
};

// Fraction of points whose argmax prediction matches the label; with a
// purifier each point is purified first using purification_stream(seed, i).
AccuracyResult accuracy(const MlpClassifier& clf, const LabeledDataset& data,
                        const std::optional<Purification>& purifier = std::nullopt,
                        std::uint64_t seed = 0);

double accuracy_on(const MlpClassifier& clf, const std::vector<Vec>& points,
                   const std::vector<int>& labels);

// Text format: "mlp <activation> <dims...>" then, per layer, one line per
// weight row followed by one bias line, blocks separated by blank lines.
void save_model(std::ostream& out, const MlpClassifier& clf);
MlpClassifier load_model(std::istream& in);

}  // namespace purify
