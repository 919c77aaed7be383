#include "purify/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace purify {

std::string_view to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view text) {
    if (text == "tanh" || text == "Tanh") return Activation::Tanh;
    if (text == "relu" || text == "ReLU") return Activation::ReLU;
    throw std::invalid_argument("unknown activation '" + std::string(text) + "'");
}

MlpClassifier::MlpClassifier(std::vector<int> layer_dims, Activation activation)
    : dims_(std::move(layer_dims)), activation_(activation) {
    if (dims_.size() < 2) throw std::invalid_argument("layer_dims: need input and output widths");
    for (int d : dims_)
        if (d < 1) throw std::invalid_argument("layer_dims: widths must be positive");
    if (dims_.back() < 2) throw std::invalid_argument("layer_dims: need at least two classes");
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        weights_.push_back(Mat::Zero(dims_[l + 1], dims_[l]));
        biases_.push_back(Vec::Zero(dims_[l + 1]));
    }
}

MlpClassifier MlpClassifier::random_init(std::vector<int> layer_dims, Activation activation,
                                         std::uint64_t seed) {
    MlpClassifier clf(std::move(layer_dims), activation);
    Rng rng(derive_seed(seed, {0x1417ULL}));
    for (auto& w : clf.weights_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
    }
    return clf;
}

double MlpClassifier::act(double v) const {
    return activation_ == Activation::Tanh ? std::tanh(v) : std::max(v, 0.0);
}

double MlpClassifier::act_grad(double pre) const {
    if (activation_ == Activation::Tanh) {
        const double t = std::tanh(pre);
        return 1.0 - t * t;
    }
    return pre > 0.0 ? 1.0 : 0.0;
}

Vec MlpClassifier::logits(const Vec& x) const {
    if (x.size() != input_dim())
        throw std::invalid_argument("logits: input has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(input_dim()));
    Vec h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Vec pre = weights_[l] * h + biases_[l];
        if (l + 1 < weights_.size()) h = pre.unaryExpr([this](double v) { return act(v); });
        else h = std::move(pre);
    }
    return h;
}

int MlpClassifier::predict(const Vec& x) const {
    Eigen::Index best;
    logits(x).maxCoeff(&best);
    return static_cast<int>(best);
}

MlpClassifier::Gradients MlpClassifier::backward(const Vec& x, const Vec& upstream,
                                                 bool want_params) const {
    const std::size_t n = weights_.size();
    // inputs[l] is the input of layer l; pre[l] its pre-activation.
    std::vector<Vec> inputs(n), pre(n);
    Vec h = x;
    for (std::size_t l = 0; l < n; ++l) {
        inputs[l] = h;
        pre[l] = weights_[l] * h + biases_[l];
        if (l + 1 < n) h = pre[l].unaryExpr([this](double v) { return act(v); });
    }

    Gradients g;
    if (want_params) {
        g.weights.resize(n);
        g.biases.resize(n);
    }
    Vec delta = upstream;
    for (std::size_t l = n; l-- > 0;) {
        if (l + 1 < n)
            delta = delta.cwiseProduct(pre[l].unaryExpr([this](double v) { return act_grad(v); }));
        if (want_params) {
            g.weights[l] = delta * inputs[l].transpose();
            g.biases[l] = delta;
        }
        delta = weights_[l].transpose() * delta;
    }
    g.input = std::move(delta);
    return g;
}

bool MlpClassifier::operator==(const MlpClassifier& other) const {
    if (dims_ != other.dims_ || activation_ != other.activation_) return false;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
    return true;
}

Vec softmax(const Vec& logits) {
    Vec e = (logits.array() - logits.maxCoeff()).exp().matrix();
    return e / e.sum();
}

namespace {

void check_label(const MlpClassifier& clf, int label) {
    if (label < 0 || label >= clf.num_classes())
        throw std::invalid_argument("label " + std::to_string(label) + " out of range");
}

// Cross-entropy and d loss / d logits.
double cross_entropy(const Vec& z, int label, Vec& dlogits) {
    const double top = z.maxCoeff();
    const double lse = top + std::log((z.array() - top).exp().sum());
    dlogits = (z.array() - lse).exp().matrix();
    dlogits[label] -= 1.0;
    return lse - z[label];
}

}  // namespace

LossGradient loss_and_input_gradient(const MlpClassifier& clf, const Vec& x, int label) {
    check_label(clf, label);
    Vec dlogits;
    const double loss = cross_entropy(clf.logits(x), label, dlogits);
    return {loss, clf.backward(x, dlogits, false).input};
}

LossGradient margin_and_input_gradient(const MlpClassifier& clf, const Vec& x, int label) {
    check_label(clf, label);
    const Vec z = clf.logits(x);
    Eigen::Index runner_up = -1;
    for (Eigen::Index k = 0; k < z.size(); ++k)
        if (k != label && (runner_up < 0 || z[k] > z[runner_up])) runner_up = k;
    Vec up = Vec::Zero(z.size());
    up[label] = 1.0;
    up[runner_up] = -1.0;
    return {z[label] - z[runner_up], clf.backward(x, up, false).input};
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be nonnegative");
    if (epochs < 1) throw std::invalid_argument("epochs must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
}

namespace {

double mean_loss(const MlpClassifier& clf, const LabeledDataset& data) {
    double total = 0.0;
    Vec scratch;
    for (std::size_t k = 0; k < data.size(); ++k)
        total += cross_entropy(clf.logits(data.points[k]), data.labels[k], scratch);
    return total / static_cast<double>(data.size());
}

}  // namespace

TrainResult train(MlpClassifier clf, const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("train: dataset is empty");
    for (int l : data.labels) check_label(clf, l);

    Rng rng(derive_seed(cfg.seed, {0x7a11ULL}));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result{clf, {}};
    result.loss_trace.push_back(mean_loss(clf, data));
    const std::size_t layers = clf.layers();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<Mat> gw(layers);
            std::vector<Vec> gb(layers);
            for (std::size_t l = 0; l < layers; ++l) {
                gw[l] = Mat::Zero(clf.weights(l).rows(), clf.weights(l).cols());
                gb[l] = Vec::Zero(clf.biases(l).size());
            }
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t idx = order[k];
                Vec dlogits;
                cross_entropy(clf.logits(data.points[idx]), data.labels[idx], dlogits);
                auto g = clf.backward(data.points[idx], dlogits, true);
                for (std::size_t l = 0; l < layers; ++l) {
                    gw[l] += g.weights[l];
                    gb[l] += g.biases[l];
                }
            }
            const double scale = cfg.learning_rate / static_cast<double>(stop - start);
            for (std::size_t l = 0; l < layers; ++l) {
                clf.weights(l) -= scale * gw[l];
                clf.biases(l) -= scale * gb[l];
            }
        }
        const double loss = mean_loss(clf, data);
        if (!std::isfinite(loss)) throw DivergedError(static_cast<std::size_t>(epoch));
        result.loss_trace.push_back(loss);
    }
    result.model = std::move(clf);
    return result;
}

double accuracy_on(const MlpClassifier& clf, const std::vector<Vec>& points,
                   const std::vector<int>& labels) {
    if (points.empty()) return 1.0;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < points.size(); ++k)
        if (clf.predict(points[k]) == labels[k]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(points.size());
}

AccuracyResult accuracy(const MlpClassifier& clf, const LabeledDataset& data,
                        const std::optional<Purification>& purifier, std::uint64_t seed) {
    if (data.empty()) return {1.0, true};
    if (!purifier) return {accuracy_on(clf, data.points, data.labels), false};
    const BatchResult purified = purify_batch(data.points, purifier->config, purifier->score, seed);
    return {accuracy_on(clf, purified.points, data.labels), false};
}

void save_model(std::ostream& out, const MlpClassifier& clf) {
    out << "mlp " << to_string(clf.activation());
    for (int d : clf.layer_dims()) out << ' ' << d;
    out << '\n' << std::setprecision(17);
    for (std::size_t l = 0; l < clf.layers(); ++l) {
        const Mat& w = clf.weights(l);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << w(i, j);
            out << '\n';
        }
        const Vec& b = clf.biases(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << b[i];
        out << "\n\n";
    }
}

MlpClassifier load_model(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("model: missing header");
    std::istringstream hs(header);
    std::string magic, act;
    hs >> magic >> act;
    if (magic != "mlp") throw std::runtime_error("model: bad header '" + header + "'");
    std::vector<int> dims;
    for (int d; hs >> d;) dims.push_back(d);
    MlpClassifier clf(dims, parse_activation(act));
    auto read = [&in](double& v) {
        if (!(in >> v)) throw std::runtime_error("model: truncated parameter block");
    };
    for (std::size_t l = 0; l < clf.layers(); ++l) {
        Mat& w = clf.weights(l);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) read(w(i, j));
        for (Eigen::Index i = 0; i < clf.biases(l).size(); ++i) read(clf.biases(l)[i]);
    }
    return clf;
}

}  // namespace purify
