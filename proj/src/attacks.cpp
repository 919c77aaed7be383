#include "purify/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace purify {

std::string_view to_string(AttackKind kind) {
    switch (kind) {
    case AttackKind::PGD: return "PGD";
    case AttackKind::SPSA: return "SPSA";
    case AttackKind::BpdaEot: return "BpdaEot";
    }
    return "?";
}

std::string_view to_string(Norm norm) { return norm == Norm::Linf ? "Linf" : "L2"; }

AttackKind parse_attack_kind(std::string_view text) {
    if (text == "PGD" || text == "pgd") return AttackKind::PGD;
    if (text == "SPSA" || text == "spsa") return AttackKind::SPSA;
    if (text == "BpdaEot" || text == "bpda_eot" || text == "bpda") return AttackKind::BpdaEot;
    throw std::invalid_argument("unknown attack kind '" + std::string(text) + "'");
}

Norm parse_norm(std::string_view text) {
    if (text == "Linf" || text == "linf" || text == "inf") return Norm::Linf;
    if (text == "L2" || text == "l2") return Norm::L2;
    throw std::invalid_argument("unknown norm '" + std::string(text) + "'");
}

void AttackSpec::validate() const {
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
    if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
    if (n_steps < 0) throw std::invalid_argument("n_steps must be nonnegative");
    if (!(spsa_delta > 0.0)) throw std::invalid_argument("spsa_delta must be positive");
    if (spsa_samples < 1) throw std::invalid_argument("spsa_samples must be >= 1");
    if (!(spsa_lr > 0.0)) throw std::invalid_argument("spsa_lr must be positive");
    if (eot_samples < 1) throw std::invalid_argument("eot_samples must be >= 1");
}

Vec project(const Vec& delta, Norm norm, double eps) {
    if (norm == Norm::Linf) return delta.cwiseMax(-eps).cwiseMin(eps);
    const double n = delta.norm();
    if (n > eps) return delta * (eps / n);
    return delta;
}

Vec ascent_direction(const Vec& grad, Norm norm) {
    if (norm == Norm::Linf)
        return grad.unaryExpr([](double g) { return g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0); });
    const double n = grad.norm();
    if (n == 0.0) return Vec::Zero(grad.size());
    return grad / n;
}

double perturbation_norm(const Vec& delta, Norm norm) {
    return norm == Norm::Linf ? delta.lpNorm<Eigen::Infinity>() : delta.norm();
}

namespace {

// Shared PGD loop; `gradient` supplies the ascent signal at the current point.
template <typename GradientFn>
Vec projected_ascent(const Vec& x, const AttackSpec& spec, double step, GradientFn&& gradient) {
    Vec delta = Vec::Zero(x.size());
    if (spec.eps == 0.0) return x;
    for (int it = 0; it < spec.n_steps; ++it) {
        const Vec g = gradient(Vec(x + delta));
        delta = project(delta + step * ascent_direction(g, spec.norm), spec.norm, spec.eps);
    }
    return x + delta;
}

}  // namespace

Vec pgd_attack(const MlpClassifier& clf, const Vec& x, int label, const AttackSpec& spec) {
    spec.validate();
    return projected_ascent(x, spec, spec.step_size, [&](const Vec& xa) {
        return loss_and_input_gradient(clf, xa, label).grad;
    });
}

Vec spsa_gradient(const LossFn& loss_fn, const Vec& x, double delta, int n_samples, Rng& rng) {
    if (!(delta > 0.0)) throw std::invalid_argument("spsa delta must be positive");
    if (n_samples < 1) throw std::invalid_argument("spsa samples must be >= 1");
    Vec sum = Vec::Zero(x.size());
    for (int k = 0; k < n_samples; ++k) {
        const Vec v = rademacher(rng, x.size());
        const double diff = loss_fn(x + delta * v) - loss_fn(x - delta * v);
        // v is its own elementwise reciprocal.
        sum += (diff / (2.0 * delta)) * v;
    }
    return sum / static_cast<double>(n_samples);
}

ModelFn raw_model(const MlpClassifier& clf) {
    return [&clf](const Vec& x, Rng&) { return clf.logits(x); };
}

ModelFn purified_model(const MlpClassifier& clf, const Purification& purifier) {
    return [&clf, &purifier](const Vec& x, Rng& rng) {
        return clf.logits(purify(x, purifier.config, purifier.score, rng));
    };
}

Vec spsa_attack(const ModelFn& model_fn, const Vec& x, int label, const AttackSpec& spec,
                Rng& rng) {
    spec.validate();
    LossFn loss = [&](const Vec& q) {
        const Vec z = model_fn(q, rng);
        const double top = z.maxCoeff();
        return top + std::log((z.array() - top).exp().sum()) - z[label];
    };
    return projected_ascent(x, spec, spec.spsa_lr, [&](const Vec& xa) {
        return spsa_gradient(loss, xa, spec.spsa_delta, spec.spsa_samples, rng);
    });
}

Vec bpda_eot_gradient(const MlpClassifier& clf, const Purification& purifier, const Vec& x,
                      int label, int eot_samples, Rng& rng) {
    if (eot_samples < 1) throw std::invalid_argument("eot_samples must be >= 1");
    Vec sum = Vec::Zero(x.size());
    for (int k = 0; k < eot_samples; ++k) {
        const Vec purified = purify(x, purifier.config, purifier.score, rng);
        sum += loss_and_input_gradient(clf, purified, label).grad;
    }
    return sum / static_cast<double>(eot_samples);
}

Vec bpda_eot_attack(const MlpClassifier& clf, const Purification& purifier, const Vec& x,
                    int label, const AttackSpec& spec, Rng& rng) {
    spec.validate();
    return projected_ascent(x, spec, spec.step_size, [&](const Vec& xa) {
        return bpda_eot_gradient(clf, purifier, xa, label, spec.eot_samples, rng);
    });
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
    return m;
}

}  // namespace

EpsilonCalibration calibrate_epsilon(const MlpClassifier& clf, const std::vector<Vec>& points,
                                     const std::vector<int>& labels, double factor) {
    std::vector<double> margins, grads;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto m = margin_and_input_gradient(clf, points[k], labels[k]);
        if (m.loss <= 0.0) continue;
        margins.push_back(m.loss);
        grads.push_back(m.grad.lpNorm<Eigen::Infinity>());
    }
    if (margins.empty()) throw std::invalid_argument("calibrate_epsilon: no correctly classified points");
    EpsilonCalibration c{median(margins), median(grads), 0.0};
    c.eps = factor * c.median_margin / c.median_grad_inf;
    return c;
}

}  // namespace purify
