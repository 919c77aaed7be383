#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "purify/classifier.hpp"
#include "purify/purifier.hpp"
#include "purify/rng.hpp"

namespace purify {

enum class AttackKind { PGD, SPSA, BpdaEot };
enum class Norm { Linf, L2 };

std::string_view to_string(AttackKind kind);
std::string_view to_string(Norm norm);
AttackKind parse_attack_kind(std::string_view text);
Norm parse_norm(std::string_view text);

struct AttackSpec {
    AttackKind kind = AttackKind::PGD;
    Norm norm = Norm::Linf;
    double eps = 0.5;
    double step_size = 0.05;
    int n_steps = 40;
    double spsa_delta = 0.01;
    int spsa_samples = 128;
    double spsa_lr = 0.05;
    int eot_samples = 15;
    std::uint64_t seed = 0;

    // eps = 0 is accepted and means "no perturbation".
    void validate() const;
};

// Euclidean projection onto the eps-ball of `norm`.
Vec project(const Vec& delta, Norm norm, double eps);

// Unit steepest-ascent direction: sign(g) for Linf, g / |g|_2 for L2.
Vec ascent_direction(const Vec& grad, Norm norm);

double perturbation_norm(const Vec& delta, Norm norm);

// Gray-box PGD on the raw classifier, starting from delta = 0.
Vec pgd_attack(const MlpClassifier& clf, const Vec& x, int label, const AttackSpec& spec);

using LossFn = std::function<double(const Vec&)>;

// Two-sided Rademacher SPSA gradient estimate averaged over n_samples.
Vec spsa_gradient(const LossFn& loss_fn, const Vec& x, double delta, int n_samples, Rng& rng);

// Black-box pipeline: returns logits for a query, drawing any internal
// randomness from the supplied stream.
using ModelFn = std::function<Vec(const Vec&, Rng&)>;

ModelFn raw_model(const MlpClassifier& clf);
ModelFn purified_model(const MlpClassifier& clf, const Purification& purifier);

Vec spsa_attack(const ModelFn& model_fn, const Vec& x, int label, const AttackSpec& spec,
                Rng& rng);

// EOT average of the classifier input gradient over K purifications of x.
// BPDA treats the purifier Jacobian as identity.
Vec bpda_eot_gradient(const MlpClassifier& clf, const Purification& purifier, const Vec& x,
                      int label, int eot_samples, Rng& rng);

Vec bpda_eot_attack(const MlpClassifier& clf, const Purification& purifier, const Vec& x,
                    int label, const AttackSpec& spec, Rng& rng);

struct EpsilonCalibration {
    double median_margin;
    double median_grad_inf;
    double eps;
};

// eps = factor * median logit margin / median |grad margin|_inf over the
// correctly classified points.
EpsilonCalibration calibrate_epsilon(const MlpClassifier& clf, const std::vector<Vec>& points,
                                     const std::vector<int>& labels, double factor = 0.5);

}  // namespace purify
