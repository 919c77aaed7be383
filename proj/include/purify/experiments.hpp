#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "purify/attacks.hpp"
#include "purify/classifier.hpp"
#include "purify/config.hpp"
#include "purify/gmm.hpp"
#include "purify/theory.hpp"

namespace purify {

struct ResultRow {
    std::string experiment;
    std::string schedule;
    std::string attack;
    std::string norm;
    double eps = 0.0;
    double t_star = 0.0;
    double lambda = 0.0;
    std::string method;
    int n_steps = 0;
    double standard_accuracy = 0.0;
    double robust_accuracy = 0.0;
    double unpurified_robust_accuracy = 0.0;
    double wall_time_seconds = 0.0;
    std::uint64_t seed = 0;
};

// Fixed column order; wall_time_seconds is the only nondeterministic column.
inline constexpr const char* kResultHeader =
    "experiment,schedule,attack,norm,eps,t_star,lambda,method,n_steps,standard_accuracy,"
    "robust_accuracy,unpurified_robust_accuracy,wall_time_seconds,seed";

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

using Summary = std::vector<std::pair<std::string, std::string>>;

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    // Key/value facts for the manifest (calibrated eps, argmax, flags).
    Summary summary;
    // Soft-check failures; fatal only under --strict.
    std::vector<std::string> soft_failures;
    // Set by the theory report instead of rows.
    std::optional<OrderReport> order;
    std::string text_summary;
};

// Everything sweeps share: data, trained classifier, calibrated attack and
// the gray-box PGD adversarial set.
struct ExperimentContext {
    GmmModel gmm;
    LabeledDataset train_set;
    LabeledDataset eval_set;
    MlpClassifier classifier;
    bool classifier_from_cache = false;
    EpsilonCalibration calibration;
    AttackSpec attack;
    std::vector<Vec> pgd_adversarial;
    double clean_accuracy = 0.0;
    double unpurified_robust_accuracy = 0.0;
};

GmmModel make_data_gmm(const DataConfig& data);

// Trains the classifier or loads it from cfg.cache_dir (keyed by a hash of
// the data and training settings).
MlpClassifier obtain_classifier(const ExperimentConfig& cfg, const LabeledDataset& train_set,
                                bool* from_cache = nullptr);

std::string classifier_cache_key(const ExperimentConfig& cfg);

ExperimentContext prepare_context(const ExperimentConfig& cfg);

// Seed for purification noise in a sweep. It does not depend on the sweep
// parameter, so every sweep point sees the same noise per sample.
std::uint64_t purification_seed(const ExperimentConfig& cfg, std::uint64_t role, int repeat = 0);

ExperimentOutput run_lambda_sweep(const ExperimentConfig& cfg);
ExperimentOutput run_time_sweep(const ExperimentConfig& cfg);
ExperimentOutput run_solver_compare(const ExperimentConfig& cfg);
ExperimentOutput run_step_sweep(const ExperimentConfig& cfg);
ExperimentOutput run_attack_eval(const ExperimentConfig& cfg);
ExperimentOutput run_theory_report(const ExperimentConfig& cfg);

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// Purified standard/robust accuracy of the shared context under `pcfg`.
std::pair<double, double> purified_accuracies(const ExperimentContext& ctx,
                                              const ExperimentConfig& cfg,
                                              const PurifierConfig& pcfg, int repeat = 0);

// Writes CSV (rows or order report) to cfg.output_path, the effective config
// to <output>.config, the manifest to <output>.manifest and, for the theory
// report, the text summary to <output>.summary.txt.
void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out);

}  // namespace purify
