#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "purify/attacks.hpp"
#include "purify/classifier.hpp"
#include "purify/purifier.hpp"
#include "purify/schedule.hpp"

namespace purify {

enum class ExperimentKind {
    LambdaSweep,
    TimeSweep,
    SolverCompare,
    TheoryReport,
    AttackEval,
    StepInsensitivity
};

// CLI subcommand spelling, e.g. "lambda-sweep".
std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

struct DataConfig {
    std::uint64_t seed = 1;
    std::size_t n_train = 2000;
    // Component means at (+-offset, +-offset).
    double offset = 1.5;
    double variance = 0.09;

    bool operator==(const DataConfig&) const = default;
};

struct ClassifierConfig {
    std::vector<int> hidden = {16, 16};
    Activation activation = Activation::Tanh;
    TrainConfig train{0.003, 200, 128, 7};

    bool operator==(const ClassifierConfig& o) const {
        return hidden == o.hidden && activation == o.activation &&
               train.learning_rate == o.train.learning_rate && train.epochs == o.train.epochs &&
               train.batch_size == o.train.batch_size && train.seed == o.train.seed;
    }
};

// Attack settings; unset optionals are resolved from the calibrated eps.
struct AttackConfig {
    AttackKind kind = AttackKind::PGD;
    Norm norm = Norm::Linf;
    std::optional<double> eps;       // default: margin calibration
    double eps_factor = 0.5;
    std::optional<double> step_size; // default: eps / 10
    int n_steps = 40;
    double spsa_delta = 0.01;
    int spsa_samples = 128;
    std::optional<double> spsa_lr;   // default: eps / 10
    int eot_samples = 15;
    std::uint64_t seed = 0;

    bool operator==(const AttackConfig&) const = default;

    AttackSpec resolve(double calibrated_eps) const;
};

struct SweepConfig {
    std::vector<double> lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
    int t_star_points = 10;
    std::vector<SolverMethod> methods = {SolverMethod::EulerMaruyama, SolverMethod::Heun};
    std::vector<int> step_counts = {25, 50, 100};
    std::vector<int> total_steps = {25, 50, 100, 200};
    // Attack budgets as multiples of the resolved eps.
    std::vector<double> eps_scales = {0.0, 0.25, 0.5, 1.0, 2.0};
    std::vector<double> h_grid = {0.001, 0.002, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0};
    int n_seeds = 5;
    std::size_t adaptive_subset = 512;

    bool operator==(const SweepConfig&) const = default;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::LambdaSweep;
    std::uint64_t global_seed = 0;
    std::size_t n_eval = 2000;
    std::string output_path = "results.csv";
    // Where trained classifiers are cached; empty means beside output_path.
    std::string cache_dir;

    PurifierConfig purifier;  // owns the schedule
    AttackConfig attack;
    ClassifierConfig classifier;
    DataConfig data;
    SweepConfig sweep;

    void validate() const;
    bool operator==(const ExperimentConfig&) const;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& message);
    // 0 when the error is not tied to a line (validation).
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ParsedConfig {
    ExperimentConfig config;
    // Unknown keys seen in non-strict mode.
    std::vector<std::string> warnings;
};

// Grammar: "[section]" headers, "key = value" lines, '#' starts a comment.
// Lists are comma separated. Unknown keys are errors in strict mode.
ParsedConfig parse_config(std::string_view text, bool strict = true);
ParsedConfig load_config(const std::string& path, bool strict = true);

// Effective config with every default spelled out; reparses to an equal config.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace purify
