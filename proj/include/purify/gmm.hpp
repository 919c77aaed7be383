#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "purify/rng.hpp"
#include "purify/schedule.hpp"
#include "purify/solver.hpp"

namespace purify {

// Isotropic Gaussian mixture. Serves both as the data distribution and,
// through diffused_mixture/score, as the exact score oracle s(x, t).
struct GmmModel {
    std::vector<double> weights;
    std::vector<Vec> means;
    std::vector<double> variances;
    std::optional<std::vector<int>> labels;

    std::size_t components() const { return weights.size(); }
    Eigen::Index dim() const { return means.empty() ? 0 : means.front().size(); }
    int num_classes() const;

    // Throws std::invalid_argument on broken invariants.
    void validate() const;
};

// Four components at (+-1.5, +-1.5), variance 0.09, XOR class labels.
GmmModel benchmark_gmm();

// Marginal of the data mixture after forward diffusion to time t.
GmmModel diffused_mixture(const GmmModel& gmm, const ScheduleParams& s, double t);

double log_density(const GmmModel& gmm, const Vec& x);

// Posterior component probabilities, via log-sum-exp.
Vec responsibilities(const GmmModel& gmm, const Vec& x);

// Gradient of log density of the mixture itself.
Vec mixture_score(const GmmModel& gmm, const Vec& x);

// Exact time-dependent score grad_x log p_t(x).
Vec score(const GmmModel& gmm, const ScheduleParams& s, const Vec& x, double t);

// score() bound to a fixed mixture and schedule; avoids rebuilding the
// diffused mixture on every call.
ScoreFn make_score_fn(const GmmModel& gmm, const ScheduleParams& s);

struct LabeledDataset {
    std::vector<Vec> points;
    std::vector<int> labels;
    std::uint64_t seed = 0;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

LabeledDataset sample_dataset(const GmmModel& gmm, std::size_t n, std::uint64_t seed);

// CSV: one row per point, coordinates then integer label, no header.
void write_dataset_csv(std::ostream& out, const LabeledDataset& data);
LabeledDataset read_dataset_csv(std::istream& in);

}  // namespace purify
