#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "purify/rng.hpp"
#include "purify/schedule.hpp"
#include "purify/solver.hpp"

namespace purify {

enum class ForwardMode { StochasticConditional, ProbabilityFlow };

std::string_view to_string(ForwardMode mode);
ForwardMode parse_forward_mode(std::string_view text);

struct PurifierConfig {
    ScheduleParams schedule = ScheduleParams::vp();
    double t_star = 0.18;
    double t_min = 1e-3;
    int n_steps = 100;
    SolverMethod method = SolverMethod::Heun;
    double lambda = 0.75;
    ForwardMode forward_mode = ForwardMode::StochasticConditional;

    void validate() const;
    SolverConfig solver() const;
    // t_star at (or below) t_min: nothing to diffuse, purify returns its input.
    bool is_identity() const { return t_star <= t_min; }
};

// Forward-diffuse x to t_star, then run the mixed reverse process to t_min.
Vec purify(const Vec& x, const PurifierConfig& cfg, const ScoreFn& score_fn, Rng& rng);

struct BatchFailure {
    std::size_t index;
    std::string message;
};

struct BatchResult {
    // Failed entries keep their input value.
    std::vector<Vec> points;
    std::vector<BatchFailure> failures;
};

// Element i is purified with the stream derived from (global_seed, i).
BatchResult purify_batch(const std::vector<Vec>& points, const PurifierConfig& cfg,
                         const ScoreFn& score_fn, std::uint64_t global_seed);

// Per-sample stream used by purify_batch.
Rng purification_stream(std::uint64_t global_seed, std::size_t index);

}  // namespace purify
