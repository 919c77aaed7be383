#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "purify/rng.hpp"
#include "purify/schedule.hpp"

namespace purify {

enum class SolverMethod { EulerMaruyama, Heun };

std::string_view to_string(SolverMethod method);
SolverMethod parse_solver_method(std::string_view text);

struct SolverConfig {
    SolverMethod method = SolverMethod::Heun;
    int n_steps = 100;
    double t_star = 0.3;
    double t_min = 1e-3;
    // Randomness strength: 0 gives the probability-flow ODE, 1 the reverse SDE.
    double lambda = 0.0;

    void validate() const;
};

using ScoreFn = std::function<Vec(const Vec&, double)>;
using DriftFn = std::function<Vec(const Vec&, double)>;
using NoiseScaleFn = std::function<double(double)>;

class DivergedError : public std::runtime_error {
public:
    explicit DivergedError(std::size_t step);
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// f(x,t) - (1 + lambda^2)/2 * g(t)^2 * score(x,t)
Vec mixed_reverse_drift(const ScheduleParams& s, const ScoreFn& score_fn, const Vec& x, double t,
                        double lambda);

// Integrates dx = drift dt + noise_scale(t) dW along `times` (either
// direction). Each step first injects noise_scale(t) sqrt|h| z, then takes a
// deterministic Euler or Heun step on the drift. No random numbers are drawn
// when noise_scale is empty. With euler_last_step the final step skips the
// Heun corrector.
Vec integrate_on_grid(const DriftFn& drift, const NoiseScaleFn& noise_scale, Vec x,
                      std::span<const double> times, SolverMethod method, Rng* rng,
                      bool euler_last_step);

// Mixed reverse process from cfg.t_star down to cfg.t_min.
Vec integrate_reverse(const ScheduleParams& s, const ScoreFn& score_fn, const Vec& x_start,
                      const SolverConfig& cfg, Rng& rng);

// Probability-flow ODE from cfg.t_min up to cfg.t_star; cfg.lambda is ignored.
Vec integrate_forward_ode(const ScheduleParams& s, const ScoreFn& score_fn, const Vec& x0,
                          const SolverConfig& cfg);

// Score evaluations consumed by one reverse pass.
int function_evaluations(SolverMethod method, int n_steps, bool euler_last_step = true);

}  // namespace purify
