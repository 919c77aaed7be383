#include "purify/solver.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace purify {

std::string_view to_string(SolverMethod method) {
    return method == SolverMethod::Heun ? "Heun" : "EM";
}

SolverMethod parse_solver_method(std::string_view text) {
    if (text == "Heun" || text == "heun") return SolverMethod::Heun;
    if (text == "EM" || text == "em" || text == "EulerMaruyama" || text == "euler")
        return SolverMethod::EulerMaruyama;
    throw std::invalid_argument("unknown solver method '" + std::string(text) + "'");
}

void SolverConfig::validate() const {
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (!(t_min > 0.0)) throw std::invalid_argument("t_min must be positive");
    if (!(t_min < t_star)) throw std::invalid_argument("t_star must exceed t_min");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
}

DivergedError::DivergedError(std::size_t step)
    : std::runtime_error("solver diverged at step " + std::to_string(step)), step_(step) {}

Vec mixed_reverse_drift(const ScheduleParams& s, const ScoreFn& score_fn, const Vec& x, double t,
                        double lambda) {
    const double g = diffusion_coefficient(s, t);
    return drift_coefficient(s, x, t) - 0.5 * (1.0 + lambda * lambda) * g * g * score_fn(x, t);
}

Vec integrate_on_grid(const DriftFn& drift, const NoiseScaleFn& noise_scale, Vec x,
                      std::span<const double> times, SolverMethod method, Rng* rng,
                      bool euler_last_step) {
    const std::size_t steps = times.empty() ? 0 : times.size() - 1;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = times[i];
        const double h = times[i + 1] - t;
        if (noise_scale) {
            const double amp = noise_scale(t) * std::sqrt(std::abs(h));
            x += amp * standard_normal(*rng, x.size());
        }
        const Vec d0 = drift(x, t);
        Vec next = x + h * d0;
        const bool correct =
            method == SolverMethod::Heun && !(euler_last_step && i + 1 == steps);
        if (correct) next = x + 0.5 * h * (d0 + drift(next, times[i + 1]));
        if (!next.allFinite()) throw DivergedError(i);
        x = std::move(next);
    }
    return x;
}

Vec integrate_reverse(const ScheduleParams& s, const ScoreFn& score_fn, const Vec& x_start,
                      const SolverConfig& cfg, Rng& rng) {
    cfg.validate();
    const TimeGrid grid = time_grid(s, cfg.t_star, cfg.t_min, cfg.n_steps);
    const double lambda = cfg.lambda;
    DriftFn drift = [&](const Vec& x, double t) {
        return mixed_reverse_drift(s, score_fn, x, t, lambda);
    };
    NoiseScaleFn noise;
    if (lambda > 0.0) noise = [&](double t) { return lambda * diffusion_coefficient(s, t); };
    return integrate_on_grid(drift, noise, x_start, grid.times, cfg.method, &rng, true);
}

Vec integrate_forward_ode(const ScheduleParams& s, const ScoreFn& score_fn, const Vec& x0,
                          const SolverConfig& cfg) {
    SolverConfig ode = cfg;
    ode.lambda = 0.0;
    ode.validate();
    TimeGrid grid = time_grid(s, ode.t_star, ode.t_min, ode.n_steps);
    std::vector<double> ascending(grid.times.rbegin(), grid.times.rend());
    DriftFn drift = [&](const Vec& x, double t) {
        return mixed_reverse_drift(s, score_fn, x, t, 0.0);
    };
    return integrate_on_grid(drift, {}, x0, ascending, ode.method, nullptr, false);
}

int function_evaluations(SolverMethod method, int n_steps, bool euler_last_step) {
    if (method == SolverMethod::EulerMaruyama) return n_steps;
    return 2 * n_steps - (euler_last_step ? 1 : 0);
}

}  // namespace purify
