#include "purify/purifier.hpp"

#include <stdexcept>

namespace purify {

std::string_view to_string(ForwardMode mode) {
    return mode == ForwardMode::ProbabilityFlow ? "ProbabilityFlow" : "StochasticConditional";
}

ForwardMode parse_forward_mode(std::string_view text) {
    if (text == "ProbabilityFlow" || text == "ode") return ForwardMode::ProbabilityFlow;
    if (text == "StochasticConditional" || text == "sde") return ForwardMode::StochasticConditional;
    throw std::invalid_argument("unknown forward mode '" + std::string(text) + "'");
}

void PurifierConfig::validate() const {
    schedule.validate();
    if (!(t_min > 0.0)) throw std::invalid_argument("t_min must be positive");
    if (!(t_star >= t_min && t_star <= schedule.t_max))
        throw std::invalid_argument("t_star must lie in [t_min, t_max]");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
}

SolverConfig PurifierConfig::solver() const {
    return SolverConfig{method, n_steps, t_star, t_min, lambda};
}

Vec purify(const Vec& x, const PurifierConfig& cfg, const ScoreFn& score_fn, Rng& rng) {
    if (!x.allFinite()) throw std::invalid_argument("purify: input is not finite");
    if (cfg.is_identity()) return x;
    const SolverConfig solver = cfg.solver();
    Vec noised = cfg.forward_mode == ForwardMode::StochasticConditional
                     ? sample_forward(cfg.schedule, x, cfg.t_star, rng)
                     : integrate_forward_ode(cfg.schedule, score_fn, x, solver);
    return integrate_reverse(cfg.schedule, score_fn, noised, solver, rng);
}

Rng purification_stream(std::uint64_t global_seed, std::size_t index) {
    return make_stream(global_seed, {0x9017f1ULL, index});
}

BatchResult purify_batch(const std::vector<Vec>& points, const PurifierConfig& cfg,
                         const ScoreFn& score_fn, std::uint64_t global_seed) {
    BatchResult result;
    result.points.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Rng rng = purification_stream(global_seed, i);
        try {
            result.points.push_back(purify(points[i], cfg, score_fn, rng));
        } catch (const std::exception& e) {
            result.points.push_back(points[i]);
            result.failures.push_back({i, e.what()});
        }
    }
    return result;
}

}  // namespace purify
