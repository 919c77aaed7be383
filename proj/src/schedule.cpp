#include "purify/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace purify {

namespace {

void check_time(const ScheduleParams& s, double t) {
    // Allow roundoff at the endpoints of grids built from t_max.
    const double slack = 1e-12 * s.t_max;
    if (!(t >= -slack && t <= s.t_max + slack))
        throw std::domain_error("time " + std::to_string(t) + " outside [0, " +
                                std::to_string(s.t_max) + "]");
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
    switch (kind) {
    case ScheduleKind::VP: return "VP";
    case ScheduleKind::VE: return "VE";
    case ScheduleKind::EDM: return "EDM";
    }
    return "?";
}

ScheduleKind parse_schedule_kind(std::string_view text) {
    if (text == "VP" || text == "vp") return ScheduleKind::VP;
    if (text == "VE" || text == "ve") return ScheduleKind::VE;
    if (text == "EDM" || text == "edm") return ScheduleKind::EDM;
    throw std::invalid_argument("unknown schedule kind '" + std::string(text) + "'");
}

ScheduleParams ScheduleParams::vp(double beta1, double beta2, double t_max) {
    ScheduleParams s;
    s.kind = ScheduleKind::VP;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.t_max = t_max;
    return s;
}

ScheduleParams ScheduleParams::ve(double sigma_min, double sigma_max, double t_max) {
    ScheduleParams s;
    s.kind = ScheduleKind::VE;
    s.sigma_min = sigma_min;
    s.sigma_max = sigma_max;
    s.t_max = t_max;
    return s;
}

ScheduleParams ScheduleParams::edm(double sigma_min, double sigma_max, double rho) {
    ScheduleParams s;
    s.kind = ScheduleKind::EDM;
    s.sigma_min = sigma_min;
    s.sigma_max = sigma_max;
    s.rho = rho;
    s.t_max = sigma_max;
    return s;
}

void ScheduleParams::validate() const {
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
    if (!(rho >= 1.0)) throw std::invalid_argument("rho must be >= 1");
    if (kind == ScheduleKind::VP) {
        if (!(beta1 >= 0.0)) throw std::invalid_argument("beta1 must be nonnegative");
        if (!(beta2 >= 0.0)) throw std::invalid_argument("beta2 must be nonnegative");
        // beta is linear in t, so positivity at both ends suffices.
        if (!(beta1 > 0.0) || !(beta1 + 2.0 * beta2 * t_max > 0.0))
            throw std::invalid_argument("beta1: beta(t) must be positive on [0, t_max]");
    } else {
        if (!(sigma_min > 0.0)) throw std::invalid_argument("sigma_min must be positive");
        if (!(sigma_max > sigma_min))
            throw std::invalid_argument("sigma_max must exceed sigma_min");
    }
}

double vp_beta(const ScheduleParams& s, double t) { return s.beta1 + 2.0 * s.beta2 * t; }

double vp_alpha(const ScheduleParams& s, double t) {
    return std::exp(-s.beta2 * t * t - s.beta1 * t);
}

double sigma_of(const ScheduleParams& s, double t) {
    switch (s.kind) {
    case ScheduleKind::VE: {
        const double u = t / s.t_max;
        return std::pow(s.sigma_min, 1.0 - u) * std::pow(s.sigma_max, u);
    }
    case ScheduleKind::EDM: return t;
    case ScheduleKind::VP: break;
    }
    throw std::logic_error("sigma_of is undefined for VP");
}

Vec drift_coefficient(const ScheduleParams& s, const Vec& x, double t) {
    check_time(s, t);
    if (s.kind == ScheduleKind::VP) return -0.5 * vp_beta(s, t) * x;
    return Vec::Zero(x.size());
}

double diffusion_coefficient(const ScheduleParams& s, double t) {
    check_time(s, t);
    switch (s.kind) {
    case ScheduleKind::VP: return std::sqrt(vp_beta(s, t));
    case ScheduleKind::VE:
        return sigma_of(s, t) * std::sqrt(2.0 * std::log(s.sigma_max / s.sigma_min) / s.t_max);
    case ScheduleKind::EDM: return std::sqrt(2.0 * std::max(t, 0.0));
    }
    return 0.0;
}

ConditionalMoments conditional_scale_std(const ScheduleParams& s, double t) {
    check_time(s, t);
    if (s.kind == ScheduleKind::VP) {
        const double a = vp_alpha(s, t);
        // -expm1 keeps precision for small t where 1 - a cancels.
        return {std::sqrt(a), std::sqrt(-std::expm1(-s.beta2 * t * t - s.beta1 * t))};
    }
    return {1.0, sigma_of(s, std::max(t, 0.0))};
}

Gaussian conditional_moments(const ScheduleParams& s, const Vec& x0, double t) {
    const auto m = conditional_scale_std(s, t);
    return {m.scale * x0, m.std};
}

Vec sample_forward(const ScheduleParams& s, const Vec& x0, double t, Rng& rng) {
    const auto m = conditional_scale_std(s, t);
    Vec z = standard_normal(rng, x0.size());
    return m.scale * x0 + m.std * z;
}

TimeGrid time_grid(const ScheduleParams& s, double t_star, double t_min, int n_steps) {
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (!(t_min > 0.0)) throw std::invalid_argument("t_min must be positive");
    if (!(t_min < t_star)) throw std::invalid_argument("t_min must be below t_star");
    check_time(s, t_star);

    TimeGrid grid;
    grid.times.resize(static_cast<std::size_t>(n_steps) + 1);
    const double n = n_steps;
    if (s.kind == ScheduleKind::EDM) {
        const double inv_rho = 1.0 / s.rho;
        const double hi = std::pow(t_star, inv_rho);
        const double lo = std::pow(t_min, inv_rho);
        for (int i = 0; i <= n_steps; ++i)
            grid.times[i] = std::pow(hi + (i / n) * (lo - hi), s.rho);
    } else {
        for (int i = 0; i <= n_steps; ++i) grid.times[i] = t_star + (i / n) * (t_min - t_star);
    }
    grid.times.front() = t_star;
    grid.times.back() = t_min;
    return grid;
}

double default_t_min(const ScheduleParams&) { return 1e-3; }

}  // namespace purify
