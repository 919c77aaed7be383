#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "purify/rng.hpp"

namespace purify {

enum class ScheduleKind { VP, VE, EDM };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view text);

// Forward diffusion dX = f(X,t) dt + g(t) dW.
//   VP:  f = -beta(t) x / 2, g = sqrt(beta(t)), beta(t) = beta1 + 2 beta2 t
//   VE:  f = 0, sigma(t) = sigma_min^(1-t/T) sigma_max^(t/T), g = sqrt(d sigma^2 / dt)
//   EDM: f = 0, sigma(t) = t, g = sqrt(2t)
struct ScheduleParams {
    ScheduleKind kind = ScheduleKind::VP;
    double beta1 = 0.1;
    double beta2 = 9.95;
    double sigma_min = 0.01;
    double sigma_max = 50.0;
    double rho = 7.0;
    double t_max = 1.0;

    static ScheduleParams vp(double beta1 = 0.1, double beta2 = 9.95, double t_max = 1.0);
    static ScheduleParams ve(double sigma_min = 0.01, double sigma_max = 50.0, double t_max = 1.0);
    // t_max defaults to sigma_max since sigma(t) = t.
    static ScheduleParams edm(double sigma_min = 0.002, double sigma_max = 80.0, double rho = 7.0);

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    bool operator==(const ScheduleParams&) const = default;
};

// Integrated beta for VP; alpha_t = exp(-integral).
double vp_beta(const ScheduleParams& s, double t);
double vp_alpha(const ScheduleParams& s, double t);

// Noise scale sigma(t) for VE/EDM.
double sigma_of(const ScheduleParams& s, double t);

Vec drift_coefficient(const ScheduleParams& s, const Vec& x, double t);
double diffusion_coefficient(const ScheduleParams& s, double t);

struct ConditionalMoments {
    // The conditional mean is scale * x0.
    double scale;
    double std;
};

ConditionalMoments conditional_scale_std(const ScheduleParams& s, double t);

struct Gaussian {
    Vec mean;
    double std;
};

Gaussian conditional_moments(const ScheduleParams& s, const Vec& x0, double t);

Vec sample_forward(const ScheduleParams& s, const Vec& x0, double t, Rng& rng);

// Reverse-time discretization: times[0] = t_star, times.back() = t_min,
// strictly decreasing, n_steps + 1 entries.
struct TimeGrid {
    std::vector<double> times;

    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
};

TimeGrid time_grid(const ScheduleParams& s, double t_star, double t_min, int n_steps);

// Smallest time reached by reverse integration.
double default_t_min(const ScheduleParams& s);

}  // namespace purify
