#include "purify/theory.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace purify {

bool interaction_predicate(double mu1, double sigma1, double mu2, double sigma2) {
    if (sigma1 < 0.0 || sigma2 < 0.0) throw std::invalid_argument("sigma must be nonnegative");
    return std::abs(mu1 - mu2) <= 3.0 * sigma1 + 3.0 * sigma2;
}

double interaction_time_vp(double h, double beta1, double beta2) {
    if (!(h > 0.0)) throw std::domain_error("h must be positive");
    if (!(beta1 > 0.0 || beta2 > 0.0)) throw std::domain_error("beta1 or beta2 must be positive");
    const double target = std::log1p(h * h / 9.0);
    if (beta2 == 0.0) return target / beta1;
    // Rationalized root of beta2 t^2 + beta1 t - target = 0; avoids the
    // cancellation in (-b + sqrt(b^2 + 4ac)) when target is tiny.
    return 2.0 * target / (beta1 + std::sqrt(beta1 * beta1 + 4.0 * beta2 * target));
}

double interaction_time_ve(double h, double sigma_min, double sigma_max) {
    if (!(h > 3.0 * sigma_min))
        throw std::domain_error("h must exceed 3 sigma_min; the marginals already overlap at t = 0");
    return std::log((h / 3.0) / sigma_min) / std::log(sigma_max / sigma_min);
}

double interaction_time(const ScheduleParams& s, double h) {
    switch (s.kind) {
    case ScheduleKind::VP: return interaction_time_vp(h, s.beta1, s.beta2);
    case ScheduleKind::VE: return s.t_max * interaction_time_ve(h, s.sigma_min, s.sigma_max);
    case ScheduleKind::EDM: break;
    }
    throw std::invalid_argument("interaction time is defined for VP and VE only");
}

double interaction_time_bisect(const ScheduleParams& s, double h, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (!(h > 0.0)) throw std::domain_error("h must be positive");
    // gap(t) > 0 while the two marginals are still separated.
    auto gap = [&](double t) {
        const auto m = conditional_scale_std(s, t);
        return 2.0 * m.scale * h - 6.0 * m.std;
    };
    if (s.kind == ScheduleKind::EDM) throw std::invalid_argument("interaction time is defined for VP and VE only");
    double lo = 0.0, hi = s.t_max;
    if (!(gap(lo) > 0.0) || !(gap(hi) <= 0.0))
        throw std::domain_error("no interaction time in (0, t_max]");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

OrderReport order_report(const std::vector<double>& h_grid, const ScheduleParams& vp,
                         const ScheduleParams& ve) {
    if (h_grid.empty()) throw std::invalid_argument("h_grid must not be empty");
    OrderReport report;
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        const double h = h_grid[i];
        if (i > 0 && !(h > h_grid[i - 1])) throw std::invalid_argument("h_grid must be ascending");
        OrderRow row{h, interaction_time(vp, h), std::nullopt, std::nullopt, std::nullopt};
        if (h > 3.0 * ve.sigma_min) row.t_ve = interaction_time(ve, h);
        if (i > 0) {
            const auto& prev = report.rows.back();
            const double dlogh = std::log(h / prev.h);
            row.slope_vp = std::log(row.t_vp / prev.t_vp) / dlogh;
            if (row.t_ve && prev.t_ve && *prev.t_ve > 0.0)
                row.slope_ve = std::log(*row.t_ve / *prev.t_ve) / dlogh;
        }
        if (row.t_ve && !(*row.t_ve > row.t_vp)) report.ve_exceeds_vp = false;
        report.rows.push_back(row);
    }
    return report;
}

void write_order_csv(std::ostream& out, const OrderReport& report) {
    out << "h,t_vp,t_ve,slope_vp,slope_ve\n" << std::setprecision(12);
    for (const auto& r : report.rows) {
        out << r.h << ',' << r.t_vp << ',';
        if (r.t_ve) out << *r.t_ve;
        out << ',';
        if (r.slope_vp) out << *r.slope_vp;
        out << ',';
        if (r.slope_ve) out << *r.slope_ve;
        out << '\n';
    }
}

}  // namespace purify
