#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "purify/schedule.hpp"

namespace purify {

// Three-sigma overlap: |mu1 - mu2| <= 3 sigma1 + 3 sigma2 (boundary inclusive).
bool interaction_predicate(double mu1, double sigma1, double mu2, double sigma2);

// First time at which VP-diffused point masses at +h and -h overlap:
// positive root of beta2 t^2 + beta1 t = ln(1 + h^2 / 9).
double interaction_time_vp(double h, double beta1, double beta2);

// VE analogue: sigma(t) = h / 3, i.e. ln(h / (3 sigma_min)) / ln(sigma_max / sigma_min)
// for a unit horizon. Requires h > 3 sigma_min.
double interaction_time_ve(double h, double sigma_min, double sigma_max);

// Closed form dispatched on schedule kind (VP or VE), honoring t_max.
double interaction_time(const ScheduleParams& s, double h);

// Bisection on the overlap boundary, independent of the closed forms.
double interaction_time_bisect(const ScheduleParams& s, double h, double tol);

struct OrderRow {
    double h;
    double t_vp;
    // Empty when h <= 3 sigma_min (VE marginals overlap from the start).
    std::optional<double> t_ve;
    // Log-log slope between this row and the previous one.
    std::optional<double> slope_vp;
    std::optional<double> slope_ve;
};

struct OrderReport {
    std::vector<OrderRow> rows;
    // t_ve > t_vp at every grid point where t_ve is defined.
    bool ve_exceeds_vp = true;
};

OrderReport order_report(const std::vector<double>& h_grid, const ScheduleParams& vp,
                         const ScheduleParams& ve);

// Columns h,t_vp,t_ve,slope_vp,slope_ve; empty cells for missing slopes.
void write_order_csv(std::ostream& out, const OrderReport& report);

}  // namespace purify
