// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "purify/attacks.hpp"
#include "purify/classifier.hpp"
#include "purify/experiments.hpp"
#include "purify/gmm.hpp"
#include "purify/purifier.hpp"
#include "purify/solver.hpp"
#include "purify/theory.hpp"

using namespace purify;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::map<std::string, double> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path);
    std::map<std::string, double> values;
    std::string line, section;
    while (std::getline(in, line)) {
        line = line.substr(0, line.find('#'));
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line[0] == '[') {
            section = line.substr(1, line.find(']') - 1);
            continue;
        }
        const auto eq = line.find('=');
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        values[section + "." + key] = std::stod(line.substr(eq + 1));
    }
    return values;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

double rel_err(const Vec& a, const Vec& b) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

struct Suite {
    std::map<std::string, double> manifest;
    fs::path scratch;

    ExperimentConfig base_config() const {
        ExperimentConfig cfg;
        cfg.purifier.t_star = manifest.at("frozen.t_star");
        cfg.purifier.lambda = manifest.at("frozen.lambda");
        cfg.cache_dir = (scratch / "cache").string();
        cfg.output_path = (scratch / "results.csv").string();
        return cfg;
    }

    const ExperimentContext& context() {
        static const ExperimentContext ctx = prepare_context(base_config());
        return ctx;
    }
};

// 1. Marginal preservation of the mixed reverse process on Gaussian data.
Outcome marginal_preservation(Suite&) {
    Outcome o;
    GmmModel g;
    g.weights = {1.0};
    g.means = {Vec::Zero(1)};
    g.variances = {1.0};
    const auto vp = ScheduleParams::vp();
    const ScoreFn score = make_score_fn(g, vp);
    const SolverConfig base{SolverMethod::Heun, 100, 0.3, 1e-3, 0.0};
    const int n = 50000;
    o.detail << std::setprecision(4);
    for (double lambda : {0.0, 0.5, 0.75, 1.0}) {
        const auto start = Clock::now();
        SolverConfig cfg = base;
        cfg.lambda = lambda;
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            Rng rng = make_stream(0x1a3b, {static_cast<std::uint64_t>(lambda * 100), static_cast<std::uint64_t>(i)});
            const Vec x0 = standard_normal(rng, 1);
            const Vec xt = sample_forward(vp, x0, cfg.t_star, rng);
            const double y = integrate_reverse(vp, score, xt, cfg, rng)[0];
            sum += y;
            sq += y * y;
        }
        const double mean = sum / n, var = sq / n - mean * mean;
        const double se = std::sqrt(var / n), secs = seconds_since(start);
        o.detail << " lambda=" << lambda << ": mean=" << mean << " (" << std::abs(mean) / se << " SE) var=" << var
                 << " " << secs << "s;";
        o.require(std::abs(mean) <= 4.0 * se, "mean within 4 SE");
        o.require(std::abs(var - 1.0) <= 0.03, "variance within 3%");
        o.require(secs < 60.0, "runtime < 60 s");
    }
    return o;
}

long double vp_oracle(long double h, long double b1, long double b2) {
    long double lo = 0.0L, hi = 1.0L;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi), a = std::exp(-b2 * mid * mid - b1 * mid);
        (std::sqrt(a) * h - 3.0L * std::sqrt(1.0L - a) > 0.0L ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

long double ve_oracle(long double h, long double smin, long double smax) {
    long double lo = 0.0L, hi = 1.0L;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        (h - 3.0L * std::pow(smin, 1.0L - mid) * std::pow(smax, mid) > 0.0L ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

// 2. Interaction-time closed forms, VP second order, VE above VP.
Outcome interaction_times(Suite&) {
    Outcome o;
    const auto start = Clock::now();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double vp_worst = 0.0, ve_worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        ScheduleParams vp = ScheduleParams::vp();
        vp.beta1 = 0.05 + 0.95 * u(rng);
        vp.beta2 = 1.0 + 19.0 * u(rng);
        const double h = 0.01 + 1.99 * u(rng), t = interaction_time(vp, h);
        vp_worst = std::max({vp_worst, std::abs(t - interaction_time_bisect(vp, h, 1e-13)),
                             std::abs(t - static_cast<double>(vp_oracle(h, vp.beta1, vp.beta2)))});

        ScheduleParams ve = ScheduleParams::ve();
        ve.sigma_min = 0.001 + 0.049 * u(rng);
        ve.sigma_max = 10.0 + 90.0 * u(rng);
        const double hv = 3.0 * ve.sigma_min * std::pow(ve.sigma_max / ve.sigma_min, 0.02 + 0.96 * u(rng));
        const double tv = interaction_time(ve, hv);
        ve_worst = std::max({ve_worst, std::abs(tv - interaction_time_bisect(ve, hv, 1e-13)),
                             std::abs(tv - static_cast<double>(ve_oracle(hv, ve.sigma_min, ve.sigma_max)))});
    }
    o.require(vp_worst < 1e-8, "VP closed form vs bisection < 1e-8");
    o.require(ve_worst < 1e-10, "VE closed form vs bisection < 1e-10");

    const auto vp = ScheduleParams::vp(), ve = ScheduleParams::ve();
    std::vector<double> small, log_h, log_t;
    for (int i = 0; i <= 10; ++i) small.push_back(1e-3 * std::pow(10.0, i / 10.0));
    double lo = 1e9, hi = -1e9;
    for (const auto& r : order_report(small, vp, ve).rows) {
        log_h.push_back(std::log(r.h));
        log_t.push_back(std::log(r.t_vp));
        if (r.slope_vp) lo = std::min(lo, *r.slope_vp), hi = std::max(hi, *r.slope_vp);
    }
    const double fit = slope(log_h, log_t);
    o.require(std::abs(fit - 2.0) <= 0.02 && lo >= 1.98 && hi <= 2.02, "VP slope 2.00 +- 0.02");

    std::vector<double> large;
    for (int i = 0; i <= 20; ++i) large.push_back(0.05 * std::pow(20.0, i / 20.0));
    const auto report = order_report(large, vp, ve);
    bool all_defined = true;
    for (const auto& r : report.rows) all_defined = all_defined && r.t_ve.has_value();
    o.require(report.ve_exceeds_vp && all_defined, "VE > VP on [0.05, 1]");

    const double secs = seconds_since(start);
    o.require(secs < 1.0, "runtime < 1 s");
    o.detail << std::setprecision(3) << " max|VP-oracle|=" << vp_worst << " max|VE-oracle|=" << ve_worst
             << " VP slope fit=" << std::setprecision(6) << fit << " local [" << lo << ", " << hi
             << "] VE>VP=" << (report.ve_exceeds_vp ? "yes" : "no") << " " << std::setprecision(3) << secs << "s";
    return o;
}

// 3. Convergence order on dx = -x over [0, 1].
Outcome solver_order(Suite&) {
    Outcome o;
    const auto start = Clock::now();
    const DriftFn drift = [](const Vec& x, double) -> Vec { return -x; };
    auto order = [&](SolverMethod m, bool euler_last) {
        std::vector<double> lx, ly;
        for (int n : {25, 50, 100, 200}) {
            std::vector<double> times(n + 1);
            for (int i = 0; i <= n; ++i) times[i] = static_cast<double>(i) / n;
            const Vec out = integrate_on_grid(drift, {}, Vec{{1.0}}, times, m, nullptr, euler_last);
            lx.push_back(std::log(1.0 / n));
            ly.push_back(std::log(std::abs(out[0] - std::exp(-1.0))));
        }
        return slope(lx, ly);
    };
    const double em = order(SolverMethod::EulerMaruyama, false);
    const double heun = order(SolverMethod::Heun, false);
    const double heun_fallback = order(SolverMethod::Heun, true);
    o.require(std::abs(em - 1.0) <= 0.15, "EM slope 1.0 +- 0.15");
    o.require(std::abs(heun - 2.0) <= 0.2, "Heun slope 2.0 +- 0.2");
    o.require(std::abs(heun_fallback - 2.0) <= 0.2, "Heun (Euler last step) slope 2.0 +- 0.2");
    const double secs = seconds_since(start);
    o.require(secs < 5.0, "runtime < 5 s");
    o.detail << std::setprecision(5) << " EM=" << em << " Heun=" << heun << " Heun(Euler last step)=" << heun_fallback
             << " " << std::setprecision(3) << secs << "s";
    return o;
}

// 4. Robust accuracy barely depends on solver or step count.
Outcome solver_insensitivity(Suite& s) {
    Outcome o;
    const auto start = Clock::now();
    ExperimentConfig cfg = s.base_config();
    cfg.experiment = ExperimentKind::SolverCompare;
    cfg.sweep.methods = {SolverMethod::EulerMaruyama, SolverMethod::Heun};
    cfg.sweep.step_counts = {25, 50, 100};
    const auto out = run_solver_compare(cfg);
    const double limit = s.manifest.at("thresholds.solver_gap_max");
    std::map<std::pair<std::string, int>, double> robust;
    for (const auto& r : out.rows) robust[{r.method, r.n_steps}] = r.robust_accuracy;
    o.detail << std::setprecision(4);
    double worst = 0.0;
    for (int n : cfg.sweep.step_counts) {
        const double em = robust.at({"EM", n}), heun = robust.at({"Heun", n});
        o.detail << " n=" << n << ": EM=" << em << " Heun=" << heun << ";";
        worst = std::max(worst, std::abs(em - heun));
    }
    const double steps_gap = std::abs(robust.at({"Heun", 25}) - robust.at({"Heun", 100}));
    o.require(worst < limit, "|EM - Heun| < 2 points");
    o.require(steps_gap < limit, "Heun 25 vs 100 steps < 2 points");
    const double secs = seconds_since(start);
    o.require(secs < 600.0, "runtime < 10 min");
    o.detail << " max gap=" << worst << " Heun 25 vs 100=" << steps_gap << " " << std::setprecision(3) << secs << "s";
    return o;
}

// 5. Probability-flow forward then lambda = 0 reverse restores the input.
Outcome round_trip(Suite& s) {
    Outcome o;
    const auto start = Clock::now();
    const auto gmm = benchmark_gmm();
    const auto data = sample_dataset(gmm, 100, 505);
    double worst_all = 0.0;
    for (double t_star : {s.manifest.at("frozen.t_star"), 0.3, 1.0}) {
        PurifierConfig p;
        p.t_star = t_star;
        p.lambda = 0.0;
        p.n_steps = 200;
        p.method = SolverMethod::Heun;
        p.forward_mode = ForwardMode::ProbabilityFlow;
        const ScoreFn score = make_score_fn(gmm, p.schedule);
        double worst = 0.0;
        Rng unused(0);
        for (const auto& x : data.points)
            worst = std::max(worst, (purify::purify(x, p, score, unused) - x).lpNorm<Eigen::Infinity>());
        o.detail << std::setprecision(3) << " t*=" << t_star << ": max err=" << worst << ";";
        worst_all = std::max(worst_all, worst);
    }
    o.require(worst_all < 1e-2, "max Linf error < 1e-2");
    const double secs = seconds_since(start);
    o.require(secs < 30.0, "runtime < 30 s");
    o.detail << " " << secs << "s";
    return o;
}

// 6. Purification restores robustness at the calibrated budget.
Outcome defense_effect(Suite& s) {
    Outcome o;
    const auto start = Clock::now();
    const ExperimentConfig cfg = s.base_config();
    const auto& ctx = s.context();
    double standard = 0.0, robust = 0.0;
    const int repeats = cfg.sweep.n_seeds;
    for (int k = 0; k < repeats; ++k) {
        const auto [st, rb] = purified_accuracies(ctx, cfg, cfg.purifier, k);
        standard += st;
        robust += rb;
    }
    standard /= repeats;
    robust /= repeats;
    const double secs = seconds_since(start);
    o.require(ctx.unpurified_robust_accuracy < s.manifest.at("thresholds.unpurified_robust_max"),
              "unpurified robust < 0.30");
    o.require(robust - ctx.unpurified_robust_accuracy >= s.manifest.at("thresholds.defense_gap_min"),
              "purified robust exceeds unpurified by >= 20 points");
    o.require(ctx.clean_accuracy - standard <= s.manifest.at("thresholds.standard_drop_max"),
              "purified standard within 5 points of clean");
    o.require(secs < 600.0, "runtime < 10 min");
    o.detail << std::setprecision(5) << " eps=" << ctx.attack.eps << " clean=" << ctx.clean_accuracy
             << " unpurified robust=" << ctx.unpurified_robust_accuracy << " purified standard=" << standard
             << " purified robust=" << robust << " (mean of " << repeats << " purification seeds, t*="
             << cfg.purifier.t_star << ", lambda=" << cfg.purifier.lambda << ") " << std::setprecision(3) << secs
             << "s";
    return o;
}

// 7. Lambda sweep shape and bit-exact reruns.
Outcome lambda_sweep(Suite& s) {
    Outcome o;
    ExperimentConfig cfg = s.base_config();
    cfg.experiment = ExperimentKind::LambdaSweep;
    const auto a = run_lambda_sweep(cfg);
    const auto b = run_lambda_sweep(cfg);
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    bool grid_ok = a.rows.size() == grid.size();
    bool identical = a.rows.size() == b.rows.size();
    for (std::size_t i = 0; grid_ok && i < grid.size(); ++i) grid_ok = a.rows[i].lambda == grid[i];
    for (std::size_t i = 0; identical && i < a.rows.size(); ++i)
        identical = a.rows[i].standard_accuracy == b.rows[i].standard_accuracy &&
                    a.rows[i].robust_accuracy == b.rows[i].robust_accuracy &&
                    a.rows[i].unpurified_robust_accuracy == b.rows[i].unpurified_robust_accuracy;
    std::string interior = "<missing>", best = "<missing>";
    for (const auto& [k, v] : a.summary) {
        if (k == "interior_lambda_optimal") interior = v;
        if (k == "best_lambda") best = v;
    }
    o.require(grid_ok, "five rows on the grid {0, .25, .5, .75, 1}");
    o.require(interior == "yes" || interior == "no", "interior-optimum flag reported");
    o.require(identical, "rerun reproduces every accuracy bit-exactly");
    o.detail << std::setprecision(4);
    for (const auto& r : a.rows) o.detail << " lambda=" << r.lambda << ": " << r.standard_accuracy << "/" << r.robust_accuracy << ";";
    o.detail << " best lambda=" << best << " interior optimum=" << interior << " rerun identical=" << (identical ? "yes" : "no");
    return o;
}

// 8. Budget feasibility, SPSA exactness, EOT variance, BPDA/PGD equivalence.
Outcome attack_correctness(Suite& s) {
    Outcome o;
    const ExperimentConfig cfg = s.base_config();
    const auto& ctx = s.context();
    const auto& clf = ctx.classifier;
    const auto& data = ctx.eval_set;
    const Purification purifier{cfg.purifier, make_score_fn(ctx.gmm, cfg.purifier.schedule)};
    Purification identity = purifier;
    identity.config.t_star = identity.config.t_min;

    double worst_excess = -1e300;
    std::size_t checked = 0;
    auto feasible = [&](const Vec& adv, const Vec& x, const AttackSpec& spec) {
        worst_excess = std::max(worst_excess, perturbation_norm(adv - x, spec.norm) - spec.eps);
        ++checked;
    };
    for (Norm norm : {Norm::Linf, Norm::L2}) {
        AttackSpec spec = ctx.attack;
        spec.norm = norm;
        for (std::size_t i = 0; i < data.size(); ++i)
            feasible(pgd_attack(clf, data.points[i], data.labels[i], spec), data.points[i], spec);
        spec.kind = AttackKind::SPSA;
        for (std::size_t i = 0; i < 100; ++i) {
            Rng rng = make_stream(81, {static_cast<std::uint64_t>(norm), i});
            feasible(spsa_attack(raw_model(clf), data.points[i], data.labels[i], spec, rng), data.points[i], spec);
        }
        for (std::size_t i = 0; i < 8; ++i) {
            Rng rng = make_stream(82, {static_cast<std::uint64_t>(norm), i});
            feasible(spsa_attack(purified_model(clf, purifier), data.points[i], data.labels[i], spec, rng),
                     data.points[i], spec);
        }
        spec.kind = AttackKind::BpdaEot;
        for (std::size_t i = 0; i < 32; ++i) {
            Rng rng = make_stream(83, {static_cast<std::uint64_t>(norm), i});
            feasible(bpda_eot_attack(clf, purifier, data.points[i], data.labels[i], spec, rng), data.points[i], spec);
        }
    }
    o.require(worst_excess <= 1e-9, "every adversarial point inside its eps-ball (+1e-9)");

    // SPSA on a linear loss: unbiased per coordinate.
    const Vec a{{0.7, -1.3}};
    const LossFn linear = [&](const Vec& v) { return a.dot(v); };
    Rng srng(91);
    const int n = 10000;
    Vec sum = Vec::Zero(2), sq = Vec::Zero(2);
    for (int k = 0; k < n; ++k) {
        const Vec g = spsa_gradient(linear, Vec{{0.3, -0.2}}, 0.05, 1, srng);
        sum += g;
        sq += g.cwiseProduct(g);
    }
    const Vec mean = sum / n, var = sq / n - mean.cwiseProduct(mean);
    double worst_z = 0.0;
    for (int j = 0; j < 2; ++j)
        worst_z = std::max(worst_z, std::abs(mean[j] - a[j]) / std::max(std::sqrt(var[j] / n), 1e-300));
    o.require(worst_z <= 4.0, "SPSA linear-loss mean within 4 SE");

    // EOT variance against K.
    std::vector<double> log_k, log_var;
    const Vec probe = data.points[0];
    for (int k : {1, 2, 4, 8, 16}) {
        Rng rng = make_stream(92, {static_cast<std::uint64_t>(k)});
        const int repeats = 400;
        Vec gsum = Vec::Zero(2);
        double gsq = 0.0;
        for (int r = 0; r < repeats; ++r) {
            const Vec g = bpda_eot_gradient(clf, purifier, probe, data.labels[0], k, rng);
            gsum += g;
            gsq += g.squaredNorm();
        }
        const Vec gm = gsum / repeats;
        log_k.push_back(std::log(k));
        log_var.push_back(std::log(gsq / repeats - gm.squaredNorm()));
    }
    const double var_slope = slope(log_k, log_var);
    o.require(std::abs(var_slope + 1.0) <= 0.2, "EOT variance slope -1 +- 0.2");

    // BPDA+EOT through the identity purifier with K = 1 is PGD.
    AttackSpec bspec = ctx.attack;
    bspec.kind = AttackKind::BpdaEot;
    bspec.eot_samples = 1;
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        Rng rng = make_stream(93, {i});
        if (bpda_eot_attack(clf, identity, data.points[i], data.labels[i], bspec, rng) !=
            pgd_attack(clf, data.points[i], data.labels[i], ctx.attack))
            ++mismatches;
    }
    o.require(mismatches == 0, "identity BPDA (K=1) equals PGD bit-exactly");

    o.detail << std::setprecision(4) << " " << checked << " adversarial points, max(norm - eps)=" << worst_excess
             << "; SPSA linear max |z|=" << worst_z << "; EOT log-variance slope=" << var_slope
             << "; identity BPDA vs PGD mismatches=" << mismatches << "/200";
    return o;
}

// 9. Manual gradients against finite differences.
Outcome gradient_integrity(Suite& s) {
    Outcome o;
    const auto& clf = s.context().classifier;
    Rng rng(95);
    double clf_worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Vec x = 2.0 * standard_normal(rng, 2);
        const int y = static_cast<int>(rng() % 2);
        const double h = 1e-5;
        Vec fd(2);
        for (int j = 0; j < 2; ++j) {
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            fd[j] = (loss_and_input_gradient(clf, xp, y).loss - loss_and_input_gradient(clf, xm, y).loss) / (2 * h);
        }
        clf_worst = std::max(clf_worst, rel_err(loss_and_input_gradient(clf, x, y).grad, fd));
    }
    o.require(clf_worst < 1e-5, "classifier input gradient rel. err < 1e-5");

    const auto gmm = benchmark_gmm();
    const std::vector<ScheduleParams> schedules{ScheduleParams::vp(), ScheduleParams::ve(), ScheduleParams::edm()};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double score_worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto& sch = schedules[i % 3];
        const double t = 1e-3 + (sch.t_max - 1e-3) * u(rng);
        const Vec x = 2.5 * standard_normal(rng, 2);
        const double h = 1e-5 * std::max(1.0, conditional_scale_std(sch, t).std);
        const GmmModel pt = diffused_mixture(gmm, sch, t);
        Vec fd(2);
        for (int j = 0; j < 2; ++j) {
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            fd[j] = (log_density(pt, xp) - log_density(pt, xm)) / (2 * h);
        }
        score_worst = std::max(score_worst, rel_err(score(gmm, sch, x, t), fd));
    }
    o.require(score_worst < 1e-6, "mixture score vs log-density FD rel. err < 1e-6");
    o.detail << std::setprecision(3) << " classifier max rel. err=" << clf_worst << "; score max rel. err=" << score_worst;
    return o;
}

}  // namespace

int main() {
    Suite suite;
    suite.manifest = read_manifest(PURIFY_MANIFEST);
    suite.scratch = fs::temp_directory_path() / "purify_acceptance";
    fs::remove_all(suite.scratch);
    fs::create_directories(suite.scratch);

    const std::vector<std::pair<std::string, std::function<Outcome(Suite&)>>> criteria = {
        {"marginal preservation", marginal_preservation},
        {"interaction times", interaction_times},
        {"solver order", solver_order},
        {"solver and step insensitivity", solver_insensitivity},
        {"probability-flow round trip", round_trip},
        {"end-to-end defense effect", defense_effect},
        {"lambda sweep", lambda_sweep},
        {"attack correctness", attack_correctness},
        {"gradient integrity", gradient_integrity},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second(suite);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " exception: " << e.what();
        }
        if (!o.pass) ++failures;
        std::printf("criterion %zu %s: %s -%s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
