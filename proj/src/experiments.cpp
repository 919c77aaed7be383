#include "purify/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace purify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream o;
    o << std::setprecision(precision) << v;
    return o.str();
}

// Stream-derivation tags.
constexpr std::uint64_t kEvalData = 1;
constexpr std::uint64_t kPurify = 0x50;
constexpr std::uint64_t kAttack = 0xa7;

// Largest standard-accuracy loss from purification for a t* to count as usable.
constexpr double kUsableDrop = 0.05;

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ResultRow base_row(const ExperimentConfig& cfg, const PurifierConfig& p, const AttackSpec& a) {
    ResultRow r;
    r.experiment = std::string(to_string(cfg.experiment));
    r.schedule = std::string(to_string(p.schedule.kind));
    r.attack = std::string(to_string(a.kind));
    r.norm = std::string(to_string(a.norm));
    r.eps = a.eps;
    r.t_star = p.t_star;
    r.lambda = p.lambda;
    r.method = std::string(to_string(p.method));
    r.n_steps = p.n_steps;
    r.seed = cfg.global_seed;
    return r;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kResultHeader << '\n' << std::setprecision(10);
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.schedule << ',' << r.attack << ',' << r.norm << ','
            << r.eps << ',' << r.t_star << ',' << r.lambda << ',' << r.method << ',' << r.n_steps
            << ',' << r.standard_accuracy << ',' << r.robust_accuracy << ','
            << r.unpurified_robust_accuracy << ',' << r.wall_time_seconds << ',' << r.seed << '\n';
    }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kResultHeader)
        throw std::runtime_error("results: missing or unexpected header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> c;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) c.push_back(cell);
        if (c.size() != 14) throw std::runtime_error("results: expected 14 columns in '" + line + "'");
        ResultRow r;
        r.experiment = c[0];
        r.schedule = c[1];
        r.attack = c[2];
        r.norm = c[3];
        r.eps = std::stod(c[4]);
        r.t_star = std::stod(c[5]);
        r.lambda = std::stod(c[6]);
        r.method = c[7];
        r.n_steps = std::stoi(c[8]);
        r.standard_accuracy = std::stod(c[9]);
        r.robust_accuracy = std::stod(c[10]);
        r.unpurified_robust_accuracy = std::stod(c[11]);
        r.wall_time_seconds = std::stod(c[12]);
        r.seed = std::stoull(c[13]);
        rows.push_back(std::move(r));
    }
    return rows;
}

GmmModel make_data_gmm(const DataConfig& data) {
    GmmModel g = benchmark_gmm();
    const double c = data.offset;
    g.means = {Vec{{c, c}}, Vec{{-c, -c}}, Vec{{c, -c}}, Vec{{-c, c}}};
    g.variances.assign(4, data.variance);
    g.validate();
    return g;
}

std::string classifier_cache_key(const ExperimentConfig& cfg) {
    std::ostringstream o;
    o << std::setprecision(17) << "data " << cfg.data.seed << ' ' << cfg.data.n_train << ' '
      << cfg.data.offset << ' ' << cfg.data.variance << " net";
    for (int h : cfg.classifier.hidden) o << ' ' << h;
    const auto& t = cfg.classifier.train;
    o << ' ' << to_string(cfg.classifier.activation) << " train " << t.learning_rate << ' '
      << t.epochs << ' ' << t.batch_size << ' ' << t.seed;
    std::ostringstream key;
    key << std::hex << std::setw(16) << std::setfill('0') << fnv1a(o.str());
    return key.str();
}

MlpClassifier obtain_classifier(const ExperimentConfig& cfg, const LabeledDataset& train_set,
                                bool* from_cache) {
    namespace fs = std::filesystem;
    fs::path dir = cfg.cache_dir.empty() ? fs::path(cfg.output_path).parent_path()
                                         : fs::path(cfg.cache_dir);
    const fs::path file = dir / ("classifier_" + classifier_cache_key(cfg) + ".txt");
    if (from_cache) *from_cache = false;
    if (fs::exists(file)) {
        std::ifstream in(file);
        MlpClassifier clf = load_model(in);
        if (from_cache) *from_cache = true;
        return clf;
    }
    std::vector<int> dims{static_cast<int>(train_set.points.front().size())};
    dims.insert(dims.end(), cfg.classifier.hidden.begin(), cfg.classifier.hidden.end());
    dims.push_back(2);
    auto init = MlpClassifier::random_init(dims, cfg.classifier.activation, cfg.classifier.train.seed);
    MlpClassifier clf = train(std::move(init), train_set, cfg.classifier.train).model;
    std::error_code ec;
    if (!dir.empty()) fs::create_directories(dir, ec);
    std::ofstream out(file);
    if (out) save_model(out, clf);
    return clf;
}

ExperimentContext prepare_context(const ExperimentConfig& cfg) {
    ExperimentContext ctx{make_data_gmm(cfg.data), {}, {}, MlpClassifier({2, 2}, Activation::Tanh),
                          false, {}, {}, {}, 0.0, 0.0};
    ctx.train_set = sample_dataset(ctx.gmm, cfg.data.n_train, cfg.data.seed);
    ctx.eval_set = sample_dataset(ctx.gmm, cfg.n_eval, derive_seed(cfg.data.seed, {kEvalData}));
    ctx.classifier = obtain_classifier(cfg, ctx.train_set, &ctx.classifier_from_cache);
    ctx.calibration = calibrate_epsilon(ctx.classifier, ctx.eval_set.points, ctx.eval_set.labels,
                                        cfg.attack.eps_factor);
    ctx.attack = cfg.attack.resolve(ctx.calibration.eps);
    AttackSpec pgd = ctx.attack;
    pgd.kind = AttackKind::PGD;
    ctx.pgd_adversarial.reserve(ctx.eval_set.size());
    for (std::size_t i = 0; i < ctx.eval_set.size(); ++i)
        ctx.pgd_adversarial.push_back(
            pgd_attack(ctx.classifier, ctx.eval_set.points[i], ctx.eval_set.labels[i], pgd));
    ctx.clean_accuracy = accuracy_on(ctx.classifier, ctx.eval_set.points, ctx.eval_set.labels);
    ctx.unpurified_robust_accuracy =
        accuracy_on(ctx.classifier, ctx.pgd_adversarial, ctx.eval_set.labels);
    return ctx;
}

std::uint64_t purification_seed(const ExperimentConfig& cfg, std::uint64_t role, int repeat) {
    return derive_seed(cfg.global_seed, {kPurify, role, static_cast<std::uint64_t>(repeat)});
}

namespace {

double purified_accuracy(const ExperimentContext& ctx, const std::vector<Vec>& points,
                         const std::vector<int>& labels, const PurifierConfig& pcfg,
                         std::uint64_t seed) {
    const ScoreFn score = make_score_fn(ctx.gmm, pcfg.schedule);
    const BatchResult purified = purify_batch(points, pcfg, score, seed);
    if (!purified.failures.empty())
        throw std::runtime_error("purification failed at index " +
                                 std::to_string(purified.failures.front().index) + ": " +
                                 purified.failures.front().message);
    return accuracy_on(ctx.classifier, purified.points, labels);
}

void add_context_summary(const ExperimentContext& ctx, Summary& s) {
    s.emplace_back("clean_accuracy", fmt(ctx.clean_accuracy, 10));
    s.emplace_back("calibrated_eps", fmt(ctx.calibration.eps, 10));
    s.emplace_back("median_margin", fmt(ctx.calibration.median_margin, 10));
    s.emplace_back("median_grad_inf", fmt(ctx.calibration.median_grad_inf, 10));
    s.emplace_back("attack_eps", fmt(ctx.attack.eps, 10));
    s.emplace_back("attack_step_size", fmt(ctx.attack.step_size, 10));
    s.emplace_back("unpurified_robust_accuracy", fmt(ctx.unpurified_robust_accuracy, 10));
}

ResultRow sweep_row(const ExperimentConfig& cfg, const ExperimentContext& ctx,
                    const PurifierConfig& pcfg) {
    const auto start = Clock::now();
    AttackSpec pgd = ctx.attack;
    pgd.kind = AttackKind::PGD;
    ResultRow row = base_row(cfg, pcfg, pgd);
    const auto [standard, robust] = purified_accuracies(ctx, cfg, pcfg);
    row.standard_accuracy = standard;
    row.robust_accuracy = robust;
    row.unpurified_robust_accuracy = ctx.unpurified_robust_accuracy;
    row.wall_time_seconds = seconds_since(start);
    return row;
}

}  // namespace

std::pair<double, double> purified_accuracies(const ExperimentContext& ctx,
                                              const ExperimentConfig& cfg,
                                              const PurifierConfig& pcfg, int repeat) {
    // Clean and adversarial sets share noise so that a zero budget gives
    // identical accuracies.
    const std::uint64_t seed = purification_seed(cfg, 0, repeat);
    return {purified_accuracy(ctx, ctx.eval_set.points, ctx.eval_set.labels, pcfg, seed),
            purified_accuracy(ctx, ctx.pgd_adversarial, ctx.eval_set.labels, pcfg, seed)};
}

ExperimentOutput run_lambda_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const ExperimentContext ctx = prepare_context(cfg);
    ExperimentOutput out;
    add_context_summary(ctx, out.summary);
    std::vector<double> lambdas = cfg.sweep.lambdas;
    std::sort(lambdas.begin(), lambdas.end());
    for (double lambda : lambdas) {
        PurifierConfig p = cfg.purifier;
        p.lambda = lambda;
        out.rows.push_back(sweep_row(cfg, ctx, p));
        const auto& r = out.rows.back();
        if (r.robust_accuracy > r.standard_accuracy)
            out.soft_failures.push_back("lambda " + fmt(lambda) + ": robust accuracy exceeds standard accuracy");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (out.rows[i].robust_accuracy > out.rows[best].robust_accuracy) best = i;
    const bool interior = lambdas.size() > 2 && best > 0 && best + 1 < lambdas.size();
    out.summary.emplace_back("best_lambda", fmt(lambdas[best]));
    out.summary.emplace_back("best_robust_accuracy", fmt(out.rows[best].robust_accuracy, 10));
    out.summary.emplace_back("interior_lambda_optimal", interior ? "yes" : "no");
    return out;
}

ExperimentOutput run_time_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const ExperimentContext ctx = prepare_context(cfg);
    ExperimentOutput out;
    add_context_summary(ctx, out.summary);
    const auto& configured = cfg.purifier.schedule;
    const ScheduleParams vp = configured.kind == ScheduleKind::VP ? configured : ScheduleParams::vp();
    const ScheduleParams ve = configured.kind == ScheduleKind::VE ? configured : ScheduleParams::ve();
    double argmax[2] = {0.0, 0.0};
    int which = 0;
    for (const auto& schedule : {vp, ve}) {
        const double lo = cfg.purifier.t_min;
        const double hi = schedule.t_max;
        const int n = cfg.sweep.t_star_points;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            PurifierConfig p = cfg.purifier;
            p.schedule = schedule;
            p.t_star = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
            out.rows.push_back(sweep_row(cfg, ctx, p));
            // Only levels that keep clean inputs usable compete; otherwise
            // chance-level output on both sets would win.
            const auto& r = out.rows.back();
            if (r.standard_accuracy >= ctx.clean_accuracy - kUsableDrop && r.robust_accuracy > best) {
                best = out.rows.back().robust_accuracy;
                argmax[which] = p.t_star;
            }
        }
        ++which;
    }
    out.summary.emplace_back("argmax_rule", "max robust accuracy with standard accuracy >= clean - 0.05");
    out.summary.emplace_back("argmax_t_star_VP", fmt(argmax[0]));
    out.summary.emplace_back("argmax_t_star_VE", fmt(argmax[1]));
    const bool ordered = argmax[1] >= argmax[0];
    out.summary.emplace_back("ve_argmax_ge_vp", ordered ? "yes" : "no");
    if (!ordered) out.soft_failures.push_back("VE optimal t* is below the VP optimal t*");
    return out;
}

ExperimentOutput run_solver_compare(const ExperimentConfig& cfg) {
    cfg.validate();
    const ExperimentContext ctx = prepare_context(cfg);
    ExperimentOutput out;
    add_context_summary(ctx, out.summary);
    for (SolverMethod m : cfg.sweep.methods) {
        for (int n : cfg.sweep.step_counts) {
            PurifierConfig p = cfg.purifier;
            p.method = m;
            p.n_steps = n;
            out.rows.push_back(sweep_row(cfg, ctx, p));
        }
    }
    auto find = [&](std::string_view method, int n) -> const ResultRow* {
        for (const auto& r : out.rows)
            if (r.method == method && r.n_steps == n) return &r;
        return nullptr;
    };
    double max_gap = 0.0;
    for (int n : cfg.sweep.step_counts) {
        const auto* em = find("EM", n);
        const auto* heun = find("Heun", n);
        if (em && heun) max_gap = std::max(max_gap, std::abs(em->robust_accuracy - heun->robust_accuracy));
    }
    out.summary.emplace_back("max_em_heun_robust_gap", fmt(max_gap, 10));
    if (max_gap >= 0.02) out.soft_failures.push_back("EM and Heun robust accuracy differ by >= 2 points");
    const auto [lo, hi] = std::minmax_element(cfg.sweep.step_counts.begin(), cfg.sweep.step_counts.end());
    const auto* few = find("Heun", *lo);
    const auto* many = find("Heun", *hi);
    if (few && many) {
        const double gap = std::abs(few->robust_accuracy - many->robust_accuracy);
        out.summary.emplace_back("heun_fewest_vs_most_steps_gap", fmt(gap, 10));
        if (gap >= 0.02) out.soft_failures.push_back("Heun robust accuracy changes by >= 2 points across step counts");
    }
    return out;
}

ExperimentOutput run_step_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const ExperimentContext ctx = prepare_context(cfg);
    ExperimentOutput out;
    add_context_summary(ctx, out.summary);
    double lo = 1.0, hi = 0.0;
    for (int total : cfg.sweep.total_steps) {
        PurifierConfig p = cfg.purifier;
        // Purification covers the t_star / t_max share of the total steps.
        p.n_steps = std::max(1, static_cast<int>(std::lround(total * p.t_star / p.schedule.t_max)));
        out.rows.push_back(sweep_row(cfg, ctx, p));
        lo = std::min(lo, out.rows.back().robust_accuracy);
        hi = std::max(hi, out.rows.back().robust_accuracy);
    }
    out.summary.emplace_back("robust_accuracy_spread", fmt(hi - lo, 10));
    return out;
}

ExperimentOutput run_attack_eval(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentContext ctx = prepare_context(cfg);
    ExperimentOutput out;
    add_context_summary(ctx, out.summary);
    const ScoreFn score = make_score_fn(ctx.gmm, cfg.purifier.schedule);
    const Purification purifier{cfg.purifier, score};
    PurifierConfig identity_cfg = cfg.purifier;
    identity_cfg.t_star = identity_cfg.t_min;
    const Purification identity{identity_cfg, score};

    const bool adaptive = ctx.attack.kind != AttackKind::PGD;
    const std::size_t n = adaptive ? std::min(cfg.sweep.adaptive_subset, ctx.eval_set.size())
                                   : ctx.eval_set.size();
    const std::vector<Vec> points(ctx.eval_set.points.begin(), ctx.eval_set.points.begin() + n);
    const std::vector<int> labels(ctx.eval_set.labels.begin(), ctx.eval_set.labels.begin() + n);
    const std::uint64_t attack_root = derive_seed(cfg.global_seed, {kAttack, ctx.attack.seed});

    std::vector<double> unpurified_by_eps;
    for (std::size_t e = 0; e < cfg.sweep.eps_scales.size(); ++e) {
        const auto start = Clock::now();
        // Budget sweep: only eps moves; step sizes stay at their calibrated values.
        AttackSpec spec = ctx.attack;
        spec.eps = cfg.sweep.eps_scales[e] * ctx.attack.eps;

        std::vector<Vec> adv_raw(n), adv_defended(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(attack_root, {e, i});
            switch (spec.kind) {
            case AttackKind::PGD:
                adv_raw[i] = pgd_attack(ctx.classifier, points[i], labels[i], spec);
                adv_defended[i] = adv_raw[i];
                break;
            case AttackKind::SPSA:
                adv_raw[i] = spsa_attack(raw_model(ctx.classifier), points[i], labels[i], spec, rng);
                adv_defended[i] = spsa_attack(purified_model(ctx.classifier, purifier), points[i],
                                              labels[i], spec, rng);
                break;
            case AttackKind::BpdaEot:
                adv_raw[i] = bpda_eot_attack(ctx.classifier, identity, points[i], labels[i], spec, rng);
                adv_defended[i] = bpda_eot_attack(ctx.classifier, purifier, points[i], labels[i], spec, rng);
                break;
            }
        }
        double standard = 0.0, robust = 0.0;
        for (int k = 0; k < cfg.sweep.n_seeds; ++k) {
            const std::uint64_t seed = purification_seed(cfg, 0, k);
            standard += purified_accuracy(ctx, points, labels, cfg.purifier, seed);
            robust += purified_accuracy(ctx, adv_defended, labels, cfg.purifier, seed);
        }
        ResultRow row = base_row(cfg, cfg.purifier, spec);
        row.standard_accuracy = standard / cfg.sweep.n_seeds;
        row.robust_accuracy = robust / cfg.sweep.n_seeds;
        row.unpurified_robust_accuracy = accuracy_on(ctx.classifier, adv_raw, labels);
        row.wall_time_seconds = seconds_since(start);
        unpurified_by_eps.push_back(row.unpurified_robust_accuracy);
        out.rows.push_back(row);
        if (cfg.sweep.eps_scales[e] == 1.0)
            out.summary.emplace_back("defense_gap_at_eps",
                                     fmt(row.robust_accuracy - row.unpurified_robust_accuracy, 10));
    }
    // Budget monotonicity of the undefended classifier, in order of eps.
    std::vector<std::size_t> order(cfg.sweep.eps_scales.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        return cfg.sweep.eps_scales[a] < cfg.sweep.eps_scales[b];
    });
    bool monotone = true;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (unpurified_by_eps[order[i]] > unpurified_by_eps[order[i - 1]]) monotone = false;
    out.summary.emplace_back("unpurified_monotone_in_eps", monotone ? "yes" : "no");
    if (!monotone) out.soft_failures.push_back("unpurified robust accuracy increases with eps");
    out.summary.emplace_back("evaluated_points", std::to_string(n));
    return out;
}

ExperimentOutput run_theory_report(const ExperimentConfig& cfg) {
    if (cfg.sweep.h_grid.empty()) throw ConfigError(0, "sweep.h_grid must not be empty");
    cfg.validate();
    const auto& configured = cfg.purifier.schedule;
    const ScheduleParams vp = configured.kind == ScheduleKind::VP ? configured : ScheduleParams::vp();
    const ScheduleParams ve = configured.kind == ScheduleKind::VE ? configured : ScheduleParams::ve();
    ExperimentOutput out;
    out.order = order_report(cfg.sweep.h_grid, vp, ve);

    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 1; i < out.order->rows.size(); ++i) {
        const auto& r = out.order->rows[i];
        if (out.order->rows[i - 1].h >= 1e-3 && r.h <= 1e-2 && r.slope_vp) {
            lo = std::min(lo, *r.slope_vp);
            hi = std::max(hi, *r.slope_vp);
        }
    }
    bool ve_above = true;
    for (const auto& r : out.order->rows)
        if (r.h >= 0.05 && r.h <= 1.0 && !(r.t_ve && *r.t_ve > r.t_vp)) ve_above = false;

    std::ostringstream text;
    if (std::isfinite(lo)) {
        const bool ok = lo >= 1.98 && hi <= 2.02;
        text << "VP log-log slope on h in [0.001, 0.01]: " << fmt(lo) << " .. " << fmt(hi)
             << (ok ? " (within [1.98, 2.02])" : " (outside [1.98, 2.02])") << '\n';
        out.summary.emplace_back("vp_slope_min", fmt(lo, 10));
        out.summary.emplace_back("vp_slope_max", fmt(hi, 10));
        out.summary.emplace_back("vp_slope_second_order", ok ? "yes" : "no");
        if (!ok) out.soft_failures.push_back("VP slope outside [1.98, 2.02]");
    } else {
        text << "VP log-log slope on h in [0.001, 0.01]: no adjacent grid points\n";
    }
    text << "VE interaction time exceeds VP on every grid h in [0.05, 1.0]: "
         << (ve_above ? "yes" : "no") << '\n';
    out.summary.emplace_back("ve_exceeds_vp", ve_above ? "yes" : "no");
    if (!ve_above) out.soft_failures.push_back("VE interaction time does not exceed VP");
    out.text_summary = text.str();
    return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
    case ExperimentKind::LambdaSweep: return run_lambda_sweep(cfg);
    case ExperimentKind::TimeSweep: return run_time_sweep(cfg);
    case ExperimentKind::SolverCompare: return run_solver_compare(cfg);
    case ExperimentKind::TheoryReport: return run_theory_report(cfg);
    case ExperimentKind::AttackEval: return run_attack_eval(cfg);
    case ExperimentKind::StepInsensitivity: return run_step_sweep(cfg);
    }
    throw std::logic_error("unhandled experiment");
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out) {
    namespace fs = std::filesystem;
    const fs::path path(cfg.output_path);
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    auto open = [](const std::string& p) {
        std::ofstream f(p);
        if (!f) throw std::runtime_error("cannot write '" + p + "'");
        return f;
    };
    {
        auto f = open(cfg.output_path);
        if (out.order) write_order_csv(f, *out.order);
        else write_results_csv(f, out.rows);
    }
    const std::string effective = serialize_config(cfg);
    {
        auto f = open(cfg.output_path + ".config");
        f << effective;
    }
    {
        auto f = open(cfg.output_path + ".manifest");
        std::ostringstream hash;
        hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(effective);
        f << "experiment = " << to_string(cfg.experiment) << '\n'
          << "seed = " << cfg.global_seed << '\n'
          << "config_hash = " << hash.str() << '\n';
        for (const auto& [k, v] : out.summary) f << k << " = " << v << '\n';
        f << "soft_failures = " << out.soft_failures.size() << '\n';
        for (const auto& s : out.soft_failures) f << "# soft failure: " << s << '\n';
    }
    if (!out.text_summary.empty()) {
        auto f = open(cfg.output_path + ".summary.txt");
        f << out.text_summary;
    }
}

}  // namespace purify
