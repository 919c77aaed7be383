#include "purify/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace purify {

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::LambdaSweep: return "lambda-sweep";
    case ExperimentKind::TimeSweep: return "time-sweep";
    case ExperimentKind::SolverCompare: return "solver-compare";
    case ExperimentKind::TheoryReport: return "theory";
    case ExperimentKind::AttackEval: return "attack-eval";
    case ExperimentKind::StepInsensitivity: return "step-sweep";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
    for (auto k : {ExperimentKind::LambdaSweep, ExperimentKind::TimeSweep,
                   ExperimentKind::SolverCompare, ExperimentKind::TheoryReport,
                   ExperimentKind::AttackEval, ExperimentKind::StepInsensitivity})
        if (text == to_string(k)) return k;
    throw std::invalid_argument("unknown experiment '" + std::string(text) + "'");
}

AttackSpec AttackConfig::resolve(double calibrated_eps) const {
    AttackSpec s;
    s.kind = kind;
    s.norm = norm;
    s.eps = eps.value_or(calibrated_eps);
    s.step_size = step_size.value_or(s.eps / 10.0);
    s.n_steps = n_steps;
    s.spsa_delta = spsa_delta;
    s.spsa_samples = spsa_samples;
    s.spsa_lr = spsa_lr.value_or(s.eps / 10.0);
    s.eot_samples = eot_samples;
    s.seed = seed;
    // A zero budget still needs positive step sizes to be a valid spec.
    if (!(s.step_size > 0.0)) s.step_size = 1.0;
    if (!(s.spsa_lr > 0.0)) s.spsa_lr = 1.0;
    return s;
}

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(0, message);
}

}  // namespace

void ExperimentConfig::validate() const {
    require(n_eval >= 1, "experiment.n_eval must be >= 1");
    try {
        purifier.schedule.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(0, std::string("schedule.") + e.what());
    }
    const auto& p = purifier;
    require(p.lambda >= 0.0 && p.lambda <= 1.0, "purifier.lambda must lie in [0, 1]");
    require(p.t_min > 0.0, "purifier.t_min must be positive");
    require(p.t_star >= p.t_min && p.t_star <= p.schedule.t_max,
            "purifier.t_star must lie in [t_min, t_max]");
    require(p.n_steps >= 1, "purifier.n_steps must be >= 1");

    if (attack.eps) require(*attack.eps >= 0.0, "attack.eps must be nonnegative");
    require(attack.eps_factor > 0.0, "attack.eps_factor must be positive");
    if (attack.step_size) require(*attack.step_size > 0.0, "attack.step_size must be positive");
    if (attack.spsa_lr) require(*attack.spsa_lr > 0.0, "attack.spsa_lr must be positive");
    require(attack.n_steps >= 0, "attack.n_steps must be nonnegative");
    require(attack.spsa_delta > 0.0, "attack.spsa_delta must be positive");
    require(attack.spsa_samples >= 1, "attack.spsa_samples must be >= 1");
    require(attack.eot_samples >= 1, "attack.eot_samples must be >= 1");

    for (int h : classifier.hidden) require(h >= 1, "classifier.hidden widths must be positive");
    require(classifier.train.learning_rate >= 0.0, "classifier.learning_rate must be nonnegative");
    require(classifier.train.epochs >= 1, "classifier.epochs must be positive");
    require(classifier.train.batch_size >= 1, "classifier.batch_size must be positive");

    require(data.n_train >= 1, "data.n_train must be >= 1");
    require(data.variance > 0.0, "data.variance must be positive");
    require(data.offset > 0.0, "data.offset must be positive");

    for (double l : sweep.lambdas)
        require(l >= 0.0 && l <= 1.0, "sweep.lambdas entries (lambda) must lie in [0, 1]");
    require(!sweep.lambdas.empty(), "sweep.lambdas must not be empty");
    require(sweep.t_star_points >= 2, "sweep.t_star_points must be >= 2");
    require(!sweep.methods.empty(), "sweep.methods must not be empty");
    require(!sweep.step_counts.empty(), "sweep.step_counts must not be empty");
    for (int n : sweep.step_counts) require(n >= 1, "sweep.step_counts entries must be >= 1");
    require(!sweep.total_steps.empty(), "sweep.total_steps must not be empty");
    for (int n : sweep.total_steps) require(n >= 1, "sweep.total_steps entries must be >= 1");
    require(!sweep.eps_scales.empty(), "sweep.eps_scales must not be empty");
    for (double e : sweep.eps_scales) require(e >= 0.0, "sweep.eps_scales entries must be nonnegative");
    require(!sweep.h_grid.empty(), "sweep.h_grid must not be empty");
    for (std::size_t i = 0; i < sweep.h_grid.size(); ++i) {
        require(sweep.h_grid[i] > 0.0, "sweep.h_grid entries must be positive");
        if (i > 0) require(sweep.h_grid[i] > sweep.h_grid[i - 1], "sweep.h_grid must be ascending");
    }
    require(sweep.n_seeds >= 1, "sweep.n_seeds must be >= 1");
    require(sweep.adaptive_subset >= 1, "sweep.adaptive_subset must be >= 1");
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    const auto& a = purifier;
    const auto& b = o.purifier;
    return experiment == o.experiment && global_seed == o.global_seed && n_eval == o.n_eval &&
           output_path == o.output_path && cache_dir == o.cache_dir && a.schedule == b.schedule &&
           a.t_star == b.t_star && a.t_min == b.t_min && a.n_steps == b.n_steps &&
           a.method == b.method && a.lambda == b.lambda && a.forward_mode == b.forward_mode &&
           attack == o.attack && classifier == o.classifier && data == o.data && sweep == o.sweep;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("expected a number, got '" + std::string(v) + "'");
    return out;
}

template <typename Int>
Int to_int(std::string_view v) {
    Int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("expected an integer, got '" + std::string(v) + "'");
    return out;
}

std::vector<std::string_view> split_list(std::string_view v) {
    std::vector<std::string_view> items;
    if (trim(v).empty()) return items;
    std::size_t start = 0;
    while (true) {
        const auto comma = v.find(',', start);
        items.push_back(trim(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

template <typename T, typename F>
std::vector<T> to_list(std::string_view v, F convert) {
    std::vector<T> out;
    for (auto item : split_list(v)) out.push_back(convert(item));
    return out;
}

std::optional<double> to_auto_double(std::string_view v) {
    if (v == "auto") return std::nullopt;
    return to_double(v);
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"experiment.kind", [](auto& c, auto v) { c.experiment = parse_experiment_kind(v); }},
        {"experiment.seed", [](auto& c, auto v) { c.global_seed = to_int<std::uint64_t>(v); }},
        {"experiment.n_eval", [](auto& c, auto v) { c.n_eval = to_int<std::size_t>(v); }},
        {"experiment.output", [](auto& c, auto v) { c.output_path = std::string(v); }},
        {"experiment.cache_dir", [](auto& c, auto v) { c.cache_dir = std::string(v); }},

        // schedule.kind is applied before every other key; see parse_config.
        {"schedule.kind", [](auto&, auto) {}},
        {"schedule.beta1", [](auto& c, auto v) { c.purifier.schedule.beta1 = to_double(v); }},
        {"schedule.beta2", [](auto& c, auto v) { c.purifier.schedule.beta2 = to_double(v); }},
        {"schedule.sigma_min", [](auto& c, auto v) { c.purifier.schedule.sigma_min = to_double(v); }},
        {"schedule.sigma_max", [](auto& c, auto v) { c.purifier.schedule.sigma_max = to_double(v); }},
        {"schedule.rho", [](auto& c, auto v) { c.purifier.schedule.rho = to_double(v); }},
        {"schedule.t_max", [](auto& c, auto v) { c.purifier.schedule.t_max = to_double(v); }},

        {"purifier.t_star", [](auto& c, auto v) { c.purifier.t_star = to_double(v); }},
        {"purifier.t_min", [](auto& c, auto v) { c.purifier.t_min = to_double(v); }},
        {"purifier.n_steps", [](auto& c, auto v) { c.purifier.n_steps = to_int<int>(v); }},
        {"purifier.method", [](auto& c, auto v) { c.purifier.method = parse_solver_method(v); }},
        {"purifier.lambda", [](auto& c, auto v) { c.purifier.lambda = to_double(v); }},
        {"purifier.forward_mode", [](auto& c, auto v) { c.purifier.forward_mode = parse_forward_mode(v); }},

        {"attack.kind", [](auto& c, auto v) { c.attack.kind = parse_attack_kind(v); }},
        {"attack.norm", [](auto& c, auto v) { c.attack.norm = parse_norm(v); }},
        {"attack.eps", [](auto& c, auto v) { c.attack.eps = to_auto_double(v); }},
        {"attack.eps_factor", [](auto& c, auto v) { c.attack.eps_factor = to_double(v); }},
        {"attack.step_size", [](auto& c, auto v) { c.attack.step_size = to_auto_double(v); }},
        {"attack.n_steps", [](auto& c, auto v) { c.attack.n_steps = to_int<int>(v); }},
        {"attack.spsa_delta", [](auto& c, auto v) { c.attack.spsa_delta = to_double(v); }},
        {"attack.spsa_samples", [](auto& c, auto v) { c.attack.spsa_samples = to_int<int>(v); }},
        {"attack.spsa_lr", [](auto& c, auto v) { c.attack.spsa_lr = to_auto_double(v); }},
        {"attack.eot_samples", [](auto& c, auto v) { c.attack.eot_samples = to_int<int>(v); }},
        {"attack.seed", [](auto& c, auto v) { c.attack.seed = to_int<std::uint64_t>(v); }},

        {"classifier.hidden", [](auto& c, auto v) { c.classifier.hidden = to_list<int>(v, to_int<int>); }},
        {"classifier.activation", [](auto& c, auto v) { c.classifier.activation = parse_activation(v); }},
        {"classifier.learning_rate", [](auto& c, auto v) { c.classifier.train.learning_rate = to_double(v); }},
        {"classifier.epochs", [](auto& c, auto v) { c.classifier.train.epochs = to_int<int>(v); }},
        {"classifier.batch_size", [](auto& c, auto v) { c.classifier.train.batch_size = to_int<int>(v); }},
        {"classifier.seed", [](auto& c, auto v) { c.classifier.train.seed = to_int<std::uint64_t>(v); }},

        {"data.seed", [](auto& c, auto v) { c.data.seed = to_int<std::uint64_t>(v); }},
        {"data.n_train", [](auto& c, auto v) { c.data.n_train = to_int<std::size_t>(v); }},
        {"data.offset", [](auto& c, auto v) { c.data.offset = to_double(v); }},
        {"data.variance", [](auto& c, auto v) { c.data.variance = to_double(v); }},

        {"sweep.lambdas", [](auto& c, auto v) { c.sweep.lambdas = to_list<double>(v, to_double); }},
        {"sweep.t_star_points", [](auto& c, auto v) { c.sweep.t_star_points = to_int<int>(v); }},
        {"sweep.methods", [](auto& c, auto v) { c.sweep.methods = to_list<SolverMethod>(v, parse_solver_method); }},
        {"sweep.step_counts", [](auto& c, auto v) { c.sweep.step_counts = to_list<int>(v, to_int<int>); }},
        {"sweep.total_steps", [](auto& c, auto v) { c.sweep.total_steps = to_list<int>(v, to_int<int>); }},
        {"sweep.eps_scales", [](auto& c, auto v) { c.sweep.eps_scales = to_list<double>(v, to_double); }},
        {"sweep.h_grid", [](auto& c, auto v) { c.sweep.h_grid = to_list<double>(v, to_double); }},
        {"sweep.n_seeds", [](auto& c, auto v) { c.sweep.n_seeds = to_int<int>(v); }},
        {"sweep.adaptive_subset", [](auto& c, auto v) { c.sweep.adaptive_subset = to_int<std::size_t>(v); }},
    };
    return table;
}

struct Entry {
    std::string key;
    std::string value;
    std::size_t line;
};

}  // namespace

ParsedConfig parse_config(std::string_view text, bool strict) {
    std::vector<Entry> entries;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == text.npos ? text.npos : eol - pos);
        pos = eol == text.npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != raw.npos) raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError(line_no, "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == line.npos) throw ConfigError(line_no, "expected 'key = value'");
        if (section.empty()) throw ConfigError(line_no, "key outside of any section");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(line_no, "empty key");
        entries.push_back({section + "." + std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
    }

    ParsedConfig parsed;
    auto& cfg = parsed.config;
    for (const auto& e : entries) {
        if (e.key != "schedule.kind") continue;
        try {
            switch (parse_schedule_kind(e.value)) {
            case ScheduleKind::VP: cfg.purifier.schedule = ScheduleParams::vp(); break;
            case ScheduleKind::VE: cfg.purifier.schedule = ScheduleParams::ve(); break;
            case ScheduleKind::EDM: cfg.purifier.schedule = ScheduleParams::edm(); break;
            }
        } catch (const std::exception& ex) {
            throw ConfigError(e.line, "schedule.kind: " + std::string(ex.what()));
        }
    }
    for (const auto& e : entries) {
        const auto it = setters().find(e.key);
        if (it == setters().end()) {
            if (strict) throw ConfigError(e.line, "unknown key '" + e.key + "'");
            parsed.warnings.push_back("line " + std::to_string(e.line) + ": ignoring unknown key '" + e.key + "'");
            continue;
        }
        try {
            it->second(cfg, e.value);
        } catch (const std::exception& ex) {
            throw ConfigError(e.line, e.key + ": " + ex.what());
        }
    }
    cfg.validate();
    return parsed;
}

ParsedConfig load_config(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), strict);
}

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "auto"; }

template <typename T, typename F>
std::string join(const std::vector<T>& items, F format) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += format(items[i]);
    }
    return out;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
    const auto num = [](double v) { return fmt(v); };
    const auto integer = [](auto v) { return std::to_string(v); };
    const auto& s = c.purifier.schedule;
    std::ostringstream o;
    o << "[experiment]\n"
      << "kind = " << to_string(c.experiment) << '\n'
      << "seed = " << c.global_seed << '\n'
      << "n_eval = " << c.n_eval << '\n'
      << "output = " << c.output_path << '\n'
      << "cache_dir = " << c.cache_dir << "\n\n";
    o << "[schedule]\n"
      << "kind = " << to_string(s.kind) << '\n'
      << "beta1 = " << fmt(s.beta1) << '\n'
      << "beta2 = " << fmt(s.beta2) << '\n'
      << "sigma_min = " << fmt(s.sigma_min) << '\n'
      << "sigma_max = " << fmt(s.sigma_max) << '\n'
      << "rho = " << fmt(s.rho) << '\n'
      << "t_max = " << fmt(s.t_max) << "\n\n";
    o << "[purifier]\n"
      << "t_star = " << fmt(c.purifier.t_star) << '\n'
      << "t_min = " << fmt(c.purifier.t_min) << '\n'
      << "n_steps = " << c.purifier.n_steps << '\n'
      << "method = " << to_string(c.purifier.method) << '\n'
      << "lambda = " << fmt(c.purifier.lambda) << '\n'
      << "forward_mode = " << to_string(c.purifier.forward_mode) << "\n\n";
    const auto& a = c.attack;
    o << "[attack]\n"
      << "kind = " << to_string(a.kind) << '\n'
      << "norm = " << to_string(a.norm) << '\n'
      << "eps = " << fmt(a.eps) << '\n'
      << "eps_factor = " << fmt(a.eps_factor) << '\n'
      << "step_size = " << fmt(a.step_size) << '\n'
      << "n_steps = " << a.n_steps << '\n'
      << "spsa_delta = " << fmt(a.spsa_delta) << '\n'
      << "spsa_samples = " << a.spsa_samples << '\n'
      << "spsa_lr = " << fmt(a.spsa_lr) << '\n'
      << "eot_samples = " << a.eot_samples << '\n'
      << "seed = " << a.seed << "\n\n";
    o << "[classifier]\n"
      << "hidden = " << join(c.classifier.hidden, integer) << '\n'
      << "activation = " << to_string(c.classifier.activation) << '\n'
      << "learning_rate = " << fmt(c.classifier.train.learning_rate) << '\n'
      << "epochs = " << c.classifier.train.epochs << '\n'
      << "batch_size = " << c.classifier.train.batch_size << '\n'
      << "seed = " << c.classifier.train.seed << "\n\n";
    o << "[data]\n"
      << "seed = " << c.data.seed << '\n'
      << "n_train = " << c.data.n_train << '\n'
      << "offset = " << fmt(c.data.offset) << '\n'
      << "variance = " << fmt(c.data.variance) << "\n\n";
    const auto& w = c.sweep;
    o << "[sweep]\n"
      << "lambdas = " << join(w.lambdas, num) << '\n'
      << "t_star_points = " << w.t_star_points << '\n'
      << "methods = " << join(w.methods, [](SolverMethod m) { return std::string(to_string(m)); }) << '\n'
      << "step_counts = " << join(w.step_counts, integer) << '\n'
      << "total_steps = " << join(w.total_steps, integer) << '\n'
      << "eps_scales = " << join(w.eps_scales, num) << '\n'
      << "h_grid = " << join(w.h_grid, num) << '\n'
      << "n_seeds = " << w.n_seeds << '\n'
      << "adaptive_subset = " << w.adaptive_subset << '\n';
    return o.str();
}

}  // namespace purify
