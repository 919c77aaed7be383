#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "purify/config.hpp"

using namespace purify;

namespace {

std::string error_of(std::string_view text, bool strict = true) {
    try {
        parse_config(text, strict);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal config takes every default") {
    const auto parsed = parse_config("[experiment]\nkind = time-sweep\n");
    CHECK(parsed.warnings.empty());
    ExperimentConfig expected;
    expected.experiment = ExperimentKind::TimeSweep;
    CHECK(parsed.config == expected);

    const std::string echo = serialize_config(parsed.config);
    for (const char* key : {"kind = time-sweep", "t_star = 0.18", "lambda = 0.75", "beta2 = 9.95", "eps = auto",
                            "lambdas = 0, 0.25, 0.5, 0.75, 1", "n_seeds = 5", "learning_rate = 0.003"})
        CHECK_MESSAGE(echo.find(key) != std::string::npos, key);
}

TEST_CASE("serialize round trip") {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::AttackEval;
    cfg.global_seed = 12345678901234ULL;
    cfg.n_eval = 64;
    cfg.output_path = "out/run.csv";
    cfg.purifier.schedule = ScheduleParams::ve();
    cfg.purifier.schedule.sigma_max = 37.25;
    cfg.purifier.t_star = 0.1 + 0.2;  // not exactly representable
    cfg.purifier.lambda = 1.0 / 3.0;
    cfg.purifier.method = SolverMethod::EulerMaruyama;
    cfg.purifier.forward_mode = ForwardMode::ProbabilityFlow;
    cfg.attack.kind = AttackKind::BpdaEot;
    cfg.attack.norm = Norm::L2;
    cfg.attack.eps = 0.7;
    cfg.attack.eot_samples = 4;
    cfg.classifier.hidden = {8, 4, 4};
    cfg.classifier.activation = Activation::ReLU;
    cfg.sweep.methods = {SolverMethod::Heun};
    cfg.sweep.h_grid = {0.5};
    const auto reparsed = parse_config(serialize_config(cfg)).config;
    CHECK(reparsed == cfg);
    CHECK(serialize_config(reparsed) == serialize_config(cfg));

    const std::string path = "config_roundtrip_test.cfg";
    {
        std::ofstream f(path);
        f << serialize_config(cfg);
    }
    CHECK(load_config(path).config == cfg);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config("no/such/file.cfg"), std::runtime_error);
}

TEST_CASE("schedule kind resets schedule defaults regardless of key order") {
    const auto a = parse_config("[schedule]\nsigma_max = 20\nkind = VE\n").config;
    CHECK(a.purifier.schedule.kind == ScheduleKind::VE);
    CHECK(a.purifier.schedule.sigma_max == 20.0);
    CHECK(a.purifier.schedule.sigma_min == ScheduleParams::ve().sigma_min);
    const auto edm = parse_config("[schedule]\nkind = EDM\n").config;
    CHECK(edm.purifier.schedule.t_max == ScheduleParams::edm().t_max);
}

TEST_CASE("validation names the field") {
    const std::string err = error_of("[purifier]\nlambda = 1.3\n");
    CHECK(err.find("lambda") != std::string::npos);
    CHECK(error_of("[experiment]\nn_eval = 0\n").find("n_eval") != std::string::npos);
    CHECK(error_of("[sweep]\nh_grid =\n").find("h_grid") != std::string::npos);
    CHECK(error_of("[purifier]\nt_star = 5\n").find("t_star") != std::string::npos);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK(error_of("# header\n[purifier]\nlambda 0.5\n").rfind("line 3", 0) == 0);
    CHECK(error_of("[purifier\n").rfind("line 1", 0) == 0);
    CHECK(error_of("\n\n[purifier]\nn_steps = many\n").rfind("line 4", 0) == 0);
    CHECK(error_of("lambda = 0.5\n").rfind("line 1", 0) == 0);  // key outside a section
    CHECK(error_of("[attack]\nkind = FGSM\n").rfind("line 2", 0) == 0);
    try {
        parse_config("[purifier]\nt_min = x\n");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("unknown keys") {
    const std::string text = "[purifier]\nlambda = 0.5\ncolour = blue\n";
    CHECK(error_of(text, true).find("purifier.colour") != std::string::npos);
    const auto lenient = parse_config(text, false);
    REQUIRE(lenient.warnings.size() == 1);
    CHECK(lenient.warnings[0].find("purifier.colour") != std::string::npos);
    CHECK(lenient.config.purifier.lambda == 0.5);
}

TEST_CASE("comments, whitespace and lists") {
    const auto c = parse_config("  [sweep]   # budgets\n"
                                "lambdas=0.5 ,1   # two\n"
                                "\t methods = EM\n"
                                "[attack]\n"
                                "step_size = auto\n"
                                "eps = 0.25\n")
                       .config;
    CHECK(c.sweep.lambdas == std::vector<double>{0.5, 1.0});
    CHECK(c.sweep.methods == std::vector<SolverMethod>{SolverMethod::EulerMaruyama});
    CHECK_FALSE(c.attack.step_size.has_value());
    CHECK(c.attack.eps == 0.25);
    const auto spec = c.attack.resolve(9.0);
    CHECK(spec.eps == 0.25);
    CHECK(spec.step_size == doctest::Approx(0.025));
}

TEST_CASE("experiment names") {
    for (const char* name : {"lambda-sweep", "time-sweep", "solver-compare", "theory", "attack-eval", "step-sweep"})
        CHECK(to_string(parse_experiment_kind(name)) == name);
    CHECK_THROWS(parse_experiment_kind("everything"));
}
