#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "adalab/harness.hpp"

using namespace adalab;

TEST_CASE("config round-trips through json") {
    ExperimentConfig cfg;
    cfg.experiment = "attack";
    cfg.oracle = "empirical";
    cfg.m = 8;
    cfg.seed = 123;
    cfg.eps = 0.01;
    const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    REQUIRE(back.experiment == "attack");
    REQUIRE(back.oracle == "empirical");
    REQUIRE(back.m == 8);
    REQUIRE(back.seed == 123);
    REQUIRE(back.eps == 0.01);
    REQUIRE(back.hash() == cfg.hash());

    // missing fields take defaults
    const ExperimentConfig sparse = ExperimentConfig::from_json(nlohmann::json{{"m", 4}});
    REQUIRE(sparse.m == 4);
    REQUIRE(sparse.T == ExperimentConfig{}.T);
}

TEST_CASE("config hash is sensitive to every field it covers") {
    ExperimentConfig a, b;
    b.eta = a.eta * 2.0;
    REQUIRE(a.hash() != b.hash());
    ExperimentConfig c;
    REQUIRE(a.hash() == c.hash());
}

TEST_CASE("config validation names the violated constraint") {
    ExperimentConfig cfg;
    cfg.experiment = "simulate";
    cfg.a = 0.5;
    REQUIRE_THROWS_WITH(cfg.validate(),
                        Catch::Matchers::ContainsSubstring("a <= 1/16"));

    ExperimentConfig cap;
    cap.experiment = "attack";
    cap.m = 1000;
    cap.pad_horizon_cap = 100;
    REQUIRE_THROWS_WITH(cap.validate(), Catch::Matchers::ContainsSubstring("cap"));

    ExperimentConfig bad_oracle;
    bad_oracle.oracle = "psychic";
    REQUIRE_THROWS(bad_oracle.validate());
}

TEST_CASE("result tables enforce shape and emit provenance") {
    ResultTable t;
    t.columns = {"x", "y"};
    t.config_hash = "abc";
    t.seed = 7;
    t.add_row({1.0, 2.0});
    REQUIRE_THROWS(t.add_row({1.0}));
    std::ostringstream os;
    t.write_csv(os);
    const std::string csv = os.str();
    REQUIRE(csv.find("# config_hash=abc seed=7") == 0);
    REQUIRE(csv.find("x,y\n") != std::string::npos);
    REQUIRE(csv.find("1,2\n") != std::string::npos);
}

TEST_CASE("experiments are deterministic given their config") {
    ExperimentConfig cfg;
    cfg.experiment = "simulate";
    cfg.T = 1;
    cfg.trials = 3;
    const ExperimentOutcome a = run_experiment(cfg);
    const ExperimentOutcome b = run_experiment(cfg);
    REQUIRE(a.accept == b.accept);
    REQUIRE(a.table.rows == b.table.rows);
}

TEST_CASE("depth-1 simulation experiment accepts under the truthful oracle") {
    ExperimentConfig cfg;
    cfg.experiment = "simulate";
    cfg.T = 1;
    cfg.trials = 10;
    const ExperimentOutcome out = run_experiment(cfg);
    REQUIRE(out.accept);
    REQUIRE(out.table.rows.size() == 10 * 2); // one verdict per round
}

TEST_CASE("attack experiment accepts for both reference oracles") {
    ExperimentConfig cfg;
    cfg.experiment = "attack";
    cfg.m = 8;
    cfg.trials = 4;
    cfg.oracle = "truthful";
    REQUIRE(run_experiment(cfg).accept);
    cfg.oracle = "empirical";
    REQUIRE(run_experiment(cfg).accept);
}

TEST_CASE("reduction experiment accepts at small scale") {
    ExperimentConfig cfg;
    cfg.experiment = "reduce";
    cfg.trials = 3;
    cfg.k = 4;
    cfg.T = 3;
    const ExperimentOutcome out = run_experiment(cfg);
    REQUIRE(out.accept);
    for (const Vec& row : out.table.rows) {
        REQUIRE(row[1] <= 1e-9);                      // exact_max_err
        REQUIRE(row[2] <= 2.0 * cfg.eps + 1e-12);     // noisy_max_rms
    }
}

TEST_CASE("verify experiment accepts the full function suite") {
    ExperimentConfig cfg;
    cfg.experiment = "verify";
    const ExperimentOutcome out = run_experiment(cfg);
    INFO(out.message);
    REQUIRE(out.accept);
}

TEST_CASE("unknown experiment is rejected") {
    ExperimentConfig cfg;
    cfg.experiment = "frobnicate";
    REQUIRE_THROWS(run_experiment(cfg));
}
