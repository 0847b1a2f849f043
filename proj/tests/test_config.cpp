#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qcav/config.hpp"
#include "qcav/errors.hpp"

using namespace qcav;
using nlohmann::json;

TEST_SUITE("config") {

TEST_CASE("defaults derive the calibrated working point") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.seed == 1);
    CHECK(c.zpl_nm() == doctest::Approx(1274.9935522351225).epsilon(1e-14));
    CHECK(c.cavity.peak_enhancement == doctest::Approx(48.17235430481428).epsilon(1e-14));
    CHECK(c.detuning() == doctest::Approx(5.993552235122479).epsilon(1e-13));
    // Freshly fabricated cavity sits far off resonance: floor at unity.
    CHECK(c.effective_enhancement() == 1.0);

    c.tuning.lambda_nm = c.zpl_nm();
    CHECK(c.effective_enhancement() == doctest::Approx(48.17235430481428).epsilon(1e-14));
    c.simulation.enhancement = 7.5;
    CHECK(c.effective_enhancement() == 7.5);

    const DetectorModel det = c.detector.model();
    CHECK(det.dead_time_ps == 50000.0);
    CHECK(det.jitter_sigma_ps == 100.0);
}

TEST_CASE("unknown keys are rejected everywhere") {
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"bogus", 2}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"cavity", {{"q", 3209}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"emitter", {{"pump", 0.1}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"simulation", {{"pulses", 10}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"output", {{"dir", "x"}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::array()), std::invalid_argument);
}

TEST_CASE("seed is mandatory") {
    CHECK_THROWS_AS(config_from_json(json::object()), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"zpl_mev", 900.0}}), std::invalid_argument);
    CHECK_NOTHROW(config_from_json(json{{"seed", 7}}));
}

TEST_CASE("json round trip preserves every field") {
    RunConfig c;
    c.seed = 42;
    c.zpl_mev = 975.0;
    c.emitter.pump_rate = 0.02;
    c.cavity.quality_factor = 2800.0;
    c.tuning.lambda_nm = 1272.5;
    c.detector.jitter_ps = 80.0;
    c.simulation.mode = "pulsed";
    c.simulation.n_pulses = 123456;
    c.lattice.eps_background = 12.11;
    c.output.ndjson = true;

    const json j = config_to_json(c);
    const RunConfig c2 = config_from_json(j);
    CHECK(c2.seed == c.seed);
    CHECK(c2.zpl_mev == c.zpl_mev);
    CHECK(c2.emitter.pump_rate == c.emitter.pump_rate);
    CHECK(c2.cavity.quality_factor == c.cavity.quality_factor);
    CHECK(c2.cavity.peak_enhancement == c.cavity.peak_enhancement);
    CHECK(c2.tuning.lambda_nm == c.tuning.lambda_nm);
    CHECK(c2.detector.jitter_ps == c.detector.jitter_ps);
    CHECK(c2.simulation.mode == c.simulation.mode);
    CHECK(c2.simulation.n_pulses == c.simulation.n_pulses);
    CHECK(c2.lattice.eps_background == c.lattice.eps_background);
    CHECK(c2.output.ndjson == c.output.ndjson);
    CHECK(config_to_json(c2) == j);
}

TEST_CASE("peak enhancement comes from the lifetime target unless pinned") {
    const RunConfig calibrated = config_from_json(json{{"seed", 1}});
    CHECK(calibrated.cavity.peak_enhancement == doctest::Approx(48.17235430481428).epsilon(1e-14));

    const RunConfig pinned =
        config_from_json(json{{"seed", 1}, {"cavity", {{"peak_enhancement", 30.0}}}});
    CHECK(pinned.cavity.peak_enhancement == 30.0);

    const RunConfig retarget = config_from_json(json{{"seed", 1}, {"tau_on_target_ns", 13.4}});
    CHECK(retarget.cavity.peak_enhancement
          == doctest::Approx(calibrate_peak_enhancement(retarget.emitter, 13.4)).epsilon(1e-14));
}

TEST_CASE("config hash is stable and key sensitive") {
    RunConfig c;
    CHECK(config_hash(c) == "947f5d3e3ad3d36c");
    CHECK(config_hash(c) == config_hash(c));
    c.seed = 2;
    CHECK(config_hash(c) == "1cc88857e6b54cc9");
    CHECK(config_hash(c).size() == 16);
}

TEST_CASE("config file loading") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qcav_config_test";
    fs::create_directories(dir);
    const fs::path good = dir / "good.json";
    {
        std::ofstream out(good);
        out << R"({"seed": 9, "tuning": {"lambda_nm": 1271.0}})";
    }
    const RunConfig c = load_config(good);
    CHECK(c.seed == 9);
    CHECK(c.tuning.lambda_nm == 1271.0);

    CHECK_THROWS_AS(load_config(dir / "missing.json"), std::invalid_argument);
    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << "{not json";
    }
    CHECK_THROWS_AS(load_config(bad), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("validation rejects out of range configs") {
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"simulation", {{"mode", "strobed"}}}}),
                    std::domain_error);
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"simulation", {{"excitation_prob", 1.5}}}}),
                    std::domain_error);
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"simulation", {{"shards", 0}}}}),
                    std::domain_error);
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"detector", {{"dead_time_ns", -1.0}}}}),
                    std::domain_error);
    CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"lattice", {{"hole_radius_ratio", 0.7}}}}),
                    std::domain_error);
}

TEST_CASE("generic fit entry point") {
    json problem;
    problem["model"] = "linear";
    problem["x"] = {0.0, 1.0, 2.0, 3.0, 4.0};
    problem["y"] = {-2.0, 1.0, 4.0, 7.0, 10.0};
    const json out = run_fit_problem(problem);
    CHECK(out.at("converged").get<bool>());
    CHECK(out.at("model") == "linear");
    CHECK(out.at("param_names") == json({"slope", "intercept"}));
    CHECK(out.at("params")[0].get<double>() == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(out.at("params")[1].get<double>() == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(out.at("chi2").get<double>() < 1e-15);
    CHECK(out.at("covariance").size() == 2);
    CHECK(out.at("covariance")[0].size() == 2);
    CHECK(out.at("dof").get<int>() == 3);

    // Bounds pass through to the solver.
    json bounded = problem;
    bounded["y"] = {0.0, 0.3, 0.6, 0.9, 1.2};
    bounded["bounds"] = json::array({json::array({0.5, 2.0}), nullptr});
    const json clamped = run_fit_problem(bounded);
    CHECK(clamped.at("params")[0].get<double>() == doctest::Approx(0.5).epsilon(1e-4));

    // Exponential auto-init from the data.
    json expo;
    expo["model"] = "exponential";
    json::array_t xs, ys;
    for (int i = 0; i < 200; ++i) {
        const double t = 0.1 * i;
        xs.push_back(t);
        ys.push_back(900.0 * std::exp(-t / 4.0) + 10.0);
    }
    expo["x"] = xs;
    expo["y"] = ys;
    const json efit = run_fit_problem(expo);
    CHECK(efit.at("converged").get<bool>());
    CHECK(efit.at("params")[1].get<double>() == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("fit entry point error paths") {
    CHECK_THROWS_AS(run_fit_problem(json{{"model", "spline"}, {"x", {1, 2}}, {"y", {1, 2}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_fit_problem(json{{"x", {1, 2}}, {"y", {1, 2}}}), std::invalid_argument);
    CHECK_THROWS_AS(run_fit_problem(json{{"model", "linear"}, {"x", {1, 2}}, {"y", {1}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_fit_problem(json{{"model", "linear"}, {"x", {1, 2}}, {"y", {1, 2}},
                                         {"init", {1.0}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_fit_problem(json{{"model", "linear"}, {"x", {1, 2}}, {"y", {1, 2}},
                                         {"bounds", json::array({nullptr})}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_fit_problem(json{{"model", "fano"},
                                         {"x", {1, 2, 3, 4, 5, 6}},
                                         {"y", {1, 2, 3, 2, 1, 1}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_fit_problem(json{{"model", "linear"}, {"x", {1, 2}}, {"y", {1, 2}},
                                         {"extra", 1}}),
                    std::invalid_argument);
}

TEST_CASE("seventeen digit serialization round trips") {
    CHECK(g17(0.1) == "0.10000000000000001");
    CHECK(g17(1.0) == "1");
    for (const double v : {48.17235430481428, 0.0008121969427707851, 1274.9935522351225, -0.23}) {
        CHECK(std::stod(g17(v)) == v);
    }
}

}
