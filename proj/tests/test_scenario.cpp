#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phaseloop/grid_potential.hpp"
#include "phaseloop/scenario.hpp"

using namespace phaseloop;

namespace {

json desk_config() {
    return json::parse(R"({
      "geometry": {"type": "mach_zehnder", "T_s": 1.0, "k_rad_per_m": 10.0, "g_m_per_s2": 0.0},
      "constants": {"mass_kg": 1.0, "hbar_Js": 1.0},
      "potential": {"type": "polynomial",
                    "cubic_J_per_m3": [0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,6e-6]},
      "state": {"type": "trap_ground", "omega_rad_per_s": [0.5, 0.5, 0.5]},
      "engine": {"validity_action": "override"}
    })");
}

const char* kShipped[] = {"scenarios/null_potential.json", "scenarios/mz_cubic_si.json",
                          "scenarios/desk_quantum_check.json",
                          "scenarios/desk_quantum_wide.json", "scenarios/fig4_sweep.json",
                          "scenarios/table_scales_gravity.json"};

}  // namespace

TEST_CASE("configuration validation") {
    SUBCASE("unknown keys are rejected with their location") {
        json cfg = desk_config();
        cfg["geometry"]["T_seconds"] = 1.0;
        CHECK_THROWS_WITH_AS(build_scenario(cfg), doctest::Contains("T_seconds"), ConfigError);
    }
    SUBCASE("missing required keys are named") {
        json cfg = desk_config();
        cfg["geometry"].erase("T_s");
        CHECK_THROWS_WITH_AS(build_scenario(cfg), doctest::Contains("T_s"), ConfigError);
    }
    SUBCASE("explicit pulse-list geometry round-trips through the builder") {
        json cfg = desk_config();
        cfg["geometry"] = json::parse(R"({
          "type": "pulses", "t_initial_s": 0.0, "t_detect_s": 2.0,
          "gravity_m_per_s2": [0, 0, -0.5],
          "pulses": [
            {"t_s": 0.0, "k_upper_rad_per_m": [0, 0, 3.0]},
            {"t_s": 1.0, "k_upper_rad_per_m": [0, 0, -3.0], "k_lower_rad_per_m": [0, 0, 3.0]},
            {"t_s": 2.0, "k_lower_rad_per_m": [0, 0, -3.0]}
          ]})");
        Scenario sc = build_scenario(cfg);
        CHECK(closure_check(sc.seq).closed);
        CHECK(phi0(sc.seq) == doctest::Approx(-3.0 * 0.5).epsilon(1e-12));
    }
}

TEST_CASE("canonical serialization is idempotent for the shipped scenarios") {
    for (const char* path : kShipped) {
        CAPTURE(path);
        std::ifstream in(path);
        REQUIRE(in.good());
        const json raw = json::parse(in);
        const std::string once = build_scenario(raw).canonical.dump(2);
        const std::string twice = build_scenario(json::parse(once)).canonical.dump(2);
        CHECK(once == twice);
    }
}

TEST_CASE("deterministic results") {
    Scenario sc = build_scenario(desk_config());
    ScenarioResult a = run_scenario(sc, true, false);
    ScenarioResult b = run_scenario(sc, true, false);
    CHECK(result_to_json(sc, a).dump() == result_to_json(sc, b).dump());
}

TEST_CASE("null-potential scenario") {
    Scenario sc = load_scenario("scenarios/null_potential.json");
    ScenarioResult res = run_scenario(sc, true, false);
    CHECK(res.breakdown.phi1_classical == 0.0);
    CHECK(res.breakdown.phi1_wavepacket == 0.0);
    CHECK(res.breakdown.phi2 == 0.0);
    CHECK(res.breakdown.contrast == 1.0);
    CHECK(res.breakdown.phi0 == doctest::Approx(-1.61e7 * 9.81).epsilon(1e-12));
}

TEST_CASE("SI cubic scenario matches the closed-form bracket") {
    Scenario sc = load_scenario("scenarios/mz_cubic_si.json");
    ScenarioResult res = run_scenario(sc, true, false);
    const double vr = sc.seq.hbar * 1.61e7 / sc.seq.mass;
    MzCubicReference ref = mz_cubic_reference(1.0, vr, 9.81, 0.0, 2 * M_PI * 60.0, 6.371e6,
                                              sc.seq.mass);
    const double got = res.breakdown.phi1_classical + res.breakdown.phi1_wavepacket;
    CHECK(got == doctest::Approx(ref.phase_eq_bracket).epsilon(1e-8));
    // the configured d = 200 um yields the published orders of magnitude
    CHECK(std::log10(res.breakdown.validity.epsilon) == doctest::Approx(-12.0).epsilon(0.1));
    CHECK(std::log10(res.breakdown.validity.eta_d_over_xi) ==
          doctest::Approx(-9.0).epsilon(0.15));
}

TEST_CASE("hand-fed scale table column") {
    Scenario sc = load_scenario("scenarios/table_scales_gravity.json");
    ValidityReport rep = run_validity(sc);
    CHECK(rep.d_over_xi == 5e-4);
    CHECK(std::log10(rep.epsilon) == doctest::Approx(-8.0).epsilon(0.01));
    CHECK(std::log10(rep.eta_d_over_xi) == doctest::Approx(-4.0).epsilon(0.01));
    CHECK_FALSE(rep.refuse);
}

TEST_CASE("grid-backed scenario") {
    // sample a quadratic and run the engine through the grid path
    const std::string path = "build/test_grid_v.txt";
    {
        GridData g;
        g.axes = {2};
        g.n = {401};
        g.lo = {-30.0};
        g.hi = {2.0};
        for (int i = 0; i < 401; ++i) {
            const double z = -30.0 + 32.0 * i / 400.0;
            g.values.push_back(1e-30 * z * z);
        }
        std::ofstream out(path);
        write_grid(out, g);
    }
    json cfg = json::parse(R"({
      "geometry": {"type": "mach_zehnder", "T_s": 1.0, "k_rad_per_m": 1.61e7, "g_m_per_s2": 9.81},
      "constants": {"mass_kg": 1.44316060e-25},
      "potential": {"type": "grid", "path": ")" + path + R"("},
      "state": {"type": "trap_ground",
                "omega_rad_per_s": [376.99111843077515, 376.99111843077515, 188.49555921538757]},
      "engine": {"validity_action": "warn", "orders": 1}
    })");
    Scenario sc = build_scenario(cfg);
    ScenarioResult res = run_scenario(sc, true, false);
    // quadratic branch-independent potential: loop of V_zz <rr> cancels;
    // classical loop integral is m Gamma f-combination, nonzero
    CHECK(res.breakdown.phi1_classical != 0.0);
    CHECK(std::abs(res.breakdown.phi1_wavepacket) <
          1e-6 * std::abs(res.breakdown.phi1_classical));
}

TEST_CASE("sweep") {
    json cfg = desk_config();
    cfg["potential"]["scale"] = 1.0;

    SUBCASE("empty value list produces a header-only file") {
        const std::string csv = run_sweep(cfg, "/potential/scale", {});
        CHECK(csv.find("param_value,phi0_rad") != std::string::npos);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // comment + header
    }
    SUBCASE("first order is exactly linear in the strength") {
        const std::string csv = run_sweep(cfg, "/potential/scale", {1.0, 2.0, 4.0}, 2);
        std::istringstream is(csv);
        std::string line;
        std::getline(is, line);  // comment
        std::getline(is, line);  // header
        std::vector<double> phi1;
        while (std::getline(is, line)) {
            std::stringstream row(line);
            std::string cell;
            std::vector<double> cells;
            while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
            REQUIRE(cells.size() == 11);
            phi1.push_back(cells[2]);
        }
        REQUIRE(phi1.size() == 3);
        CHECK(phi1[1] == doctest::Approx(2.0 * phi1[0]).epsilon(1e-12));
        CHECK(phi1[2] == doctest::Approx(4.0 * phi1[0]).epsilon(1e-12));
    }
    SUBCASE("unknown parameter pointers are rejected") {
        CHECK_THROWS_AS(run_sweep(cfg, "/potential/missing", {1.0}), ConfigError);
    }
}

TEST_CASE("published-magnitude sweep over T") {
    std::ifstream in("scenarios/fig4_sweep.json");
    REQUIRE(in.good());
    const json cfg = json::parse(in);
    const std::string csv = run_sweep(cfg, "/geometry/T_s", {0.5, 1.0});
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        std::stringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
        rows.push_back(cells);
    }
    REQUIRE(rows.size() == 2);
    // at T = 1 s: |phi0| = k g T^2 ~ 1.6e8 rad; the wave-packet column sits
    // far below the first-order cubic column
    CHECK(std::abs(rows[1][1]) == doctest::Approx(1.579e8).epsilon(1e-3));
    CHECK(std::abs(rows[1][3]) < 1e-6 * std::abs(rows[1][2]));
    // both perturbative columns grow steeply with T
    CHECK(std::abs(rows[1][2]) > std::abs(rows[0][2]));
}
