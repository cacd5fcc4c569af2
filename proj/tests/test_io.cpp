#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "phasemod/config.hpp"
#include "phasemod/grid_io.hpp"

using namespace phasemod;
using doctest::Approx;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = temp_path(name);
    std::ofstream out(path);
    out << text;
    return path;
}

} // namespace

TEST_CASE("bundled sweet-spot first-order profile carries the drive parameters") {
    const ExperimentConfig cfg = parse_config_text("{}");
    CHECK(cfg.pulse1.omega_p == Approx(0.0708));
    CHECK(cfg.pulse2.omega_p == Approx(0.0708));
    CHECK(cfg.pulse1.phi_tilde == Approx(0.08));
    CHECK(cfg.pulse2.phi_tilde == Approx(0.13));
    CHECK(cfg.pulse1.phi_bar == 0.0);
    CHECK(cfg.system.g == Approx(0.0105));
    REQUIRE(cfg.coupler.has_value());
    CHECK(cfg.coupler->flux_c == Approx(0.093));
    CHECK(cfg.coupler->g_1c == Approx(0.115));
}

TEST_CASE("profiles reproduce the chip frequencies") {
    const ExperimentConfig cfg = parse_config_text("{}");
    CHECK(qubit_frequency(cfg.system.q1, 0.0) == Approx(5.477).epsilon(2e-4));
    CHECK(qubit_frequency(cfg.system.q2, 0.0) == Approx(5.401).epsilon(2e-4));
    CHECK(qubit_frequency(cfg.coupler->coupler, 0.0) == Approx(5.390).epsilon(2e-4));
    for (const std::string& name : bundled_profile_names())
        CHECK_NOTHROW(bundled_profile(name));
    CHECK_THROWS_AS(bundled_profile("nope"), config_error);
}

TEST_CASE("config parsing errors name the field and constraint") {
    SUBCASE("flux domain invariant") {
        const std::string text = R"({"pulse1": {"phi_tilde": 0.6}})";
        CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("0.5"), config_error);
    }
    SUBCASE("typed field violation") {
        const std::string text = R"({"system": {"q1": {"e_c": "fast"}}})";
        CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("system.q1.e_c"),
                             config_error);
    }
    SUBCASE("missing required field on the bare profile") {
        CHECK_THROWS_AS(parse_config_text("{}", "bare"), config_error);
    }
    SUBCASE("malformed json") {
        CHECK_THROWS_AS(parse_config_text("{oops", "bare"), config_error);
    }
    SUBCASE("transmon regime invariant") {
        const std::string text = R"({"system": {"q1": {"e_j1": 0.5, "e_j2": 0.5}}})";
        CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("transmon regime"),
                             config_error);
    }
}

TEST_CASE("coupler block is optional and removable") {
    const std::string no_coupler = R"({"coupler": null})";
    const ExperimentConfig cfg = parse_config_text(no_coupler);
    CHECK_FALSE(cfg.coupler.has_value());

    // bare profile with a fully specified config and no coupler at all
    const std::string full = R"({
        "experiment": "phase-sweep",
        "system": {
            "q1": {"e_c": 0.24, "e_j1": 8.5, "e_j2": 8.5, "anharmonicity": -0.25},
            "q2": {"e_c": 0.24, "e_j1": 8.3, "e_j2": 8.3, "anharmonicity": -0.25},
            "g": 0.01, "levels": 3
        },
        "pulse1": {"phi_bar": 0.0, "phi_tilde": 0.08, "omega_p": 0.07, "phi_p": 0.0},
        "pulse2": {"phi_bar": 0.0, "phi_tilde": 0.13, "omega_p": 0.07, "phi_p": 0.0},
        "sweep": {"axis": "dphi", "start": 0.0, "stop": 6.0, "points": 13}
    })";
    const ExperimentConfig bare = parse_config_text(full, "bare");
    CHECK_FALSE(bare.coupler.has_value());
    CHECK(bare.sweep.points == 13);
}

TEST_CASE("parse_config reads files and rejects missing ones") {
    const std::string path = write_temp("phasemod_cfg.json", R"({"order": 2})");
    const ExperimentConfig cfg = parse_config(path);
    CHECK(cfg.order == 2);
    CHECK_THROWS_AS(parse_config(temp_path("phasemod_missing.json")), config_error);
    std::remove(path.c_str());
}

TEST_CASE("config hash identifies the effective run") {
    ExperimentConfig a = parse_config_text("{}");
    ExperimentConfig b = parse_config_text(R"({"order": 2})");
    CHECK(config_hash(a) == config_hash(a));
    CHECK(config_hash(a) != config_hash(b));

    // the canonical dump itself re-parses to the same effective config
    const ExperimentConfig c = parse_config_text(canonical_config(a), "bare");
    CHECK(config_hash(c) == config_hash(a));
}

TEST_CASE("grid round trip is exact") {
    SweepGrid grid;
    grid.x_name = "delta_phi_p[rad]";
    grid.y_name = "time[s]";
    grid.x = {0.0, 0.1234567890123456, 3.3333333333333335};
    grid.y = {1e-9, 2e-9};
    grid.z = {{0.1, 0.9999999999999999}, {1e-300, 2e17}, {0.5, -0.25}};
    grid.summary = {{0.0, 0.0021, 1e-4, 0, 0.002}, {0.1234567890123456, 0.0, 0.0, 1, 0.0}};
    grid.metadata["config_hash"] = "deadbeefdeadbeef";
    grid.metadata["config"] = R"({"experiment":"phase-sweep","order":1})";

    const std::string path = temp_path("phasemod_grid.csv");
    write_grid(grid, path);
    const SweepGrid back = read_grid(path);
    CHECK(back.x == grid.x);
    CHECK(back.y == grid.y);
    CHECK(back.z == grid.z);
    CHECK(back.x_name == grid.x_name);
    CHECK(back.metadata.at("config_hash") == "deadbeefdeadbeef");
    CHECK(back.metadata.at("config") == grid.metadata.at("config"));
    REQUIRE(back.summary.size() == 2);
    CHECK(back.summary[0].value == grid.summary[0].value);
    CHECK(back.summary[1].flag == 1);
    std::remove(path.c_str());
    std::remove(temp_path("phasemod_grid.summary.csv").c_str());
}

TEST_CASE("write_grid surfaces io failures with the path") {
    SweepGrid grid;
    grid.x = {1.0};
    grid.y = {0.0};
    grid.z = {{0.5}};
    CHECK_THROWS_WITH_AS(write_grid(grid, "/nonexistent_dir/grid.csv"),
                         doctest::Contains("/nonexistent_dir/grid.csv"), io_error);
    CHECK_THROWS_AS(read_grid("/nonexistent_dir/grid.csv"), io_error);
}

TEST_CASE("empty grid writes a header-only file") {
    SweepGrid grid;
    grid.x_name = "x";
    grid.y_name = "y";
    const std::string path = temp_path("phasemod_empty.csv");
    write_grid(grid, path);
    const SweepGrid back = read_grid(path);
    CHECK(back.x.empty());
    CHECK(back.y.empty());
    CHECK(back.z.empty());
    std::remove(path.c_str());
    std::remove(temp_path("phasemod_empty.summary.csv").c_str());
}

TEST_CASE("metadata hash recomputes from the embedded config") {
    // the output carries the canonical config; hashing it again must match
    ExperimentConfig cfg = parse_config_text(R"({"sweep": {"points": 3, "stop": 1.0}})");
    SweepGrid grid;
    grid.x = {1.0};
    grid.y = {0.0};
    grid.z = {{0.5}};
    grid.metadata["config"] = canonical_config(cfg);
    grid.metadata["config_hash"] = config_hash(cfg);
    const std::string path = temp_path("phasemod_meta.csv");
    write_grid(grid, path);
    const SweepGrid back = read_grid(path);
    CHECK(fnv1a_hex(back.metadata.at("config")) == back.metadata.at("config_hash"));
    std::remove(path.c_str());
    std::remove(temp_path("phasemod_meta.summary.csv").c_str());
}

TEST_CASE("transfer table validation") {
    TransferTable good{{{0.1, 1.0}, {0.2, 0.8}}};
    CHECK_NOTHROW(good.validate());
    CHECK(good.factor_at(0.15) == Approx(0.9));
    CHECK_THROWS_AS(good.factor_at(0.05), config_error);

    TransferTable unordered{{{0.2, 1.0}, {0.1, 0.8}}};
    CHECK_THROWS_AS(unordered.validate(), config_error);
    TransferTable bad_factor{{{0.1, 1.0}, {0.2, 1.3}}};
    CHECK_THROWS_AS(bad_factor.validate(), config_error);

    const std::string path =
        write_temp("phasemod_transfer.csv", "# omega_p, factor\n0.1, 1.0\n0.2, 0.9\n0.3, 0.7\n");
    const TransferTable table = read_transfer_table(path);
    CHECK(table.rows.size() == 3);
    CHECK(table.factor_at(0.25) == Approx(0.8));
    std::remove(path.c_str());
}
