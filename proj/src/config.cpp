#include "phasemod/config.hpp"

#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "phasemod/grid_io.hpp"
#include "phasemod/version.hpp"

namespace phasemod {

namespace {

using nlohmann::json;

constexpr double two_pi = 2.0 * std::numbers::pi;

// --- paper-device constants --------------------------------------------------
// Junction energies are solved so the square-root dispersion lands on the
// device sweet-spot frequencies (5.477 / 5.401 / 5.390 GHz).

json device_q1() {
    return {{"e_c", 0.240}, {"e_j1", 8.51148}, {"e_j2", 8.51148}, {"anharmonicity", -0.248}};
}
json device_q2() {
    return {{"e_c", 0.240}, {"e_j1", 8.286}, {"e_j2", 8.286}, {"anharmonicity", -0.248}};
}
json device_coupler() {
    return {{"e_c", 0.184},         {"e_j1", 10.55376}, {"e_j2", 10.55376},
            {"anharmonicity", -0.184}, {"g_1c", 0.115},    {"g_2c", 0.078},
            {"g_12", 0.0075},       {"flux_c", 0.093}};
}

json device_system() {
    return {{"q1", device_q1()}, {"q2", device_q2()}, {"g", 0.0105}, {"levels", 3}};
}

json dphi_sweep(int points = 25) {
    return {{"axis", "dphi"}, {"start", 0.0}, {"stop", two_pi * (points - 1) / points},
            {"points", points}};
}

json profile_paper_device() {
    // sweet-spot first-order configuration of the main-text phase sweep
    return {{"experiment", "phase-sweep"},
            {"system", device_system()},
            {"pulse1", {{"phi_bar", 0.0}, {"phi_tilde", 0.08}, {"omega_p", 0.0708}, {"phi_p", 0.0}}},
            {"pulse2", {{"phi_bar", 0.0}, {"phi_tilde", 0.13}, {"omega_p", 0.0708}, {"phi_p", 0.0}}},
            {"coupler", device_coupler()},
            {"order", 1},
            {"sweep", dphi_sweep()},
            {"retune", true},
            {"workers", 1}};
}

json profile_off_sweet() {
    json p = profile_paper_device();
    p["pulse1"] = {{"phi_bar", 0.064}, {"phi_tilde", 0.08}, {"omega_p", 0.17864}, {"phi_p", 0.0}};
    p["pulse2"] = {{"phi_bar", 0.1025}, {"phi_tilde", 0.08}, {"omega_p", 0.17864}, {"phi_p", 0.0}};
    return p;
}

json profile_param_res_sweet() {
    json p = profile_paper_device();
    p["experiment"] = "param-res";
    p["order"] = 0;
    p["pulse1"] = {{"phi_bar", 0.0}, {"phi_tilde", 0.174}, {"omega_p", 0.110}, {"phi_p", 0.0}};
    p["pulse2"] = {{"phi_bar", 0.0}, {"phi_tilde", 0.1}, {"omega_p", 0.110}, {"phi_p", 0.0}};
    return p;
}

json profile_param_res_off_sweet() {
    json p = profile_paper_device();
    p["experiment"] = "param-res";
    p["order"] = 0;
    p["pulse1"] = {{"phi_bar", 0.119}, {"phi_tilde", 0.1235}, {"omega_p", 0.290}, {"phi_p", 0.0}};
    p["pulse2"] = {{"phi_bar", 0.1025}, {"phi_tilde", 0.05}, {"omega_p", 0.290}, {"phi_p", 0.0}};
    return p;
}

json profile_amplitude_sweep() {
    json p = profile_paper_device();
    p["experiment"] = "amp-coupling";
    // the lower qubit is driven; with the square-root dispersion the q1 drive
    // branch degenerates (Delta_bar crosses zero inside the swept range)
    p["pulse1"] = {{"phi_bar", 0.119}, {"phi_tilde", 0.0}, {"omega_p", 0.0}, {"phi_p", 0.0}};
    p["pulse2"] = {{"phi_bar", 0.1025}, {"phi_tilde", 0.02}, {"omega_p", 0.1}, {"phi_p", 0.0}};
    p["sweep"] = {{"axis", "phi_tilde"}, {"start", 0.02}, {"stop", 0.12}, {"points", 6}};
    return p;
}

json profile_coupler_sweep() {
    json p = profile_paper_device();
    p["experiment"] = "coupler-sweep";
    // qubits biased to a common resonance below the coupler band
    TransmonParams q1{0.240, 8.51148, 8.51148, -0.248};
    TransmonParams q2{0.240, 8.286, 8.286, -0.248};
    const double resonance = 3.95;
    p["pulse1"] = {{"phi_bar", flux_for_frequency(q1, resonance)},
                   {"phi_tilde", 0.0},
                   {"omega_p", 0.0},
                   {"phi_p", 0.0}};
    p["pulse2"] = {{"phi_bar", flux_for_frequency(q2, resonance)},
                   {"phi_tilde", 0.0},
                   {"omega_p", 0.0},
                   {"phi_p", 0.0}};
    p["sweep"] = {{"axis", "flux_c"}, {"start", 0.02}, {"stop", 0.27}, {"points", 26}};
    return p;
}

json profile_expansion_comparison() {
    json p = profile_paper_device();
    p["experiment"] = "taylor-fourier";
    // both qubits use the expansion-comparison transmon (E_C 240 MHz, E_J 8.286 GHz)
    p["system"]["q1"] = device_q2();
    p["pulse1"] = {{"phi_bar", 0.0}, {"phi_tilde", 0.4}, {"omega_p", 0.1}, {"phi_p", 0.0}};
    p["pulse2"] = {{"phi_bar", 0.15}, {"phi_tilde", 0.3}, {"omega_p", 0.1}, {"phi_p", 0.0}};
    p["sweep"] = {{"axis", "order"}, {"start", 1.0}, {"stop", 10.0}, {"points", 10}};
    return p;
}

json profile_single_qubit_spectrum() {
    json p = profile_paper_device();
    p["experiment"] = "spectrum";
    p["pulse1"] = {{"phi_bar", 0.0}, {"phi_tilde", 0.01}, {"omega_p", 0.0792}, {"phi_p", 0.0}};
    p["sweep"] = {{"axis", "phi_tilde"}, {"start", 0.005}, {"stop", 0.13}, {"points", 26}};
    return p;
}

json profile_json(const std::string& name) {
    if (name == "bare") return json::object();
    if (name == "paper-device") return profile_paper_device();
    if (name == "off-sweet-first-order") return profile_off_sweet();
    if (name == "param-res-sweet") return profile_param_res_sweet();
    if (name == "param-res-off-sweet") return profile_param_res_off_sweet();
    if (name == "amplitude-sweep") return profile_amplitude_sweep();
    if (name == "coupler-sweep") return profile_coupler_sweep();
    if (name == "expansion-comparison") return profile_expansion_comparison();
    if (name == "single-qubit-spectrum") return profile_single_qubit_spectrum();
    throw config_error("unknown profile '" + name + "'");
}

// --- extraction with field-naming errors --------------------------------------

double num_at(const json& j, const std::string& path, const std::string& key,
              std::optional<double> fallback = {}) {
    if (!j.contains(key) || j.at(key).is_null()) {
        if (fallback) return *fallback;
        throw config_error("config field '" + path + "." + key + "': required number missing");
    }
    const json& v = j.at(key);
    if (!v.is_number())
        throw config_error("config field '" + path + "." + key + "': must be a number");
    return v.get<double>();
}

int int_at(const json& j, const std::string& path, const std::string& key, int fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        throw config_error("config field '" + path + "." + key + "': must be an integer");
    return v.get<int>();
}

TransmonParams parse_transmon(const json& j, const std::string& path) {
    if (!j.is_object()) throw config_error("config field '" + path + "': must be an object");
    TransmonParams p;
    p.e_c = num_at(j, path, "e_c");
    p.e_j1 = num_at(j, path, "e_j1");
    p.e_j2 = num_at(j, path, "e_j2");
    p.anharmonicity = num_at(j, path, "anharmonicity");
    try {
        p.validate();
    } catch (const domain_error& e) {
        throw config_error("config field '" + path + "': " + e.what());
    }
    return p;
}

FluxPulse parse_pulse(const json& j, const std::string& path) {
    if (!j.is_object()) throw config_error("config field '" + path + "': must be an object");
    FluxPulse p;
    p.phi_bar = num_at(j, path, "phi_bar", 0.0);
    p.phi_tilde = num_at(j, path, "phi_tilde", 0.0);
    p.omega_p = num_at(j, path, "omega_p", 0.0);
    p.phi_p = num_at(j, path, "phi_p", 0.0);
    try {
        p.validate();
    } catch (const domain_error& e) {
        throw config_error("config field '" + path + "': " + e.what());
    }
    return p;
}

AxisSpec parse_axis(const json& j, const std::string& path, const std::string& default_name) {
    if (!j.is_object()) throw config_error("config field '" + path + "': must be an object");
    AxisSpec a;
    a.name = j.value("axis", default_name);
    a.start = num_at(j, path, "start");
    a.stop = num_at(j, path, "stop");
    a.points = int_at(j, path, "points", 0);
    if (a.points < 1)
        throw config_error("config field '" + path + ".points': must be a positive integer");
    return a;
}

ExperimentConfig from_json(const json& j) {
    ExperimentConfig cfg;
    if (!j.contains("experiment") || !j.at("experiment").is_string())
        throw config_error("config field 'experiment': required string missing");
    cfg.experiment = j.at("experiment").get<std::string>();

    if (!j.contains("system")) throw config_error("config field 'system': required object missing");
    const json& sys = j.at("system");
    if (!sys.contains("q1") || !sys.contains("q2"))
        throw config_error("config fields 'system.q1'/'system.q2': required objects missing");
    cfg.system.q1 = parse_transmon(sys.at("q1"), "system.q1");
    cfg.system.q2 = parse_transmon(sys.at("q2"), "system.q2");
    cfg.system.alpha1 = cfg.system.q1.anharmonicity;
    cfg.system.alpha2 = cfg.system.q2.anharmonicity;
    cfg.system.g = num_at(sys, "system", "g");
    cfg.system.levels = int_at(sys, "system", "levels", 3);
    try {
        cfg.system.validate();
    } catch (const domain_error& e) {
        throw config_error(std::string("config field 'system': ") + e.what());
    }

    if (!j.contains("pulse1") || !j.contains("pulse2"))
        throw config_error("config fields 'pulse1'/'pulse2': required objects missing");
    cfg.pulse1 = parse_pulse(j.at("pulse1"), "pulse1");
    cfg.pulse2 = parse_pulse(j.at("pulse2"), "pulse2");

    if (j.contains("coupler") && !j.at("coupler").is_null()) {
        const json& cj = j.at("coupler");
        CouplerParams c;
        c.coupler = parse_transmon(cj, "coupler");
        c.g_1c = num_at(cj, "coupler", "g_1c");
        c.g_2c = num_at(cj, "coupler", "g_2c");
        c.g_12 = num_at(cj, "coupler", "g_12", 0.0);
        c.flux_c = num_at(cj, "coupler", "flux_c");
        try {
            c.validate();
        } catch (const domain_error& e) {
            throw config_error(std::string("config field 'coupler': ") + e.what());
        }
        cfg.coupler = c;
    }

    if (!j.contains("sweep")) throw config_error("config field 'sweep': required object missing");
    cfg.sweep = parse_axis(j.at("sweep"), "sweep", "dphi");
    if (j.contains("probe") && !j.at("probe").is_null())
        cfg.probe = parse_axis(j.at("probe"), "probe", "probe");

    cfg.order = int_at(j, "config", "order", 1);
    if (j.contains("time") && !j.at("time").is_null()) {
        cfg.t_final = num_at(j.at("time"), "time", "t_final", 0.0);
        cfg.dt = num_at(j.at("time"), "time", "dt", 0.0);
    }
    if (j.contains("retune")) {
        if (!j.at("retune").is_boolean())
            throw config_error("config field 'retune': must be a boolean");
        cfg.retune = j.at("retune").get<bool>();
    }
    cfg.workers = int_at(j, "config", "workers", 1);

    try {
        cfg.validate();
    } catch (const domain_error& e) {
        throw config_error(std::string("config invariant: ") + e.what());
    }
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    auto tj = [](const TransmonParams& p) {
        return json{{"e_c", p.e_c},
                    {"e_j1", p.e_j1},
                    {"e_j2", p.e_j2},
                    {"anharmonicity", p.anharmonicity}};
    };
    auto pj = [](const FluxPulse& p) {
        return json{{"phi_bar", p.phi_bar},
                    {"phi_tilde", p.phi_tilde},
                    {"omega_p", p.omega_p},
                    {"phi_p", p.phi_p}};
    };
    j["system"] = {{"q1", tj(cfg.system.q1)},
                   {"q2", tj(cfg.system.q2)},
                   {"g", cfg.system.g},
                   {"levels", cfg.system.levels}};
    j["pulse1"] = pj(cfg.pulse1);
    j["pulse2"] = pj(cfg.pulse2);
    if (cfg.coupler) {
        json cj = tj(cfg.coupler->coupler);
        cj["g_1c"] = cfg.coupler->g_1c;
        cj["g_2c"] = cfg.coupler->g_2c;
        cj["g_12"] = cfg.coupler->g_12;
        cj["flux_c"] = cfg.coupler->flux_c;
        j["coupler"] = cj;
    }
    j["order"] = cfg.order;
    j["sweep"] = {{"axis", cfg.sweep.name},
                  {"start", cfg.sweep.start},
                  {"stop", cfg.sweep.stop},
                  {"points", cfg.sweep.points}};
    if (cfg.probe.points > 0)
        j["probe"] = {{"axis", cfg.probe.name},
                      {"start", cfg.probe.start},
                      {"stop", cfg.probe.stop},
                      {"points", cfg.probe.points}};
    j["time"] = {{"t_final", cfg.t_final}, {"dt", cfg.dt}};
    j["retune"] = cfg.retune;
    j["workers"] = cfg.workers;
    return j;
}

} // namespace

std::string bundled_profile(const std::string& name) { return profile_json(name).dump(); }

std::vector<std::string> bundled_profile_names() {
    return {"paper-device",  "off-sweet-first-order", "param-res-sweet", "param-res-off-sweet",
            "amplitude-sweep",    "coupler-sweep",         "expansion-comparison",      "single-qubit-spectrum",
            "bare"};
}

ExperimentConfig parse_config_text(const std::string& json_text, const std::string& profile) {
    json base = profile_json(profile);
    json user;
    try {
        user = json::parse(json_text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse: ") + e.what());
    }
    if (!user.is_object()) throw config_error("config parse: top level must be an object");
    base.merge_patch(user);
    return from_json(base);
}

ExperimentConfig parse_config(const std::string& path, const std::string& profile) {
    std::ifstream in(path);
    if (!in) throw config_error("config file '" + path + "' cannot be opened");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), profile);
}

std::string canonical_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(canonical_config(cfg)); }

} // namespace phasemod
