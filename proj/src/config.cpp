#include "tenseg/config.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

namespace tenseg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::runtime_error("config: " + where + ": " + what);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) { known = true; break; }
        if (!known) fail(where, "unknown key '" + item.key() + "'");
    }
}

void read_double(const json& j, const std::string& where, const char* key,
                 double& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
    out = v.get<double>();
}

void read_int(const json& j, const std::string& where, const char* key, int& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        fail(where, std::string("'") + key + "' must be an integer");
    out = v.get<int>();
}

void read_uint64(const json& j, const std::string& where, const char* key,
                 std::uint64_t& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)))
        fail(where, std::string("'") + key + "' must be a non-negative integer");
    out = v.get<std::uint64_t>();
}

void read_bool(const json& j, const std::string& where, const char* key, bool& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(where, std::string("'") + key + "' must be a boolean");
    out = v.get<bool>();
}

void read_string(const json& j, const std::string& where, const char* key,
                 std::string& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
    out = v.get<std::string>();
}

void parse_sim(const json& j, SimParams& sim) {
    const std::string where = "sim";
    check_keys(j, where,
               {"dt", "gravity", "ground_stiffness", "ground_damping", "friction_mu",
                "structural_damping", "spring_stiffness", "spring_rest_length",
                "strut_length", "total_mass", "motor_node_extra_mass", "motor_mere",
                "motor_omega_max", "relaxation_drag", "penetration_tolerance",
                "ground_enabled"});
    read_double(j, where, "dt", sim.dt);
    read_double(j, where, "gravity", sim.gravity);
    read_double(j, where, "ground_stiffness", sim.ground_stiffness);
    read_double(j, where, "ground_damping", sim.ground_damping);
    read_double(j, where, "friction_mu", sim.friction_mu);
    read_double(j, where, "structural_damping", sim.structural_damping);
    read_double(j, where, "spring_stiffness", sim.spring_stiffness);
    read_double(j, where, "spring_rest_length", sim.spring_rest_length);
    read_double(j, where, "strut_length", sim.strut_length);
    read_double(j, where, "total_mass", sim.total_mass);
    read_double(j, where, "motor_node_extra_mass", sim.motor_node_extra_mass);
    read_double(j, where, "motor_mere", sim.motor_mere);
    read_double(j, where, "motor_omega_max", sim.motor_omega_max);
    read_double(j, where, "relaxation_drag", sim.relaxation_drag);
    read_double(j, where, "penetration_tolerance", sim.penetration_tolerance);
    read_bool(j, where, "ground_enabled", sim.ground_enabled);
}

void parse_task(const json& j, TaskParams& task) {
    const std::string where = "task";
    check_keys(j, where,
               {"episode_seconds", "yaw_limit", "yaw_check_interval",
                "randomize_motor_phase", "amplitude_yaw_abort"});
    read_double(j, where, "episode_seconds", task.episode_seconds);
    read_double(j, where, "yaw_limit", task.yaw_limit);
    read_double(j, where, "yaw_check_interval", task.yaw_check_interval);
    read_bool(j, where, "randomize_motor_phase", task.randomize_motor_phase);
    read_bool(j, where, "amplitude_yaw_abort", task.amplitude_yaw_abort);
}

void parse_gp(const json& j, KernelParams& gp) {
    const std::string where = "gp";
    check_keys(j, where, {"beta", "noise_var"});
    read_double(j, where, "beta", gp.beta);
    read_double(j, where, "noise_var", gp.noise_var);
}

void parse_acquisition(const json& j, AcquisitionParams& acq) {
    const std::string where = "acquisition";
    check_keys(j, where, {"kappa", "grid_per_dim", "performance_scale"});
    read_double(j, where, "kappa", acq.kappa);
    read_int(j, where, "grid_per_dim", acq.grid_per_dim);
    read_double(j, where, "performance_scale", acq.performance_scale);
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }

    const std::string where = "(top level)";
    check_keys(j, where,
               {"variant", "treatments", "replicates", "budget", "base_seed",
                "damaged_spring", "n_init_random", "prior_scale", "output_dir",
                "threads", "sim", "task", "gp", "acquisition"});

    ExperimentConfig config;
    if (j.contains("variant")) {
        std::string name;
        read_string(j, where, "variant", name);
        config.variant = variant_from_name(name);
    }
    if (j.contains("treatments")) {
        const json& arr = j.at("treatments");
        if (!arr.is_array()) fail(where, "'treatments' must be an array of strings");
        config.treatments.clear();
        for (const json& v : arr) {
            if (!v.is_string())
                fail(where, "'treatments' must be an array of strings");
            config.treatments.push_back(treatment_from_name(v.get<std::string>()));
        }
    }
    read_int(j, where, "replicates", config.replicates);
    read_int(j, where, "budget", config.budget);
    read_uint64(j, where, "base_seed", config.base_seed);
    read_int(j, where, "damaged_spring", config.damaged_spring);
    read_int(j, where, "n_init_random", config.n_init_random);
    read_double(j, where, "prior_scale", config.prior_scale);
    read_string(j, where, "output_dir", config.output_dir);
    read_int(j, where, "threads", config.threads);
    if (j.contains("sim")) parse_sim(j.at("sim"), config.sim);
    if (j.contains("task")) parse_task(j.at("task"), config.task);
    if (j.contains("gp")) parse_gp(j.at("gp"), config.gp);
    if (j.contains("acquisition")) parse_acquisition(j.at("acquisition"), config.acquisition);

    config.validate();
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return parse_experiment_config(buffer.str());
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    json treatments = json::array();
    for (Treatment t : config.treatments) treatments.push_back(treatment_name(t));

    json j{{"variant", variant_name(config.variant)},
           {"treatments", treatments},
           {"replicates", config.replicates},
           {"budget", config.budget},
           {"base_seed", config.base_seed},
           {"damaged_spring", config.damaged_spring},
           {"n_init_random", config.n_init_random},
           {"prior_scale", config.prior_scale},
           {"output_dir", config.output_dir},
           {"threads", config.threads},
           {"sim",
            {{"dt", config.sim.dt},
             {"gravity", config.sim.gravity},
             {"ground_stiffness", config.sim.ground_stiffness},
             {"ground_damping", config.sim.ground_damping},
             {"friction_mu", config.sim.friction_mu},
             {"structural_damping", config.sim.structural_damping},
             {"spring_stiffness", config.sim.spring_stiffness},
             {"spring_rest_length", config.sim.spring_rest_length},
             {"strut_length", config.sim.strut_length},
             {"total_mass", config.sim.total_mass},
             {"motor_node_extra_mass", config.sim.motor_node_extra_mass},
             {"motor_mere", config.sim.motor_mere},
             {"motor_omega_max", config.sim.motor_omega_max},
             {"relaxation_drag", config.sim.relaxation_drag},
             {"penetration_tolerance", config.sim.penetration_tolerance},
             {"ground_enabled", config.sim.ground_enabled}}},
           {"task",
            {{"episode_seconds", config.task.episode_seconds},
             {"yaw_limit", config.task.yaw_limit},
             {"yaw_check_interval", config.task.yaw_check_interval},
             {"randomize_motor_phase", config.task.randomize_motor_phase},
             {"amplitude_yaw_abort", config.task.amplitude_yaw_abort}}},
           {"gp", {{"beta", config.gp.beta}, {"noise_var", config.gp.noise_var}}},
           {"acquisition",
            {{"kappa", config.acquisition.kappa},
             {"grid_per_dim", config.acquisition.grid_per_dim},
             {"performance_scale", config.acquisition.performance_scale}}}};
    return j.dump(2) + "\n";
}

} // namespace tenseg
