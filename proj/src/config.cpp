#include "nnpnn/config.hpp"

#include <fstream>
#include <set>
#include <string>

namespace nnpnn {

namespace {

void check_keys(const ordered_json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

Experiment parse_experiment(const std::string& s) {
    if (s == "inverse") return Experiment::Inverse;
    if (s == "compress") return Experiment::Compress;
    throw ConfigError("config: unknown experiment '" + s + "'");
}

MetaConnectivity parse_connectivity(const std::string& s) {
    if (s == "dense") return MetaConnectivity::Dense;
    if (s == "chain") return MetaConnectivity::Chain;
    throw ConfigError("config: unknown connectivity '" + s + "'");
}

}  // namespace

RunConfig parse_run_config(const ordered_json& j, std::optional<Experiment> expect) {
    check_keys(j, {"experiment", "seed", "iterations", "learning_rate", "rms_decay",
                   "rms_epsilon", "batch_size", "eval_every", "eval_trials", "ckpt_every",
                   "target", "host", "meta"},
               "top level");

    Experiment experiment = expect.value_or(Experiment::Inverse);
    if (j.contains("experiment")) {
        Experiment e = parse_experiment(j.at("experiment").get<std::string>());
        if (expect.has_value() && e != *expect) {
            throw ConfigError(std::string("config: experiment '") + experiment_name(e) +
                              "' does not match the requested command");
        }
        experiment = e;
    }
    RunConfig cfg = default_run_config(experiment);

    read_field(j, "seed", cfg.seed);
    read_field(j, "iterations", cfg.iterations);
    read_field(j, "learning_rate", cfg.learning_rate);
    read_field(j, "rms_decay", cfg.rms_decay);
    read_field(j, "rms_epsilon", cfg.rms_epsilon);
    read_field(j, "batch_size", cfg.batch_size);
    read_field(j, "eval_every", cfg.eval_every);
    read_field(j, "eval_trials", cfg.eval_trials);
    read_field(j, "ckpt_every", cfg.ckpt_every);

    if (j.contains("target")) {
        const ordered_json& t = j.at("target");
        check_keys(t, {"input_dim", "output_dim", "hidden_width", "hidden_layers_min",
                       "hidden_layers_max"},
                   "target");
        read_field(t, "input_dim", cfg.target.input_dim);
        read_field(t, "output_dim", cfg.target.output_dim);
        read_field(t, "hidden_width", cfg.target.hidden_width);
        read_field(t, "hidden_layers_min", cfg.target.layers_min);
        read_field(t, "hidden_layers_max", cfg.target.layers_max);
    }
    if (j.contains("host")) {
        const ordered_json& h = j.at("host");
        check_keys(h, {"phases", "queries_per_phase", "w1", "w2", "seed_dim",
                       "append_phase_input", "query_head_gain"},
                   "host");
        read_field(h, "phases", cfg.host.phases);
        read_field(h, "queries_per_phase", cfg.host.queries_per_phase);
        read_field(h, "w1", cfg.host.w1);
        read_field(h, "w2", cfg.host.w2);
        read_field(h, "seed_dim", cfg.host.seed_dim);
        read_field(h, "append_phase_input", cfg.host.append_phase_input);
        read_field(h, "query_head_gain", cfg.host.query_head_gain);
    }
    if (j.contains("meta")) {
        const ordered_json& m = j.at("meta");
        check_keys(m, {"meta_dim", "hidden_layers", "hidden_width", "connectivity",
                       "init_gain"},
                   "meta");
        read_field(m, "meta_dim", cfg.meta.meta_dim);
        read_field(m, "hidden_layers", cfg.meta.hidden_layers);
        read_field(m, "hidden_width", cfg.meta.hidden_width);
        if (m.contains("connectivity")) {
            cfg.meta.connectivity =
                parse_connectivity(m.at("connectivity").get<std::string>());
        }
        read_field(m, "init_gain", cfg.meta.init_gain);
    }

    cfg.validate();
    return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path,
                           std::optional<Experiment> expect) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return parse_run_config(j, expect);
}

ordered_json run_config_to_json(const RunConfig& cfg) {
    ordered_json j;
    j["experiment"] = experiment_name(cfg.experiment);
    j["seed"] = cfg.seed;
    j["iterations"] = cfg.iterations;
    j["learning_rate"] = cfg.learning_rate;
    j["rms_decay"] = cfg.rms_decay;
    j["rms_epsilon"] = cfg.rms_epsilon;
    j["batch_size"] = cfg.batch_size;
    j["eval_every"] = cfg.eval_every;
    j["eval_trials"] = cfg.eval_trials;
    j["ckpt_every"] = cfg.ckpt_every;
    j["target"] = {{"input_dim", cfg.target.input_dim},
                   {"output_dim", cfg.target.output_dim},
                   {"hidden_width", cfg.target.hidden_width},
                   {"hidden_layers_min", cfg.target.layers_min},
                   {"hidden_layers_max", cfg.target.layers_max}};
    j["host"] = {{"phases", cfg.host.phases},
                 {"queries_per_phase", cfg.host.queries_per_phase},
                 {"w1", cfg.host.w1},
                 {"w2", cfg.host.w2},
                 {"seed_dim", cfg.host.seed_dim},
                 {"append_phase_input", cfg.host.append_phase_input},
                 {"query_head_gain", cfg.host.query_head_gain}};
    if (cfg.experiment == Experiment::Compress) {
        j["meta"] = {{"meta_dim", cfg.meta.meta_dim},
                     {"hidden_layers", cfg.meta.hidden_layers},
                     {"hidden_width", cfg.meta.hidden_width},
                     {"connectivity", cfg.meta.connectivity == MetaConnectivity::Dense
                                          ? "dense"
                                          : "chain"},
                     {"init_gain", cfg.meta.init_gain}};
    }
    return j;
}

void write_config_resolved(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("config: cannot write " + path.string());
    out << run_config_to_json(cfg).dump(2) << '\n';
}

}  // namespace nnpnn
