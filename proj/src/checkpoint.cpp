#include "nnpnn/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "nnpnn/config.hpp"

namespace nnpnn {

std::string hex_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hex_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size()) {
        throw IoError("checkpoint: malformed scalar '" + s + "'");
    }
    return v;
}

namespace {

ordered_json hex_array(std::span<const double> v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(hex_double(x));
    return a;
}

std::vector<double> parse_hex_array(const ordered_json& a, const std::string& where) {
    if (!a.is_array()) throw IoError("checkpoint: " + where + " is not an array");
    std::vector<double> v;
    v.reserve(a.size());
    for (const auto& x : a) v.push_back(parse_hex_double(x.get<std::string>()));
    return v;
}

// Fill one store-resident tensor from a serialized array, shape-checked.
void load_param(ParamStore& params, ParamId id, const ordered_json& a,
                const std::string& where) {
    std::vector<double> v = parse_hex_array(a, where);
    auto dst = params.values(id);
    if (v.size() != dst.size()) {
        throw IoError("checkpoint: shape mismatch for " + where + ": stored " +
                      std::to_string(v.size()) + " scalars, model expects " +
                      std::to_string(dst.size()));
    }
    std::copy(v.begin(), v.end(), dst.begin());
}

ordered_json layer_to_json(const ParamStore& params, const DenseLayerRef& layer) {
    return ordered_json{{"w", hex_array(params.values(layer.w))},
                        {"b", hex_array(params.values(layer.b))}};
}

void layer_from_json(ParamStore& params, const DenseLayerRef& layer,
                     const ordered_json& j, const std::string& where) {
    load_param(params, layer.w, j.at("w"), where + ".w");
    load_param(params, layer.b, j.at("b"), where + ".b");
}

ordered_json block_to_json(const ParamStore& params, const ProcessingBlock& pb) {
    ordered_json layers = ordered_json::array();
    for (const DenseLayerRef* layer :
         {&pb.sb1.d1, &pb.sb1.d2, &pb.sb1.d3, &pb.sb2.d1, &pb.sb2.d2, &pb.sb2.d3}) {
        layers.push_back(layer_to_json(params, *layer));
    }
    return ordered_json{{"layers", layers}};
}

void block_from_json(ParamStore& params, const ProcessingBlock& pb,
                     const ordered_json& j, const std::string& where) {
    const ordered_json& layers = j.at("layers");
    const DenseLayerRef* refs[] = {&pb.sb1.d1, &pb.sb1.d2, &pb.sb1.d3,
                                   &pb.sb2.d1, &pb.sb2.d2, &pb.sb2.d3};
    if (!layers.is_array() || layers.size() != 6) {
        throw IoError("checkpoint: " + where + " must hold 6 layers");
    }
    for (size_t i = 0; i < 6; ++i) {
        layer_from_json(params, *refs[i], layers.at(i),
                        where + ".layers[" + std::to_string(i) + "]");
    }
}

ordered_json host_to_json(const ParamStore& params, const Nnpnn& f) {
    ordered_json blocks = ordered_json::array();
    for (const Phase& phase : f.phases) blocks.push_back(block_to_json(params, phase.block));
    blocks.push_back(block_to_json(params, f.output_block));
    return ordered_json{{"l", f.cfg.l},
                        {"r", f.cfg.r},
                        {"w1", f.cfg.w1},
                        {"w2", f.cfg.w2},
                        {"seed_vector", hex_array(params.values(f.seed_vector))},
                        {"blocks", blocks}};
}

void host_from_json(ParamStore& params, const Nnpnn& f, const ordered_json& j) {
    const std::pair<const char*, int> expect[] = {
        {"l", f.cfg.l}, {"r", f.cfg.r}, {"w1", f.cfg.w1}, {"w2", f.cfg.w2}};
    for (const auto& [key, val] : expect) {
        if (j.at(key).get<int>() != val) {
            throw IoError("checkpoint: host." + std::string(key) +
                          " does not match the config snapshot");
        }
    }
    load_param(params, f.seed_vector, j.at("seed_vector"), "host.seed_vector");
    const ordered_json& blocks = j.at("blocks");
    if (!blocks.is_array() || blocks.size() != f.phases.size() + 1) {
        throw IoError("checkpoint: host.blocks must hold " +
                      std::to_string(f.phases.size() + 1) + " blocks");
    }
    for (size_t k = 0; k < f.phases.size(); ++k) {
        block_from_json(params, f.phases[k].block, blocks.at(k),
                        "host.blocks[" + std::to_string(k) + "]");
    }
    block_from_json(params, f.output_block, blocks.at(f.phases.size()),
                    "host.blocks[" + std::to_string(f.phases.size()) + "]");
}

ordered_json meta_to_json(const ParamStore& params, const MetaNetwork& mn) {
    ordered_json layers = ordered_json::array();
    for (const DenseLayerRef& layer : mn.layers) {
        layers.push_back(ordered_json{{"w", hex_array(params.values(layer.w))},
                                      {"b", hex_array(params.values(layer.b))}});
    }
    return ordered_json{{"meta_dim", mn.cfg.meta_dim}, {"layers", layers}};
}

void meta_from_json(ParamStore& params, const MetaNetwork& mn, const ordered_json& j) {
    if (j.at("meta_dim").get<int>() != mn.cfg.meta_dim) {
        throw IoError("checkpoint: meta.meta_dim does not match the config snapshot");
    }
    const ordered_json& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != mn.layers.size()) {
        throw IoError("checkpoint: meta.layers must hold " +
                      std::to_string(mn.layers.size()) + " layers");
    }
    for (size_t i = 0; i < mn.layers.size(); ++i) {
        std::string where = "meta.layers[" + std::to_string(i) + "]";
        load_param(params, mn.layers[i].w, layers.at(i).at("w"), where + ".w");
        load_param(params, mn.layers[i].b, layers.at(i).at("b"), where + ".b");
    }
}

ordered_json history_to_json(const MetricsHistory& h) {
    ordered_json rows = ordered_json::array();
    for (const MetricsRow& r : h.rows) {
        rows.push_back(ordered_json{{"iteration", r.iteration},
                                    {"loss", hex_double(r.loss)},
                                    {"ratio_mean", hex_double(r.ratio_mean)},
                                    {"ratio_median", hex_double(r.ratio_median)},
                                    {"frac10", hex_double(r.frac10)},
                                    {"frac25", hex_double(r.frac25)}});
    }
    return rows;
}

MetricsHistory history_from_json(const ordered_json& rows) {
    MetricsHistory h;
    for (const auto& r : rows) {
        h.rows.push_back({r.at("iteration").get<long long>(),
                          parse_hex_double(r.at("loss").get<std::string>()),
                          parse_hex_double(r.at("ratio_mean").get<std::string>()),
                          parse_hex_double(r.at("ratio_median").get<std::string>()),
                          parse_hex_double(r.at("frac10").get<std::string>()),
                          parse_hex_double(r.at("frac25").get<std::string>())});
    }
    return h;
}

uint64_t parse_hex_u64(const std::string& s, const char* what) {
    if (s.rfind("0x", 0) != 0) throw IoError(std::string("checkpoint: malformed ") + what);
    char* end = nullptr;
    uint64_t v = std::strtoull(s.c_str() + 2, &end, 16);
    if (end != s.c_str() + s.size()) {
        throw IoError(std::string("checkpoint: malformed ") + what);
    }
    return v;
}

std::string u64_hex(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

template <typename Session>
ordered_json common_header(const Session& s) {
    ordered_json j;
    j["format_version"] = kCheckpointVersion;
    j["experiment"] = experiment_name(s.cfg.experiment);
    j["config"] = run_config_to_json(s.cfg);
    j["iteration"] = s.iteration;
    j["rng_state"] = u64_hex(s.rng.state());
    return j;
}

void write_json_file(const ordered_json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot write " + path.string());
    out << j.dump(1) << '\n';
    if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

ordered_json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("checkpoint: invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

void restore_run_state(const ordered_json& j, std::vector<double>& rms_v,
                       size_t expected_rms, Rng& rng, long long& iteration,
                       MetricsHistory& history) {
    rms_v = parse_hex_array(j.at("rms_v"), "rms_v");
    if (rms_v.size() != expected_rms) {
        throw IoError("checkpoint: rms_v holds " + std::to_string(rms_v.size()) +
                      " scalars, model expects " + std::to_string(expected_rms));
    }
    rng.set_state(parse_hex_u64(j.at("rng_state").get<std::string>(), "rng_state"));
    iteration = j.at("iteration").get<long long>();
    history = history_from_json(j.at("history"));
}

ordered_json load_versioned(const std::filesystem::path& path) {
    ordered_json j = read_json_file(path);
    if (!j.contains("format_version") ||
        j.at("format_version").get<int>() != kCheckpointVersion) {
        throw ConfigError("checkpoint: unsupported format_version in " + path.string());
    }
    return j;
}

}  // namespace

void save_checkpoint(const InverseSession& s, const std::filesystem::path& path) {
    ordered_json j = common_header(s);
    j["host"] = host_to_json(s.params, s.host);
    j["rms_v"] = hex_array(s.rms.v);
    j["history"] = history_to_json(s.history);
    write_json_file(j, path);
}

void save_checkpoint(const CompressSession& s, const std::filesystem::path& path) {
    ordered_json j = common_header(s);
    j["host"] = host_to_json(s.params, s.encoder);
    j["meta"] = meta_to_json(s.params, s.decoder);
    j["rms_v"] = hex_array(s.rms.v);
    j["history"] = history_to_json(s.history);
    write_json_file(j, path);
}

Experiment peek_experiment(const std::filesystem::path& path) {
    ordered_json j = load_versioned(path);
    std::string name = j.at("experiment").get<std::string>();
    if (name == "inverse") return Experiment::Inverse;
    if (name == "compress") return Experiment::Compress;
    throw IoError("checkpoint: unknown experiment '" + name + "' in " + path.string());
}

InverseSession load_inverse_checkpoint(const std::filesystem::path& path) {
    ordered_json j = load_versioned(path);
    if (j.at("experiment").get<std::string>() != "inverse") {
        throw ConfigError("checkpoint: not an inverse run: " + path.string());
    }
    RunConfig cfg = parse_run_config(j.at("config"), Experiment::Inverse);
    InverseSession s = make_inverse_session(cfg);  // structure only; values overwritten
    host_from_json(s.params, s.host, j.at("host"));
    restore_run_state(j, s.rms.v, s.params.size(), s.rng, s.iteration, s.history);
    return s;
}

CompressSession load_compress_checkpoint(const std::filesystem::path& path) {
    ordered_json j = load_versioned(path);
    if (j.at("experiment").get<std::string>() != "compress") {
        throw ConfigError("checkpoint: not a compress run: " + path.string());
    }
    RunConfig cfg = parse_run_config(j.at("config"), Experiment::Compress);
    CompressSession s = make_compress_session(cfg);
    host_from_json(s.params, s.encoder, j.at("host"));
    meta_from_json(s.params, s.decoder, j.at("meta"));
    restore_run_state(j, s.rms.v, s.params.size(), s.rng, s.iteration, s.history);
    return s;
}

ordered_json dense_network_to_json(const DenseNetwork& net) {
    ordered_json layers = ordered_json::array();
    for (const DenseLayer& layer : net.layers) {
        layers.push_back(
            ordered_json{{"w", hex_array(layer.w.a)}, {"b", hex_array(layer.b)}});
    }
    return ordered_json{{"spec",
                         {{"input_dim", net.spec.input_dim},
                          {"output_dim", net.spec.output_dim},
                          {"hidden_layers", net.spec.hidden_layers},
                          {"hidden_width", net.spec.hidden_width}}},
                        {"layers", layers},
                        {"init", "uniform[-1,1]"},
                        {"seed", u64_hex(net.seed)}};
}

DenseNetwork dense_network_from_json(const ordered_json& j) {
    DenseNetwork net;
    const ordered_json& spec = j.at("spec");
    net.spec.input_dim = spec.at("input_dim").get<int>();
    net.spec.output_dim = spec.at("output_dim").get<int>();
    net.spec.hidden_layers = spec.at("hidden_layers").get<int>();
    net.spec.hidden_width = spec.at("hidden_width").get<int>();
    net.spec.validate();
    net.seed = parse_hex_u64(j.at("seed").get<std::string>(), "seed");

    const ordered_json& layers = j.at("layers");
    int in = net.spec.input_dim;
    for (int li = 0; li <= net.spec.hidden_layers; ++li) {
        int out = (li == net.spec.hidden_layers) ? net.spec.output_dim
                                                 : net.spec.hidden_width;
        DenseLayer layer;
        layer.w = Matrix(out, in);
        std::vector<double> w =
            parse_hex_array(layers.at(li).at("w"), "layer " + std::to_string(li) + ".w");
        if (w.size() != layer.w.size()) {
            throw IoError("checkpoint: dense layer " + std::to_string(li) +
                          " weight shape mismatch");
        }
        layer.w.a = std::move(w);
        layer.b = parse_hex_array(layers.at(li).at("b"),
                                  "layer " + std::to_string(li) + ".b");
        if (static_cast<int>(layer.b.size()) != out) {
            throw IoError("checkpoint: dense layer " + std::to_string(li) +
                          " bias shape mismatch");
        }
        net.layers.push_back(std::move(layer));
        in = out;
    }
    return net;
}

}  // namespace nnpnn
