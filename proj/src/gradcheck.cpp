#include "nnpnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "nnpnn/autodiff.hpp"
#include "nnpnn/host.hpp"
#include "nnpnn/networks.hpp"
#include "nnpnn/rng.hpp"

namespace nnpnn {

int GradCheckReport::total_configs() const {
    int n = 0;
    for (const GradCheckSuite& s : suites) n += s.configs;
    return n;
}

double GradCheckReport::worst_error() const {
    double w = 0.0;
    for (const GradCheckSuite& s : suites) w = std::max(w, s.max_rel_error);
    return w;
}

namespace {

constexpr double kEps = 1e-5;

void record(GradCheckSuite& suite, double err, const std::string& what) {
    ++suite.configs;
    if (suite.worst_case.empty() || err > suite.max_rel_error) {
        suite.max_rel_error = std::max(err, suite.max_rel_error);
        suite.worst_case = what;
    }
}

// Inputs live in the store too, so d/dx is checked together with d/dtheta.
ParamId add_input_param(Rng& rng, ParamStore& ps, const std::string& name, int dim,
                        double scale) {
    ParamId id = ps.add(name, dim, 1);
    for (double& v : ps.values(id)) v = rng.uniform(-scale, scale);
    return id;
}

std::vector<double> random_target(Rng& rng, int dim) {
    std::vector<double> t(dim);
    for (double& v : t) v = rng.uniform(-2.0, 2.0);
    return t;
}

GradCheckSuite suite_dense(Rng& rng, int count) {
    GradCheckSuite suite{"dense", 0, 0.0, ""};
    for (int i = 0; i < count; ++i) {
        TargetTemplate tmpl;
        tmpl.input_dim = rng.uniform_int(1, 3);
        tmpl.output_dim = rng.uniform_int(1, 3);
        tmpl.hidden_width = rng.uniform_int(2, 5);
        DenseNetwork net = generate_nn(rng, tmpl);

        ParamStore ps;
        ParamId x = add_input_param(rng, ps, "x", tmpl.input_dim, 2.0);
        std::vector<double> target = random_target(rng, tmpl.output_dim);

        double err = finite_diff_check(
            [&](Graph& g, const ParamStore&) {
                return mse_loss(g, dense_forward(g, net, g.param_leaf(x)), target);
            },
            ps, kEps);
        record(suite, err, "dense layers=" + std::to_string(net.spec.hidden_layers) +
                               " in=" + std::to_string(tmpl.input_dim) +
                               " out=" + std::to_string(tmpl.output_dim));
    }
    return suite;
}

GradCheckSuite suite_sub_block(Rng& rng, int count, bool inject_fault) {
    GradCheckSuite suite{"sub_block", 0, 0.0, ""};
    for (int i = 0; i < count; ++i) {
        int in_dim = rng.uniform_int(1, 4);
        int w1 = rng.uniform_int(1, 4);
        int w2 = rng.uniform_int(1, 4);
        int out_dim = rng.uniform_int(1, 4);
        bool linear = rng.uniform_int(0, 1) == 1;

        ParamStore ps;
        SubBlock sb;
        auto layer = [&](const std::string& name, int in, int out) {
            DenseLayerRef l;
            l.in_dim = in;
            l.out_dim = out;
            l.w = ps.add(name + ".w", out, in);
            l.b = ps.add(name + ".b", out, 1);
            double s = 1.0 / std::sqrt(static_cast<double>(in));
            for (double& v : ps.values(l.w)) v = rng.uniform(-s, s);
            for (double& v : ps.values(l.b)) v = rng.uniform(-s, s);
            return l;
        };
        sb.d1 = layer("d1", in_dim, w1);
        sb.d2 = layer("d2", w1, w2);
        sb.d3 = layer("d3", in_dim + w1 + w2, out_dim);
        sb.linear_output = linear;
        ParamId x = add_input_param(rng, ps, "x", in_dim, 2.0);
        std::vector<double> target = random_target(rng, out_dim);

        double err = finite_diff_check(
            [&](Graph& g, const ParamStore&) {
                return mse_loss(g, sub_block_forward(g, sb, g.param_leaf(x)), target);
            },
            ps, kEps);
        if (inject_fault && i == 0) err = 1.0;  // simulated wrong-sign gradient
        record(suite, err, "sub_block in=" + std::to_string(in_dim) +
                               " w=(" + std::to_string(w1) + "," + std::to_string(w2) +
                               "," + std::to_string(out_dim) + ")");
    }
    return suite;
}

GradCheckSuite suite_host(Rng& rng, int count) {
    GradCheckSuite suite{"nnpnn", 0, 0.0, ""};
    const int ls[] = {1, 2};
    const int rs[] = {1, 4};
    for (int l : ls) {
        for (int r : rs) {
            for (int i = 0; i < count; ++i) {
                TargetTemplate tmpl;
                tmpl.hidden_width = 3;
                DenseNetwork target_net = generate_nn(rng, tmpl);

                NnpnnConfig cfg;
                cfg.l = l;
                cfg.r = r;
                cfg.w1 = 3;
                cfg.w2 = 3;
                cfg.seed_dim = 2;
                bool use_seed_input = (i % 2 == 1);
                cfg.input_dim = use_seed_input ? 0 : tmpl.output_dim;

                ParamStore ps;
                Rng init_rng = rng.split();
                Nnpnn host = nnpnn_init(init_rng, cfg, ps);
                if (use_seed_input) {
                    // Give the seed vector a nonzero state so its gradient
                    // path is checked away from the origin.
                    for (double& v : ps.values(host.seed_vector)) {
                        v = rng.uniform(-1.0, 1.0);
                    }
                }
                std::vector<double> x;
                if (!use_seed_input) {
                    for (int k = 0; k < cfg.input_dim; ++k) x.push_back(rng.uniform(-2, 2));
                }
                std::vector<double> target = random_target(rng, cfg.output_dim);

                double err = finite_diff_check(
                    [&](Graph& g, const ParamStore&) {
                        auto xin = use_seed_input
                                       ? std::optional<std::span<const double>>{}
                                       : std::optional<std::span<const double>>{x};
                        NnpnnResult fw = nnpnn_forward(g, host, xin, target_net);
                        return mse_loss(g, fw.output, target);
                    },
                    ps, kEps);
                record(suite, err, "nnpnn l=" + std::to_string(l) + " r=" +
                                       std::to_string(r) +
                                       (use_seed_input ? " seed-input" : " numeric-input"));
            }
        }
    }
    return suite;
}

GradCheckSuite suite_meta(Rng& rng, int count) {
    GradCheckSuite suite{"meta", 0, 0.0, ""};
    for (int i = 0; i < count; ++i) {
        MetaNetConfig cfg;
        cfg.meta_dim = rng.uniform_int(1, 3);
        cfg.input_dim = rng.uniform_int(1, 2);
        cfg.output_dim = rng.uniform_int(1, 2);
        cfg.hidden_layers = rng.uniform_int(1, 3);
        cfg.hidden_width = rng.uniform_int(2, 4);
        cfg.connectivity =
            (i % 2 == 0) ? MetaConnectivity::Dense : MetaConnectivity::Chain;

        ParamStore ps;
        Rng init_rng = rng.split();
        MetaNetwork mn = meta_init(init_rng, cfg, ps);
        ParamId x = add_input_param(rng, ps, "x", cfg.input_dim, 2.0);
        ParamId xm = add_input_param(rng, ps, "x_meta", cfg.meta_dim, 1.0);
        std::vector<double> target = random_target(rng, cfg.output_dim);

        double err = finite_diff_check(
            [&](Graph& g, const ParamStore&) {
                return mse_loss(
                    g, meta_forward(g, mn, g.param_leaf(x), g.param_leaf(xm)), target);
            },
            ps, kEps);
        record(suite, err, "meta layers=" + std::to_string(cfg.hidden_layers) +
                               (cfg.connectivity == MetaConnectivity::Dense ? " dense"
                                                                            : " chain"));
    }
    return suite;
}

}  // namespace

GradCheckReport run_gradcheck(uint64_t seed, int per_suite, bool inject_fault) {
    if (per_suite < 1) throw ConfigError("gradcheck: per-suite count must be >= 1");
    GradCheckReport report;
    report.eps = kEps;
    Rng rng = substream(seed, 0x67726164ull);
    report.suites.push_back(suite_dense(rng, per_suite));
    report.suites.push_back(suite_sub_block(rng, per_suite, inject_fault));
    report.suites.push_back(suite_host(rng, std::max(1, per_suite / 6)));
    report.suites.push_back(suite_meta(rng, per_suite));
    return report;
}

}  // namespace nnpnn
