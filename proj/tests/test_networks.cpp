#include <doctest.h>

#include <cmath>
#include <set>

#include "nnpnn/checkpoint.hpp"
#include "nnpnn/networks.hpp"
#include "nnpnn/rng.hpp"
#include "oracles.hpp"

using namespace nnpnn;

TEST_CASE("generate_nn parameter counts match the layer arithmetic") {
    TargetTemplate tmpl;  // 2 -> 5 x layers -> 2
    SUBCASE("one hidden layer: 27") {
        tmpl.layers_min = tmpl.layers_max = 1;
        Rng rng(1);
        DenseNetwork net = generate_nn(rng, tmpl);
        CHECK(net.spec.hidden_layers == 1);
        CHECK(param_count(net) == 27);
    }
    SUBCASE("five hidden layers: 147") {
        tmpl.layers_min = tmpl.layers_max = 5;
        Rng rng(1);
        DenseNetwork net = generate_nn(rng, tmpl);
        CHECK(param_count(net) == 147);
    }
    SUBCASE("min_param_count over the default template") {
        CHECK(min_param_count(TargetTemplate{}) == 27);
    }
}

TEST_CASE("generate_nn layer histogram covers exactly 1..5") {
    TargetTemplate tmpl;
    Rng rng(42);
    std::set<int> seen;
    for (int i = 0; i < 10000; ++i) seen.insert(generate_nn(rng, tmpl).spec.hidden_layers);
    CHECK(seen == std::set<int>{1, 2, 3, 4, 5});
}

TEST_CASE("generate_nn is bitwise reproducible from the rng state") {
    TargetTemplate tmpl;
    Rng a(123), b(123);
    for (int i = 0; i < 5; ++i) {
        DenseNetwork na = generate_nn(a, tmpl);
        DenseNetwork nb = generate_nn(b, tmpl);
        REQUIRE(na.layers.size() == nb.layers.size());
        CHECK(na.seed == nb.seed);
        for (size_t li = 0; li < na.layers.size(); ++li) {
            CHECK(na.layers[li].w.a == nb.layers[li].w.a);
            CHECK(na.layers[li].b == nb.layers[li].b);
        }
    }
}

TEST_CASE("dense_forward known values") {
    SUBCASE("all-zero network maps anything to zero") {
        TargetTemplate tmpl;
        Rng rng(5);
        DenseNetwork net = generate_nn(rng, tmpl);
        for (DenseLayer& layer : net.layers) {
            std::fill(layer.w.a.begin(), layer.w.a.end(), 0.0);
            std::fill(layer.b.begin(), layer.b.end(), 0.0);
        }
        Graph g;
        std::vector<double> x{17.0, -4.0};
        CHECK(g.value(dense_forward(g, net, g.leaf(x))) == std::vector<double>{0, 0});
    }
    SUBCASE("single hidden unit: tanh(2)") {
        DenseNetwork net;
        net.spec = {1, 1, 1, 1};
        net.layers.resize(2);
        net.layers[0].w = Matrix(1, 1);
        net.layers[0].w.at(0, 0) = 2.0;
        net.layers[0].b = {0.0};
        net.layers[1].w = Matrix(1, 1);
        net.layers[1].w.at(0, 0) = 1.0;
        net.layers[1].b = {0.0};
        Graph g;
        std::vector<double> x{1.0};
        CHECK(g.value(dense_forward(g, net, g.leaf(x)))[0] ==
              doctest::Approx(0.96402758).epsilon(1e-8));
        CHECK(net.eval(x)[0] == doctest::Approx(0.96402758).epsilon(1e-8));
    }
    SUBCASE("input dimension is checked") {
        TargetTemplate tmpl;
        Rng rng(5);
        DenseNetwork net = generate_nn(rng, tmpl);
        Graph g;
        std::vector<double> x{1.0};
        CHECK_THROWS_AS(dense_forward(g, net, g.leaf(x)), ShapeError);
        CHECK_THROWS_AS(net.eval(x), ShapeError);
    }
}

TEST_CASE("dense_forward equals plain eval and the naive oracle") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        TargetTemplate tmpl;
        tmpl.input_dim = rng.uniform_int(1, 4);
        tmpl.output_dim = rng.uniform_int(1, 4);
        DenseNetwork net = generate_nn(rng, tmpl);
        std::vector<double> x = random_input(rng, tmpl.input_dim);

        Graph g;
        std::vector<double> via_graph = g.value(dense_forward(g, net, g.leaf(x)));
        std::vector<double> via_eval = net.eval(x);
        std::vector<double> via_oracle = oracles::naive_dense(net, x);
        CHECK(oracles::max_abs_diff(via_graph, via_oracle) < 1e-12);
        CHECK(oracles::max_abs_diff(via_eval, via_oracle) < 1e-12);
    }
}

TEST_CASE("dense_forward gradient w.r.t. x passes finite differences") {
    Rng rng(19);
    TargetTemplate tmpl;
    DenseNetwork net = generate_nn(rng, tmpl);
    ParamStore ps;
    ParamId x = ps.add("x", 2, 1);
    ps.values(x)[0] = 0.7;
    ps.values(x)[1] = -1.1;
    std::vector<double> target{0.5, 0.25};
    double err = finite_diff_check(
        [&](Graph& g, const ParamStore&) {
            return mse_loss(g, dense_forward(g, net, g.param_leaf(x)), target);
        },
        ps, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("random_input sampling") {
    SUBCASE("dim zero gives an empty vector") {
        Rng rng(1);
        CHECK(random_input(rng, 0).empty());
    }
    SUBCASE("fixed seed is deterministic") {
        Rng a(99), b(99);
        CHECK(random_input(a, 2) == random_input(b, 2));
    }
    SUBCASE("moment statistics over 1e5 draws") {
        Rng rng(2024);
        const int n = 100000;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            double v = random_input(rng, 1)[0];
            sum += v;
            sumsq += v * v;
        }
        double mean = sum / n;
        double var = (sumsq - n * mean * mean) / (n - 1);
        CHECK(mean >= -0.2);
        CHECK(mean <= 0.2);
        CHECK(var >= 97.0);
        CHECK(var <= 103.0);
    }
}

TEST_CASE("param_count equals the scalar count in a serialized network") {
    Rng rng(31);
    for (int i = 0; i < 10; ++i) {
        DenseNetwork net = generate_nn(rng, TargetTemplate{});
        ordered_json j = dense_network_to_json(net);
        size_t serialized = 0;
        for (const auto& layer : j.at("layers")) {
            serialized += layer.at("w").size() + layer.at("b").size();
        }
        CHECK(serialized == param_count(net));

        DenseNetwork back = dense_network_from_json(j);
        CHECK(back.spec.hidden_layers == net.spec.hidden_layers);
        for (size_t li = 0; li < net.layers.size(); ++li) {
            CHECK(back.layers[li].w.a == net.layers[li].w.a);
            CHECK(back.layers[li].b == net.layers[li].b);
        }
    }
}

TEST_CASE("meta_forward basics") {
    MetaNetConfig cfg;
    cfg.meta_dim = 3;
    cfg.hidden_layers = 2;
    cfg.hidden_width = 4;

    SUBCASE("all-zero parameters give zero output") {
        ParamStore ps;
        Rng rng(1);
        MetaNetwork mn = meta_init(rng, cfg, ps);
        for (double& v : ps.flat()) v = 0.0;
        Graph g(&ps);
        std::vector<double> x{1.0, -2.0}, xm{3.0, 0.5, -1.0};
        CHECK(g.value(meta_forward(g, mn, g.leaf(x), g.leaf(xm))) ==
              std::vector<double>{0, 0});
    }
    SUBCASE("distinct meta vectors give distinct outputs") {
        ParamStore ps;
        Rng rng(8);
        MetaNetwork mn = meta_init(rng, cfg, ps);
        Graph g(&ps);
        std::vector<double> x{1.0, -2.0};
        std::vector<double> m1{1.0, 0.0, 0.0}, m2{-1.0, 2.0, 0.5};
        auto o1 = g.value(meta_forward(g, mn, g.leaf(x), g.leaf(m1)));
        auto o2 = g.value(meta_forward(g, mn, g.leaf(x), g.leaf(m2)));
        CHECK(o1 != o2);
    }
    SUBCASE("dimension mismatches are structural errors") {
        ParamStore ps;
        Rng rng(8);
        MetaNetwork mn = meta_init(rng, cfg, ps);
        Graph g(&ps);
        std::vector<double> x{1.0, -2.0}, xm_bad{1.0};
        CHECK_THROWS_AS(meta_forward(g, mn, g.leaf(x), g.leaf(xm_bad)), ShapeError);
    }
}

TEST_CASE("meta_forward gradient w.r.t. x_meta passes finite differences") {
    MetaNetConfig cfg;
    cfg.meta_dim = 3;
    cfg.init_gain = 1.0;  // keep the check in the well-conditioned regime
    ParamStore ps;
    Rng rng(13);
    MetaNetwork mn = meta_init(rng, cfg, ps);
    ParamId xm = ps.add("x_meta", 3, 1);
    for (double& v : ps.values(xm)) v = rng.uniform(-1, 1);
    std::vector<double> x{0.4, -0.8}, target{0.2, -0.1};
    double err = finite_diff_check(
        [&](Graph& g, const ParamStore&) {
            return mse_loss(g, meta_forward(g, mn, g.leaf(x), g.param_leaf(xm)), target);
        },
        ps, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("meta_forward matches the naive oracle, both connectivities") {
    Rng rng(55);
    for (int i = 0; i < 100; ++i) {
        MetaNetConfig cfg;
        cfg.meta_dim = rng.uniform_int(0, 4);  // 0 degenerates to a plain dense net
        cfg.input_dim = rng.uniform_int(1, 3);
        cfg.output_dim = rng.uniform_int(1, 3);
        cfg.hidden_layers = rng.uniform_int(1, 3);
        cfg.hidden_width = rng.uniform_int(1, 4);
        cfg.connectivity =
            (i % 2 == 0) ? MetaConnectivity::Dense : MetaConnectivity::Chain;
        ParamStore ps;
        MetaNetwork mn = meta_init(rng, cfg, ps);

        std::vector<double> x = random_input(rng, cfg.input_dim);
        std::vector<double> xm(cfg.meta_dim);
        for (double& v : xm) v = rng.uniform(-2, 2);

        Graph g(&ps);
        auto got = g.value(meta_forward(g, mn, g.leaf(x), g.leaf(xm)));
        auto want = oracles::naive_meta(ps, mn, x, xm);
        CHECK(oracles::max_abs_diff(got, want) < 1e-12);
    }
}

TEST_CASE("spec validation rejects out-of-range layer counts") {
    NetSpec spec;
    spec.hidden_layers = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.hidden_layers = 6;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    TargetTemplate tmpl;
    tmpl.layers_min = 0;
    CHECK_THROWS_AS(tmpl.validate(), ConfigError);
}
