#include <doctest.h>

#include <cmath>

#include "nnpnn/host.hpp"
#include "nnpnn/rng.hpp"
#include "oracles.hpp"

using namespace nnpnn;

namespace {

NnpnnConfig tiny_config(int l, int r) {
    NnpnnConfig cfg;
    cfg.l = l;
    cfg.r = r;
    cfg.w1 = 3;
    cfg.w2 = 3;
    cfg.append_phase_input = false;  // tests of the plain pairs-only layout
    return cfg;
}

}  // namespace

TEST_CASE("nnpnn_init validates the configuration") {
    ParamStore ps;
    Rng rng(1);
    NnpnnConfig cfg = tiny_config(1, 1);
    cfg.r = 0;
    CHECK_THROWS_AS(nnpnn_init(rng, cfg, ps), ConfigError);
    cfg.r = 1;
    cfg.l = 0;
    CHECK_THROWS_AS(nnpnn_init(rng, cfg, ps), ConfigError);
    cfg.l = 1;
    cfg.w1 = 0;
    CHECK_THROWS_AS(nnpnn_init(rng, cfg, ps), ConfigError);
}

TEST_CASE("nnpnn_init is deterministic and matches the analytic parameter count") {
    for (auto [l, r] : {std::pair{1, 1}, {1, 4}, {2, 4}}) {
        NnpnnConfig cfg = tiny_config(l, r);
        ParamStore a, b;
        Rng ra(99), rb(99);
        nnpnn_init(ra, cfg, a);
        nnpnn_init(rb, cfg, b);
        REQUIRE(a.size() == b.size());
        CHECK(std::equal(a.flat().begin(), a.flat().end(), b.flat().begin()));
        CHECK(a.size() == nnpnn_param_count(cfg));
    }
}

TEST_CASE("sub-block dimension arithmetic: d3 input = in + w1 + w2") {
    ParamStore ps;
    Rng rng(4);
    NnpnnConfig cfg = tiny_config(1, 1);
    Nnpnn f = nnpnn_init(rng, cfg, ps);
    const SubBlock& sb = f.phases[0].block.sb1;
    CHECK(sb.d1.in_dim == cfg.phase1_input_dim());
    CHECK(sb.d3.in_dim == sb.d1.in_dim + cfg.w1 + cfg.w2);
    // widths (3,3,4) over a 2-dim input: d3 consumes 2 + 3 + 3 = 8
    CHECK(2 + 3 + 3 == 8);
}

TEST_CASE("sub_block_forward with zero parameters is the zero map") {
    ParamStore ps;
    Rng rng(4);
    Nnpnn f = nnpnn_init(rng, tiny_config(1, 1), ps);
    for (double& v : ps.flat()) v = 0.0;
    Graph g(&ps);
    std::vector<double> x{5.0, -3.0};
    auto out = g.value(sub_block_forward(g, f.phases[0].block.sb1, g.leaf(x)));
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("sub_block_forward matches the naive oracle") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        NnpnnConfig cfg = tiny_config(1, rng.uniform_int(1, 3));
        cfg.input_dim = rng.uniform_int(1, 4);
        ParamStore ps;
        Nnpnn f = nnpnn_init(rng, cfg, ps);
        std::vector<double> x(cfg.input_dim);
        for (double& v : x) v = rng.uniform(-3, 3);

        Graph g(&ps);
        auto got = g.value(sub_block_forward(g, f.phases[0].block.sb1, g.leaf(x)));
        auto want = oracles::naive_sub_block(ps, f.phases[0].block.sb1, x);
        CHECK(oracles::max_abs_diff(got, want) < 1e-12);
    }
}

TEST_CASE("block_forward is the composition of its two sub-blocks") {
    ParamStore ps;
    Rng rng(23);
    Nnpnn f = nnpnn_init(rng, tiny_config(1, 2), ps);
    const ProcessingBlock& pb = f.phases[0].block;
    std::vector<double> x{0.5, -1.5};

    Graph g(&ps);
    auto composed = g.value(
        sub_block_forward(g, pb.sb2, sub_block_forward(g, pb.sb1, g.leaf(x))));
    Graph g2(&ps);
    auto direct = g2.value(block_forward(g2, pb, g2.leaf(x)));
    CHECK(direct == composed);
}

TEST_CASE("block gradients pass the finite-difference check") {
    NnpnnConfig cfg = tiny_config(1, 1);
    ParamStore ps;
    Rng rng(31);
    Nnpnn f = nnpnn_init(rng, cfg, ps);
    std::vector<double> x{1.0, -0.5}, target{0.3, -0.6};  // block emits r*query_dim
    double err = finite_diff_check(
        [&](Graph& g, const ParamStore&) {
            return mse_loss(g, block_forward(g, f.phases[0].block, g.leaf(x)), target);
        },
        ps, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("nnpnn_forward shapes, trace and read consistency") {
    Rng rng(45);
    TargetTemplate tmpl;
    DenseNetwork target = generate_nn(rng, tmpl);

    SUBCASE("phase 2 consumes r*(read+query) values") {
        NnpnnConfig cfg = tiny_config(2, 4);
        ParamStore ps;
        Nnpnn f = nnpnn_init(rng, cfg, ps);
        CHECK(f.phases[1].block.sb1.d1.in_dim == 4 * (2 + 2));  // 16
        CHECK(f.output_block.sb1.d1.in_dim == 16);
    }

    SUBCASE("zero target network still yields a finite output") {
        NnpnnConfig cfg = tiny_config(1, 1);
        ParamStore ps;
        Nnpnn f = nnpnn_init(rng, cfg, ps);
        DenseNetwork zero = target;
        for (DenseLayer& layer : zero.layers) {
            std::fill(layer.w.a.begin(), layer.w.a.end(), 0.0);
            std::fill(layer.b.begin(), layer.b.end(), 0.0);
        }
        Graph g(&ps);
        std::vector<double> x{1.0, 2.0};
        NnpnnResult fw = nnpnn_forward(g, f, x, zero);
        CHECK(fw.trace.size() == 1);
        CHECK(fw.trace[0].read == std::vector<double>{0, 0});
        for (double v : g.value(fw.output)) CHECK(std::isfinite(v));
    }

    SUBCASE("trace holds l*r pairs and reads re-evaluate exactly") {
        NnpnnConfig cfg = tiny_config(2, 4);
        ParamStore ps;
        Nnpnn f = nnpnn_init(rng, cfg, ps);
        Graph g(&ps);
        std::vector<double> x{0.25, -0.75};
        NnpnnResult fw = nnpnn_forward(g, f, x, target);
        REQUIRE(fw.trace.size() == 8);
        for (const QueryRead& qr : fw.trace) {
            CHECK(oracles::max_abs_diff(qr.read, oracles::naive_dense(target, qr.query)) <
                  1e-12);
        }
    }

    SUBCASE("phase inputs interleave reads and queries in order") {
        NnpnnConfig cfg = tiny_config(2, 3);
        ParamStore ps;
        Nnpnn f = nnpnn_init(rng, cfg, ps);
        Graph g(&ps);
        std::vector<double> x{0.25, -0.75};
        NnpnnResult fw = nnpnn_forward(g, f, x, target);
        REQUIRE(fw.phase_inputs.size() == 3);  // h_0, h_1, h_2
        CHECK(fw.phase_inputs[0] == x);
        for (int k = 0; k < 2; ++k) {
            std::vector<double> expect;
            for (int n = 0; n < 3; ++n) {
                const QueryRead& qr = fw.trace[k * 3 + n];
                expect.insert(expect.end(), qr.read.begin(), qr.read.end());
                expect.insert(expect.end(), qr.query.begin(), qr.query.end());
            }
            CHECK(fw.phase_inputs[k + 1] == expect);
        }
    }

    SUBCASE("input dimension mismatches are rejected") {
        NnpnnConfig cfg = tiny_config(1, 1);
        ParamStore ps;
        Nnpnn f = nnpnn_init(rng, cfg, ps);
        Graph g(&ps);
        std::vector<double> bad{1.0};
        CHECK_THROWS_AS(nnpnn_forward(g, f, bad, target), ShapeError);
    }
}

TEST_CASE("nnpnn_forward consults the target only through its io map") {
    Rng rng(61);
    TargetTemplate tmpl;
    DenseNetwork target = generate_nn(rng, tmpl);
    NnpnnConfig cfg = tiny_config(2, 2);
    ParamStore ps;
    Nnpnn f = nnpnn_init(rng, cfg, ps);
    std::vector<double> x{1.5, -0.5};

    Graph g(&ps);
    NnpnnResult with_net = nnpnn_forward(g, f, x, target);

    // Replay against a recorded lookup of the traced pairs.
    size_t cursor = 0;
    ReadFn lookup = [&](Graph& gg, VecNode q) {
        REQUIRE(cursor < with_net.trace.size());
        const QueryRead& qr = with_net.trace[cursor++];
        REQUIRE(gg.value(q) == qr.query);
        return gg.leaf(qr.read);
    };
    Graph g2(&ps);
    NnpnnResult with_lookup = nnpnn_forward_reads(g2, f, x, lookup, 2);
    CHECK(g.value(with_net.output) == g2.value(with_lookup.output));
}

TEST_CASE("nnpnn_forward matches the naive oracle") {
    Rng rng(71);
    for (int i = 0; i < 60; ++i) {
        NnpnnConfig cfg = tiny_config(rng.uniform_int(1, 2), rng.uniform_int(1, 3));
        TargetTemplate tmpl;
        DenseNetwork target = generate_nn(rng, tmpl);
        ParamStore ps;
        Nnpnn f = nnpnn_init(rng, cfg, ps);
        std::vector<double> x = random_input(rng, cfg.input_dim);

        Graph g(&ps);
        auto got = g.value(nnpnn_forward(g, f, x, target).output);
        auto want = oracles::naive_nnpnn(ps, f, x, target);
        CHECK(oracles::max_abs_diff(got, want) < 1e-12);
    }
}

TEST_CASE("seed-vector input is used when no numeric input is given") {
    Rng rng(81);
    TargetTemplate tmpl;
    DenseNetwork target = generate_nn(rng, tmpl);
    NnpnnConfig cfg = tiny_config(1, 2);
    cfg.input_dim = 0;
    cfg.seed_dim = 4;
    ParamStore ps;
    Nnpnn f = nnpnn_init(rng, cfg, ps);

    // Zero-initialized seed vector by contract.
    for (double v : ps.values(f.seed_vector)) CHECK(v == 0.0);

    Graph g(&ps);
    NnpnnResult fw = nnpnn_forward(g, f, std::nullopt, target);
    CHECK(fw.phase_inputs[0] == std::vector<double>(4, 0.0));
    CHECK(g.value(fw.output).size() == 2);

    // Passing a numeric input to a seed-only model is a structural error.
    Graph g2(&ps);
    std::vector<double> x{1.0, 2.0};
    CHECK_THROWS_AS(nnpnn_forward(g2, f, x, target), ShapeError);

    // The seed vector's gradient path is live.
    std::vector<double> targ{0.1, 0.2};
    double err = finite_diff_check(
        [&](Graph& gg, const ParamStore&) {
            return mse_loss(gg, nnpnn_forward(gg, f, std::nullopt, target).output, targ);
        },
        ps, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("whole-model gradients pass finite differences for l in {1,2}, r in {1,4}") {
    Rng rng(91);
    TargetTemplate tmpl;
    tmpl.hidden_width = 3;
    for (int l : {1, 2}) {
        for (int r : {1, 4}) {
            DenseNetwork target = generate_nn(rng, tmpl);
            NnpnnConfig cfg = tiny_config(l, r);
            ParamStore ps;
            Nnpnn f = nnpnn_init(rng, cfg, ps);
            std::vector<double> x{0.5, -1.0}, targ{0.2, -0.4};
            double err = finite_diff_check(
                [&](Graph& g, const ParamStore&) {
                    return mse_loss(g, nnpnn_forward(g, f, x, target).output, targ);
                },
                ps, 1e-5);
            CAPTURE(l);
            CAPTURE(r);
            CHECK(err < 1e-4);
        }
    }
}

TEST_CASE("append_phase_input switch widens later phases") {
    Rng rng(101);
    NnpnnConfig cfg = tiny_config(2, 2);
    cfg.append_phase_input = true;
    ParamStore ps;
    Nnpnn f = nnpnn_init(rng, cfg, ps);
    // phase 2 sees the pairs plus the previous phase input h_1
    CHECK(f.phases[1].block.sb1.d1.in_dim == 2 * (2 + 2) + cfg.phase1_input_dim());

    TargetTemplate tmpl;
    DenseNetwork target = generate_nn(rng, tmpl);
    Graph g(&ps);
    std::vector<double> x{1.0, -1.0};
    NnpnnResult fw = nnpnn_forward(g, f, x, target);
    CHECK(fw.phase_inputs[1].size() == 10);
    std::vector<double> tail(fw.phase_inputs[1].end() - 2, fw.phase_inputs[1].end());
    CHECK(tail == x);
}
