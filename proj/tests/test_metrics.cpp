#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "nnpnn/errors.hpp"
#include "nnpnn/metrics.hpp"
#include "nnpnn/rng.hpp"

using namespace nnpnn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path p = fs::temp_directory_path() / "nnpnn_metrics_test";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("manhattan_ratio values") {
    std::vector<double> t{2, 2};
    CHECK(*manhattan_ratio(t, t) == 0.0);

    std::vector<double> p{1, 1};
    CHECK(*manhattan_ratio(p, t) == doctest::Approx(0.5).epsilon(1e-15));

    std::vector<double> zero{0, 0};
    CHECK_FALSE(manhattan_ratio(p, zero).has_value());

    std::vector<double> short_vec{1};
    CHECK_THROWS_AS(manhattan_ratio(p, short_vec), ShapeError);
}

TEST_CASE("manhattan_ratio error scales linearly with the perturbation") {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        int dim = rng.uniform_int(1, 5);
        std::vector<double> target(dim), delta(dim);
        for (double& v : target) v = rng.uniform(-5, 5);
        for (double& v : delta) v = rng.uniform(-1, 1);
        double norm = 0;
        for (double v : target) norm += std::abs(v);
        if (norm == 0.0) continue;

        std::vector<double> p1(dim), p2(dim);
        for (int k = 0; k < dim; ++k) {
            p1[k] = target[k] + delta[k];
            p2[k] = target[k] + 2.0 * delta[k];
        }
        CHECK(*manhattan_ratio(p2, target) ==
              doctest::Approx(2.0 * *manhattan_ratio(p1, target)).epsilon(1e-12));
    }
}

TEST_CASE("summarize statistics") {
    SUBCASE("hand-checked three-sample set") {
        std::vector<double> s{0.05, 0.20, 0.30};
        EvalStats st = summarize(s);
        CHECK(st.mean == doctest::Approx(0.1833333333).epsilon(1e-9));
        CHECK(st.median == doctest::Approx(0.20).epsilon(1e-15));
        CHECK(st.frac_within_10 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(st.frac_within_25 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(st.trials == 3);
    }
    SUBCASE("all-equal samples collapse to that value") {
        std::vector<double> s{0.42, 0.42, 0.42, 0.42};
        EvalStats st = summarize(s);
        CHECK(st.mean == doctest::Approx(0.42));
        CHECK(st.median == doctest::Approx(0.42));
    }
    SUBCASE("even count medians average the central pair") {
        std::vector<double> s{1.0, 2.0, 3.0, 10.0};
        CHECK(summarize(s).median == doctest::Approx(2.5));
    }
    SUBCASE("empty input is a structural error") {
        std::vector<double> s;
        CHECK_THROWS_AS(summarize(s), ShapeError);
    }
    SUBCASE("permutation invariance") {
        Rng rng(31);
        std::vector<double> s(17);
        for (double& v : s) v = rng.uniform(0, 1);
        EvalStats a = summarize(s);
        std::vector<double> shuffled = s;
        std::reverse(shuffled.begin(), shuffled.end());
        std::swap(shuffled[0], shuffled[7]);
        EvalStats b = summarize(shuffled);
        CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
        CHECK(a.median == b.median);
        CHECK(a.frac_within_10 == b.frac_within_10);
        CHECK(a.frac_within_25 == b.frac_within_25);
    }
    SUBCASE("threshold fractions are ordered") {
        Rng rng(33);
        std::vector<double> s(101);
        for (double& v : s) v = rng.uniform(0, 0.5);
        EvalStats st = summarize(s);
        CHECK(st.frac_within_10 <= st.frac_within_25);
    }
}

TEST_CASE("csv writing and parsing") {
    fs::path dir = temp_dir();

    SUBCASE("empty history is a header-only file") {
        fs::path p = dir / "empty.csv";
        write_csv({}, p);
        CHECK(slurp(p) == "iteration,loss,ratio_mean,ratio_median,frac10,frac25\n");
        CHECK(parse_csv(p).empty());
    }
    SUBCASE("two rows make a three-line file that round-trips") {
        std::vector<MetricsRow> rows{{1000, 2.25, 0.5, 0.375, 0.125, 0.25},
                                     {2000, 1.0625, 0.25, 0.1875, 0.5, 0.75}};
        fs::path p = dir / "two.csv";
        write_csv(rows, p);
        std::string text = slurp(p);
        CHECK(std::count(text.begin(), text.end(), '\n') == 3);
        CHECK(text.back() == '\n');

        std::vector<MetricsRow> back = parse_csv(p);
        REQUIRE(back.size() == 2);
        fs::path p2 = dir / "two_again.csv";
        write_csv(back, p2);
        CHECK(slurp(p2) == text);
    }
    SUBCASE("writing the same history twice is byte-identical") {
        std::vector<MetricsRow> rows{{5, 0.1234567891234, 0.3, 0.2, 0.0, 1.0}};
        fs::path a = dir / "a.csv", b = dir / "b.csv";
        write_csv(rows, a);
        write_csv(rows, b);
        CHECK(slurp(a) == slurp(b));
    }
}
