#include "nnpnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "nnpnn/errors.hpp"

namespace nnpnn {

std::optional<double> manhattan_ratio(std::span<const double> pred,
                                      std::span<const double> target) {
    if (pred.size() != target.size()) {
        throw ShapeError("manhattan_ratio: dim " + std::to_string(pred.size()) + " != " +
                         std::to_string(target.size()));
    }
    if (pred.empty()) throw ShapeError("manhattan_ratio: empty vectors");
    double err = 0.0, norm = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        err += std::abs(pred[i] - target[i]);
        norm += std::abs(target[i]);
    }
    if (norm == 0.0) return std::nullopt;
    return err / norm;
}

EvalStats summarize(std::span<const double> samples) {
    if (samples.empty()) throw ShapeError("summarize: empty sample set");
    EvalStats s;
    s.trials = static_cast<long long>(samples.size());

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    double sum = 0.0;
    long long n10 = 0, n25 = 0;
    for (double v : sorted) {
        sum += v;
        if (v <= 0.10) ++n10;
        if (v <= 0.25) ++n25;
    }
    s.mean = sum / static_cast<double>(sorted.size());
    size_t n = sorted.size();
    s.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    s.frac_within_10 = static_cast<double>(n10) / static_cast<double>(n);
    s.frac_within_25 = static_cast<double>(n25) / static_cast<double>(n);
    return s;
}

namespace {

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

void write_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("write_csv: cannot open " + path.string());
    out << "iteration,loss,ratio_mean,ratio_median,frac10,frac25\n";
    for (const MetricsRow& r : rows) {
        out << r.iteration << ',' << fmt9(r.loss) << ',' << fmt9(r.ratio_mean) << ','
            << fmt9(r.ratio_median) << ',' << fmt9(r.frac10) << ',' << fmt9(r.frac25)
            << '\n';
    }
    if (!out) throw IoError("write_csv: write failed for " + path.string());
}

std::vector<MetricsRow> parse_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("parse_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line != "iteration,loss,ratio_mean,ratio_median,frac10,frac25") {
        throw IoError("parse_csv: bad header in " + path.string());
    }
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        MetricsRow r;
        char c = 0;
        if (!(ss >> r.iteration >> c >> r.loss >> c >> r.ratio_mean >> c >>
              r.ratio_median >> c >> r.frac10 >> c >> r.frac25)) {
            throw IoError("parse_csv: bad row in " + path.string() + ": " + line);
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace nnpnn
