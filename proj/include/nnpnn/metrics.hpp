#ifndef NNPNN_METRICS_HPP
#define NNPNN_METRICS_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace nnpnn {

struct EvalStats {
    double mean = 0.0;
    double median = 0.0;
    double frac_within_10 = 0.0;  // fraction of samples <= 0.10
    double frac_within_25 = 0.0;  // fraction of samples <= 0.25
    long long trials = 0;
};

// Sum of absolute errors over the Manhattan norm of the target. A zero-norm
// target leaves the ratio undefined; nullopt tells the caller to draw a
// fresh trial instead of clamping.
std::optional<double> manhattan_ratio(std::span<const double> pred,
                                      std::span<const double> target);

// Mean, median (midpoint of the central pair for even counts) and the two
// threshold fractions. Throws on an empty sample set.
EvalStats summarize(std::span<const double> samples);

struct MetricsRow {
    long long iteration = 0;
    double loss = 0.0;
    double ratio_mean = 0.0;
    double ratio_median = 0.0;
    double frac10 = 0.0;
    double frac25 = 0.0;
};

// Training history: evaluation rows on the eval grid plus the raw
// per-iteration loss series (in-memory only; not serialized to CSV).
struct MetricsHistory {
    std::vector<MetricsRow> rows;
    std::vector<double> iter_losses;
};

// Header then one row per evaluation, 9-significant-digit decimals, every
// line newline-terminated. Writing the same rows twice yields identical
// bytes.
void write_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);

std::vector<MetricsRow> parse_csv(const std::filesystem::path& path);

}  // namespace nnpnn

#endif
