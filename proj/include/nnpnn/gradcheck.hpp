#ifndef NNPNN_GRADCHECK_HPP
#define NNPNN_GRADCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace nnpnn {

struct GradCheckSuite {
    std::string name;
    int configs = 0;
    double max_rel_error = 0.0;
    std::string worst_case;  // provenance of the worst configuration
};

struct GradCheckReport {
    std::vector<GradCheckSuite> suites;
    double threshold = 1e-4;
    double eps = 1e-5;

    int total_configs() const;
    double worst_error() const;
    bool passed() const { return worst_error() < threshold; }
};

// Finite-difference sweeps over randomized dense networks, sub-blocks, full
// hosts (l in {1,2} x r in {1,4}) and meta networks. `per_suite` scales the
// number of randomized configurations per suite. `inject_fault`, used by
// tests, corrupts one analytic gradient so the failure path is exercised.
GradCheckReport run_gradcheck(uint64_t seed, int per_suite, bool inject_fault = false);

}  // namespace nnpnn

#endif
