#ifndef NNPNN_TENSOR_HPP
#define NNPNN_TENSOR_HPP

#include <cstddef>
#include <vector>

namespace nnpnn {

// Row-major dense matrix. Rank 2 is the highest rank in this codebase.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c)
        : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

    double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return a.size(); }
};

}  // namespace nnpnn

#endif
