#pragma once

#include <cstddef>
#include <vector>

#include "dito/error.hpp"

namespace dito {

// Dense row-major matrix of doubles. All kernels below use a fixed
// left-to-right accumulation order per output element, so repeated runs are
// bit-identical.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    bool operator==(const Matrix& other) const = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);

// Row-wise softmax with per-row max subtraction; each output row sums to 1.
Matrix softmax_rows(const Matrix& m);

// Pairwise cosine similarities: entry (i, j) is the cosine of dst row i and
// src row j. Zero-norm rows get similarity 0 against everything.
Matrix cosine_similarity_map(const Matrix& dst_feats, const Matrix& src_feats);

// Copies the listed rows of m (in list order) into a new matrix.
Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& indices);

}  // namespace dito
