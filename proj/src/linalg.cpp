#include "dito/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace dito {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw shape_error("matmul: inner dimensions differ");
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        for (std::size_t j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) {
                acc += ai[k] * b.at(k, j);
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

Matrix softmax_rows(const Matrix& m) {
    if (m.rows == 0 || m.cols == 0) {
        throw shape_error("softmax_rows: empty matrix");
    }
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* src = m.row(i);
        double* dst = out.row(i);
        double row_max = src[0];
        for (std::size_t j = 1; j < m.cols; ++j) {
            if (src[j] > row_max) row_max = src[j];
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            dst[j] = std::exp(src[j] - row_max);
            sum += dst[j];
        }
        for (std::size_t j = 0; j < m.cols; ++j) {
            dst[j] /= sum;
        }
    }
    return out;
}

namespace {

double row_norm(const Matrix& m, std::size_t r) {
    double acc = 0.0;
    const double* p = m.row(r);
    for (std::size_t j = 0; j < m.cols; ++j) {
        acc += p[j] * p[j];
    }
    return std::sqrt(acc);
}

}  // namespace

Matrix cosine_similarity_map(const Matrix& dst_feats, const Matrix& src_feats) {
    if (dst_feats.cols != src_feats.cols) {
        throw shape_error("cosine_similarity_map: feature dimensions differ");
    }
    if (dst_feats.rows == 0 || src_feats.rows == 0) {
        throw shape_error("cosine_similarity_map: empty side");
    }
    std::vector<double> dst_norms(dst_feats.rows);
    std::vector<double> src_norms(src_feats.rows);
    for (std::size_t i = 0; i < dst_feats.rows; ++i) dst_norms[i] = row_norm(dst_feats, i);
    for (std::size_t j = 0; j < src_feats.rows; ++j) src_norms[j] = row_norm(src_feats, j);

    Matrix out(dst_feats.rows, src_feats.rows);
    for (std::size_t i = 0; i < dst_feats.rows; ++i) {
        const double* di = dst_feats.row(i);
        for (std::size_t j = 0; j < src_feats.rows; ++j) {
            if (dst_norms[i] == 0.0 || src_norms[j] == 0.0) {
                out.at(i, j) = 0.0;
                continue;
            }
            const double* sj = src_feats.row(j);
            double dot = 0.0;
            for (std::size_t k = 0; k < dst_feats.cols; ++k) {
                dot += di[k] * sj[k];
            }
            out.at(i, j) = dot / (dst_norms[i] * src_norms[j]);
        }
    }
    return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& indices) {
    Matrix out(indices.size(), m.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= m.rows) {
            throw shape_error("gather_rows: row index out of range");
        }
        const double* src = m.row(indices[i]);
        std::copy(src, src + m.cols, out.row(i));
    }
    return out;
}

}  // namespace dito
