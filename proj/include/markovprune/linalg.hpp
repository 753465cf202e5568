#pragma once

// Just enough dense linear algebra for covariance-structure fitting. Sizes
// here are bounded by the graph-size cap, so simple O(n^3) routines are fine.

#include <cmath>
#include <cstddef>
#include <vector>

#include "markovprune/error.hpp"

namespace markovprune {

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
};

inline Mat matmul(const Mat& x, const Mat& y) {
    Mat out(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            double v = x(i, k);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
        }
    return out;
}

inline Mat transpose(const Mat& x) {
    Mat out(x.cols, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
    return out;
}

// Lower Cholesky factor of a symmetric positive-definite matrix.
inline Mat cholesky(const Mat& s) {
    std::size_t n = s.rows;
    Mat l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = s(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                if (!(sum > 0.0))
                    throw Error(Errc::numerical, "matrix is not positive definite");
                l(i, i) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return l;
}

inline double chol_logdet(const Mat& l) {
    double out = 0.0;
    for (std::size_t i = 0; i < l.rows; ++i) out += std::log(l(i, i));
    return 2.0 * out;
}

// Solves A x = b for SPD A given its Cholesky factor.
inline std::vector<double> chol_solve(const Mat& l, const std::vector<double>& b) {
    std::size_t n = l.rows;
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
        y[i] = sum / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double sum = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) sum -= l(k, ii) * x[k];
        x[ii] = sum / l(ii, ii);
    }
    return x;
}

inline Mat chol_inverse(const Mat& l) {
    std::size_t n = l.rows;
    Mat out(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        auto col = chol_solve(l, e);
        for (std::size_t i = 0; i < n; ++i) out(i, j) = col[i];
    }
    return out;
}

// (I - B)^{-1} for a coefficient matrix whose directed part is acyclic:
// the Neumann series terminates because B is nilpotent.
inline Mat dag_total_effects(const Mat& b) {
    std::size_t n = b.rows;
    Mat total = Mat::identity(n);
    Mat power = Mat::identity(n);
    for (std::size_t k = 0; k < n; ++k) {
        power = matmul(power, b);
        bool all_zero = true;
        for (double v : power.a)
            if (v != 0.0) { all_zero = false; break; }
        if (all_zero) break;
        for (std::size_t i = 0; i < total.a.size(); ++i) total.a[i] += power.a[i];
    }
    return total;
}

}  // namespace markovprune
