#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cimdet/errors.hpp"

namespace cimdet {

// Dense real matrix, row-major. Covers exactly what the detectors need:
// products, Gram matrices, a symmetric eigensolver and an SPD solve.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    bool square() const { return rows == cols; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm_sq(std::span<const double> x) { return dot(x, x); }

inline double norm(std::span<const double> x) { return std::sqrt(norm_sq(x)); }

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

inline Matrix matmul(const Matrix& x, const Matrix& y) {
    if (x.cols != y.rows) throw DimensionError("matmul: inner dimensions differ");
    Matrix out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int k = 0; k < x.cols; ++k) {
            const double v = x(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
        }
    }
    return out;
}

inline std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.cols) throw DimensionError("matvec: size mismatch");
    std::vector<double> out(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double* row = m.a.data() + static_cast<std::size_t>(i) * m.cols;
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += row[j] * x[j];
        out[i] = s;
    }
    return out;
}

// A' x without forming the transpose.
inline std::vector<double> matvec_t(const Matrix& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.rows) throw DimensionError("matvec_t: size mismatch");
    std::vector<double> out(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double* row = m.a.data() + static_cast<std::size_t>(i) * m.cols;
        const double v = x[i];
        for (int j = 0; j < m.cols; ++j) out[j] += row[j] * v;
    }
    return out;
}

// A' A.
inline Matrix gram(const Matrix& m) {
    Matrix g(m.cols, m.cols);
    for (int i = 0; i < m.cols; ++i) {
        for (int j = i; j < m.cols; ++j) {
            double s = 0.0;
            for (int k = 0; k < m.rows; ++k) s += m(k, i) * m(k, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return std::sqrt(s);
}

inline double max_abs(const Matrix& m) {
    double s = 0.0;
    for (double v : m.a) s = std::max(s, std::fabs(v));
    return s;
}

namespace detail {

inline void require_symmetric(const Matrix& m, double rel_tol, const char* who) {
    if (!m.square()) throw DimensionError(std::string(who) + ": matrix is not square");
    const double scale = max_abs(m);
    for (int i = 0; i < m.rows; ++i)
        for (int j = i + 1; j < m.cols; ++j)
            if (std::fabs(m(i, j) - m(j, i)) > rel_tol * std::max(scale, 1e-300))
                throw DimensionError(std::string(who) + ": matrix is not symmetric");
}

}  // namespace detail

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Matrices here are small (<= 2Nt, i.e. a few dozen), where Jacobi is robust
// and accurate to near machine precision.
inline std::vector<double> sym_eigenvalues(const Matrix& input) {
    detail::require_symmetric(input, 1e-9, "sym_eigenvalues");
    const int n = input.rows;
    Matrix m = input;
    // force exact symmetry so rotations stay consistent
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }

    const double scale = std::max(frobenius_norm(m), 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (std::fabs(apq) <= 1e-18 * scale) {
                    m(p, q) = 0.0;
                    m(q, p) = 0.0;
                    continue;
                }
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double sign = theta >= 0.0 ? 1.0 : -1.0;
                const double t = sign / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                m(p, p) -= t * apq;
                m(q, q) += t * apq;
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = m(r, p);
                    const double arq = m(r, q);
                    m(r, p) = arp - s * (arq + tau * arp);
                    m(p, r) = m(r, p);
                    m(r, q) = arq + s * (arp - tau * arq);
                    m(q, r) = m(r, q);
                }
            }
        }
    }

    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = m(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Lower Cholesky factor of an SPD matrix. A pivot at or below 1e-12 is
// treated as loss of positive definiteness.
inline Matrix cholesky_factor(const Matrix& m) {
    if (!m.square()) throw DimensionError("cholesky: matrix is not square");
    const int n = m.rows;
    Matrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 1e-12)) throw SingularMatrixError("cholesky: non-positive-definite pivot");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

inline std::vector<double> cholesky_solve(const Matrix& l, std::span<const double> b) {
    const int n = l.rows;
    if (static_cast<int>(b.size()) != n) throw DimensionError("cholesky_solve: size mismatch");
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

inline std::vector<double> spd_solve(const Matrix& m, std::span<const double> b) {
    return cholesky_solve(cholesky_factor(m), b);
}

inline Matrix spd_inverse(const Matrix& m) {
    const Matrix l = cholesky_factor(m);
    const int n = m.rows;
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        const std::vector<double> col = cholesky_solve(l, e);
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    return inv;
}

}  // namespace cimdet
