#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <vector>

#include "mv/errors.hpp"
#include "mv/rng.hpp"

namespace mv {

constexpr double kEpsMachine = std::numeric_limits<double>::epsilon();
// Working tolerance, 1e5 machine epsilons.
constexpr double kEps = 1.0e5 * kEpsMachine;

struct Matrix {
    int n = 0;
    std::vector<double> a; // row-major

    Matrix() = default;
    explicit Matrix(int order) : n(order), a(static_cast<size_t>(order) * order, 0.0) {}
    double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * n; }
    double* row(int i) { return a.data() + static_cast<size_t>(i) * n; }

    static Matrix identity(int order) {
        Matrix m(order);
        for (int i = 0; i < order; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline double norm_inf(const Matrix& m) {
    double best = 0.0;
    for (int i = 0; i < m.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < m.n; ++j) row += std::fabs(m.at(i, j));
        if (row > best) best = row;
    }
    return best;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    Matrix c(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int k = 0; k < a.n; ++k) {
            const double v = a.at(i, k);
            if (v == 0.0) continue;
            const double* brow = b.row(k);
            double* crow = c.row(i);
            for (int j = 0; j < a.n; ++j) crow[j] += v * brow[j];
        }
    return c;
}

// ||I - C*B||_inf in plain double arithmetic.
inline double residual_inf(const Matrix& C, const Matrix& B) {
    const int n = C.n;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            double s = (i == j) ? -1.0 : 0.0;
            for (int k = 0; k < n; ++k) s += C.at(i, k) * B.at(k, j);
            row += std::fabs(s);
        }
        if (row > best) best = row;
    }
    return best;
}

namespace detail {

// Compensated (double-double) accumulation: TwoSum plus FMA-based TwoProd.
struct DD {
    double hi = 0.0, lo = 0.0;
    void add_product(double x, double y) {
        const double p = x * y;
        const double perr = std::fma(x, y, -p);
        const double s = hi + p;
        const double bb = s - hi;
        const double serr = (hi - (s - bb)) + (p - bb);
        hi = s;
        lo += serr + perr;
    }
    void add(double x) {
        const double s = hi + x;
        const double bb = s - hi;
        lo += (hi - (s - bb)) + (x - bb);
        hi = s;
    }
    double value() const { return hi + lo; }
};

} // namespace detail

// Residual I - C*B with entries accumulated in at least twice working
// precision; used by the Newton recovery step.
inline Matrix residual_extended(const Matrix& C, const Matrix& B) {
    const int n = C.n;
    Matrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            detail::DD acc;
            acc.add(i == j ? 1.0 : 0.0);
            for (int k = 0; k < n; ++k) acc.add_product(-C.at(i, k), B.at(k, j));
            r.at(i, j) = acc.value();
        }
    return r;
}

struct CertifiedInverse {
    Matrix B;
    double cond_estimate = 0.0; // ||C||_inf * ||B||_inf
    bool refined = false;
};

// One or more Newton iterations B <- B + B(I - C B), residual in extended
// precision; stops when the residual no longer decreases or after 3 rounds.
inline Matrix refine_inverse(const Matrix& C, Matrix B, double accept_threshold) {
    Matrix R = residual_extended(C, B);
    double rnorm = norm_inf(R);
    for (int iter = 0; iter < 3 && rnorm > accept_threshold; ++iter) {
        Matrix next = B;
        const Matrix BR = multiply(B, R);
        for (size_t k = 0; k < next.a.size(); ++k) next.a[k] += BR.a[k];
        Matrix Rnext = residual_extended(C, next);
        const double rn = norm_inf(Rnext);
        if (rn >= rnorm) break;
        B = std::move(next);
        R = std::move(Rnext);
        rnorm = rn;
    }
    if (rnorm > accept_threshold) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3g", rnorm);
        throw IllConditioned(std::string("inverse residual ") + buf + " above threshold");
    }
    return B;
}

// Gauss-Jordan inverse with partial pivoting. The condition number is
// estimated as ||C||_inf * ||B||_inf; when cond * eps_machine exceeds the
// working tolerance the Newton recovery step runs and the result is
// certified against the residual threshold n * eps.
inline CertifiedInverse invert_certified(const Matrix& C) {
    const int n = C.n;
    const double cnorm = norm_inf(C);
    const double pivot_tol = cnorm * n * 4.0 * kEpsMachine;

    Matrix work = C;
    Matrix inv = Matrix::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::fabs(work.at(i, col)) > std::fabs(work.at(piv, col))) piv = i;
        const double p = work.at(piv, col);
        if (std::fabs(p) <= pivot_tol)
            throw SingularMatrix("pivot below tolerance at column " + std::to_string(col));
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(work.at(piv, j), work.at(col, j));
                std::swap(inv.at(piv, j), inv.at(col, j));
            }
        }
        const double pinv = 1.0 / p;
        for (int j = 0; j < n; ++j) {
            work.at(col, j) *= pinv;
            inv.at(col, j) *= pinv;
        }
        for (int i = 0; i < n; ++i) {
            if (i == col) continue;
            const double f = work.at(i, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                work.at(i, j) -= f * work.at(col, j);
                inv.at(i, j) -= f * inv.at(col, j);
            }
        }
    }

    CertifiedInverse out;
    out.cond_estimate = cnorm * norm_inf(inv);
    out.B = std::move(inv);
    if (out.cond_estimate * kEpsMachine > kEps) {
        // Newton recovery. A double-precision inverse cannot beat the
        // representability floor cond * eps_machine, so that floor bounds the
        // acceptance threshold from below.
        const double threshold = std::max(n * kEps, 4.0 * out.cond_estimate * kEpsMachine);
        out.B = refine_inverse(C, std::move(out.B), threshold);
        out.refined = true;
        out.cond_estimate = cnorm * norm_inf(out.B);
    }
    return out;
}

// (A - u v)^{-1} from B = A^{-1}: B + B u v B / (1 - v B u).
// u is a column, v a row. Throws SingularUpdate when 1 - vBu vanishes.
inline Matrix sherman_morrison(const Matrix& B, const std::vector<double>& u,
                               const std::vector<double>& v) {
    const int n = B.n;
    std::vector<double> Bu(n, 0.0), vB(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += B.at(i, k) * u[k];
        Bu[i] = s;
    }
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += v[k] * B.at(k, j);
        vB[j] = s;
    }
    double vBu = 0.0;
    for (int k = 0; k < n; ++k) vBu += v[k] * Bu[k];
    const double denom = 1.0 - vBu;
    if (std::fabs(denom) <= kEps * (1.0 + std::fabs(vBu)))
        throw SingularUpdate("rank-one update denominator vanished");
    const double f = 1.0 / denom;
    Matrix out = B;
    for (int i = 0; i < n; ++i) {
        const double fi = f * Bu[i];
        if (fi == 0.0) continue;
        double* row = out.row(i);
        for (int j = 0; j < n; ++j) row[j] += fi * vB[j];
    }
    return out;
}

// Haar-distributed orthogonal matrix: Gaussian entries (Box-Muller), then
// modified Gram-Schmidt on the rows with a positive-diagonal convention.
// Re-orthogonalized once, so ||Q Q^T - I||_inf stays near machine precision.
inline Matrix sample_orthogonal(Rng& rng, int n) {
    while (true) {
        Matrix q(n);
        for (auto& v : q.a) v = rng.gaussian();
        bool degenerate = false;
        for (int pass = 0; pass < 2 && !degenerate; ++pass) {
            for (int i = 0; i < n && !degenerate; ++i) {
                double* ri = q.row(i);
                for (int k = 0; k < i; ++k) {
                    const double* rk = q.row(k);
                    double dot = 0.0;
                    for (int j = 0; j < n; ++j) dot += ri[j] * rk[j];
                    for (int j = 0; j < n; ++j) ri[j] -= dot * rk[j];
                }
                double nrm = 0.0;
                for (int j = 0; j < n; ++j) nrm += ri[j] * ri[j];
                nrm = std::sqrt(nrm);
                if (nrm < 1e-12) {
                    degenerate = true; // measure-zero draw, resample
                    break;
                }
                const double inv = 1.0 / nrm;
                for (int j = 0; j < n; ++j) ri[j] *= inv;
            }
        }
        if (degenerate) continue;
        // R_ii > 0 convention: flip row signs so the factorization is unique.
        for (int i = 0; i < n; ++i)
            if (q.at(i, i) < 0.0)
                for (int j = 0; j < n; ++j) q.at(i, j) = -q.at(i, j);
        return q;
    }
}

} // namespace mv
