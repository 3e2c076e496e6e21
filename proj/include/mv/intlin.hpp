#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

#include "mv/errors.hpp"

namespace mv {

using Coord = int64_t;

namespace detail {

using Wide = __int128;

inline Wide wide_abs(Wide v) { return v < 0 ? -v : v; }

// Guard against silent wrap-around; benchmark matrices stay far below this.
inline void check_wide(Wide v) {
    static const Wide limit = (Wide(1) << 120);
    if (wide_abs(v) > limit) throw InstanceTooLarge("integer overflow in exact arithmetic");
}

} // namespace detail

// Exact determinant of a square integer matrix by fraction-free (Bareiss)
// elimination. All intermediate values are minors of the input, so they stay
// integral; divisions are exact.
inline int64_t bareiss_det(std::vector<std::vector<Coord>> m) {
    using detail::Wide;
    const size_t n = m.size();
    if (n == 0) return 1;
    std::vector<std::vector<Wide>> a(n, std::vector<Wide>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) a[i][j] = m[i][j];

    Wide prev = 1;
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i) {
            for (size_t j = k + 1; j < n; ++j) {
                Wide num = a[i][j] * a[k][k] - a[i][k] * a[k][j];
                detail::check_wide(num);
                a[i][j] = num / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    Wide det = a[n - 1][n - 1];
    detail::check_wide(det);
    return sign * static_cast<int64_t>(det);
}

// Row-echelon basis of the lattice generated by a set of integer vectors
// (Hermite-style elimination with gcd pivots). `rows` lists the generators.
struct LatticeBasis {
    std::vector<std::vector<Coord>> rows; // rank x dim, echelon with positive pivots
    std::vector<int> pivot_col;           // strictly increasing, size rank
    int rank = 0;
    int64_t det = 1;                      // product of pivots (lattice index when rank == dim)
};

inline LatticeBasis lattice_basis(std::vector<std::vector<Coord>> gen, int dim) {
    LatticeBasis out;
    // Drop zero rows up front.
    std::vector<std::vector<Coord>> work;
    for (auto& g : gen) {
        bool z = true;
        for (Coord v : g)
            if (v != 0) { z = false; break; }
        if (!z) work.push_back(std::move(g));
    }
    size_t top = 0; // rows [0, top) are finished pivot rows
    for (int col = 0; col < dim && top < work.size(); ++col) {
        // Euclidean reduction in this column until one nonzero remains.
        while (true) {
            size_t best = work.size();
            for (size_t i = top; i < work.size(); ++i) {
                if (work[i][col] == 0) continue;
                if (best == work.size() ||
                    std::llabs(work[i][col]) < std::llabs(work[best][col]))
                    best = i;
            }
            if (best == work.size()) break; // column is clear
            std::swap(work[top], work[best]);
            Coord p = work[top][col];
            bool again = false;
            for (size_t i = top + 1; i < work.size(); ++i) {
                if (work[i][col] == 0) continue;
                Coord q = work[i][col] / p; // truncated quotient keeps |remainder| < |p|
                if (q != 0)
                    for (int j = 0; j < dim; ++j) {
                        detail::Wide v = detail::Wide(work[i][j]) - detail::Wide(q) * work[top][j];
                        detail::check_wide(v);
                        work[i][j] = static_cast<Coord>(v);
                    }
                if (work[i][col] != 0) again = true;
            }
            if (!again) break;
        }
        if (work[top][col] != 0) {
            if (work[top][col] < 0)
                for (int j = 0; j < dim; ++j) work[top][j] = -work[top][j];
            // Reduce entries above the pivot to keep the basis small.
            Coord p = work[top][col];
            for (size_t i = 0; i < top; ++i) {
                Coord q = work[i][col] >= 0 ? work[i][col] / p
                                            : -((-work[i][col] + p - 1) / p);
                if (q != 0)
                    for (int j = 0; j < dim; ++j) work[i][j] -= q * work[top][j];
            }
            out.pivot_col.push_back(col);
            ++top;
        }
    }
    work.resize(top);
    out.rows = std::move(work);
    out.rank = static_cast<int>(top);
    detail::Wide det = 1;
    for (int k = 0; k < out.rank; ++k) {
        det *= out.rows[k][out.pivot_col[k]];
        detail::check_wide(det);
    }
    out.det = static_cast<int64_t>(det);
    return out;
}

// Exact coordinates of `v` in the basis: c with c * rows == v.
// Throws InputError when v is not in the lattice.
inline std::vector<Coord> lattice_coords(const LatticeBasis& basis, const std::vector<Coord>& v) {
    const int dim = v.empty() ? 0 : static_cast<int>(v.size());
    std::vector<Coord> c(basis.rank, 0);
    std::vector<detail::Wide> rem(v.begin(), v.end());
    for (int k = 0; k < basis.rank; ++k) {
        const int col = basis.pivot_col[k];
        detail::Wide num = rem[col];
        Coord p = basis.rows[k][col];
        if (num % p != 0) throw InputError("vector not in lattice");
        detail::Wide q = num / p;
        detail::check_wide(q);
        c[k] = static_cast<Coord>(q);
        for (int j = 0; j < dim; ++j) rem[j] -= q * basis.rows[k][j];
    }
    for (int j = 0; j < dim; ++j)
        if (rem[j] != 0) throw InputError("vector not in lattice");
    return c;
}

} // namespace mv
