#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mv/io.hpp"
#include "mv/linalg.hpp"
#include "mv/system.hpp"

namespace mv {

struct OracleCell {
    std::vector<uint32_t> labels;              // sorted global labels
    std::vector<std::vector<int>> active;      // local ids per block
    std::vector<double> lambda;
    std::vector<double> xi;
    int64_t volume = 0;
};

struct OracleResult {
    std::vector<OracleCell> cells; // sorted by label list
    int64_t scaled_mv = 0;
};

namespace detail {

// Plain partial-pivot solve; returns false when a pivot collapses.
inline bool lu_solve(Matrix a, std::vector<double>& x) {
    const int n = a.n;
    const double tol = norm_inf(a) * n * 4.0 * kEpsMachine;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::fabs(a.at(i, col)) > std::fabs(a.at(piv, col))) piv = i;
        if (std::fabs(a.at(piv, col)) <= tol) return false;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a.at(piv, j), a.at(col, j));
            std::swap(x[piv], x[col]);
        }
        const double pinv = 1.0 / a.at(col, col);
        for (int i = col + 1; i < n; ++i) {
            const double f = a.at(i, col) * pinv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a.at(i, j) -= f * a.at(col, j);
            x[i] -= f * x[col];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = x[i];
        for (int j = i + 1; j < n; ++j) v -= a.at(i, j) * x[j];
        x[i] = v / a.at(i, i);
    }
    return true;
}

inline void fill_row(const SupportSystem& sys, int block, const Point& p, double* row) {
    const int s = sys.s;
    for (int k = 0; k < s + sys.n; ++k) row[k] = 0.0;
    row[block] = -1.0;
    for (int j = 0; j < sys.n; ++j) row[s + j] = static_cast<double>(p[j]);
}

} // namespace detail

// Brute force over every tuple of (m_i + 1)-subsets: solve the square active
// system and accept when all remaining points satisfy their inequality with a
// clear margin. Independent of the pivoting path.
inline OracleResult oracle_enumerate_cells(const SupportSystem& sys, const Lifting& lift) {
    validate_system(sys);
    const int s = sys.s, n = sys.n, N = s + n;

    double combos = 1.0;
    for (int i = 0; i < s; ++i) {
        const int k = static_cast<int>(sys.supports[i].size());
        const int take = sys.multiplicities[i] + 1;
        if (take > k) return {};
        double c = 1.0;
        for (int t = 0; t < take; ++t) c = c * (k - t) / (t + 1);
        combos *= c;
        if (combos > 1e7) throw InstanceTooLarge("oracle enumeration above the 1e7 guard");
    }

    const double margin_tol = n * kEps;
    OracleResult out;

    // Odometer over per-block combinations.
    std::vector<std::vector<int>> choice(s);
    for (int i = 0; i < s; ++i) {
        choice[i].resize(sys.multiplicities[i] + 1);
        for (size_t t = 0; t < choice[i].size(); ++t) choice[i][t] = static_cast<int>(t);
    }
    auto advance_block = [&](int i) -> bool {
        auto& c = choice[i];
        const int k = static_cast<int>(sys.supports[i].size());
        const int take = static_cast<int>(c.size());
        int pos = take - 1;
        while (pos >= 0 && c[pos] == k - take + pos) --pos;
        if (pos < 0) {
            for (int t = 0; t < take; ++t) c[t] = t;
            return false; // wrapped
        }
        ++c[pos];
        for (int t = pos + 1; t < take; ++t) c[t] = c[t - 1] + 1;
        return true;
    };

    Matrix C(N);
    std::vector<double> rhs(N);
    while (true) {
        int row = 0;
        for (int i = 0; i < s; ++i)
            for (int local : choice[i]) {
                detail::fill_row(sys, i, sys.supports[i][local], C.row(row));
                rhs[row] = lift.values[sys.label_of(i, local)];
                ++row;
            }
        std::vector<double> x = rhs;
        if (detail::lu_solve(C, x)) {
            bool feasible = true;
            for (int i = 0; i < s && feasible; ++i)
                for (size_t local = 0; local < sys.supports[i].size(); ++local) {
                    if (std::binary_search(choice[i].begin(), choice[i].end(),
                                           static_cast<int>(local)))
                        continue;
                    double v = -x[i];
                    const Point& p = sys.supports[i][local];
                    for (int j = 0; j < n; ++j) v += static_cast<double>(p[j]) * x[s + j];
                    const double margin = lift.values[sys.label_of(i, static_cast<int>(local))] - v;
                    if (margin > margin_tol) continue;
                    if (margin >= -margin_tol)
                        throw GenericityFailure("oracle margin tie at label " +
                                                std::to_string(sys.label_of(i, (int)local)));
                    feasible = false;
                    break;
                }
            if (feasible) {
                OracleCell cell;
                cell.active = choice;
                cell.lambda.assign(x.begin(), x.begin() + s);
                cell.xi.assign(x.begin() + s, x.end());
                for (int i = 0; i < s; ++i)
                    for (int local : choice[i])
                        cell.labels.push_back(static_cast<uint32_t>(sys.label_of(i, local)));
                std::sort(cell.labels.begin(), cell.labels.end());
                cell.volume = cell_normalized_volume(sys, cell.active);
                out.scaled_mv += cell.volume;
                out.cells.push_back(std::move(cell));
            }
        }
        // Next tuple.
        int i = s - 1;
        while (i >= 0 && !advance_block(i)) --i;
        if (i < 0) break;
    }
    std::sort(out.cells.begin(), out.cells.end(),
              [](const OracleCell& a, const OracleCell& b) { return a.labels < b.labels; });
    return out;
}

// The xi vectors of all accepted cells (the elements of X_n).
inline std::vector<std::vector<double>> oracle_mixed_vertices(const SupportSystem& sys,
                                                              const Lifting& lift) {
    std::vector<std::vector<double>> out;
    for (const auto& cell : oracle_enumerate_cells(sys, lift).cells) out.push_back(cell.xi);
    return out;
}

struct VerifyReport {
    bool ok = true;
    int64_t cells_checked = 0;
    std::string first_failure;
};

// Re-solves each cell's active system, re-checks every strict inequality,
// recomputes the exact volume and the total. `sys` must be the system the
// cells are written against (reduced coordinates when the run reduced).
inline VerifyReport verify_cells(const SupportSystem& sys, const Lifting& lift,
                                 const CellsFile& file) {
    VerifyReport report;
    const int s = sys.s, n = sys.n, N = s + n;
    auto fail = [&](const std::string& msg) {
        if (report.ok) {
            report.ok = false;
            report.first_failure = msg;
        }
    };
    if (file.n != n || file.s != s) {
        fail("cells file header does not match the system");
        return report;
    }
    const double margin_tol = n * kEps;
    int64_t volume_sum = 0;
    for (size_t idx = 0; idx < file.cells.size() && report.ok; ++idx) {
        const MixedCell& cell = file.cells[idx];
        const std::string tag = "cell " + std::to_string(idx);
        std::vector<std::vector<int>> active(s);
        for (uint32_t L : cell.labels) {
            if (static_cast<int>(L) >= sys.total_points()) {
                fail(tag + ": label out of range");
                break;
            }
            const int b = sys.block_of_label(static_cast<int>(L));
            active[b].push_back(static_cast<int>(L) - sys.label_offset[b]);
        }
        if (!report.ok) break;
        bool size_ok = static_cast<int>(cell.labels.size()) == n + s;
        for (int i = 0; i < s; ++i)
            if (static_cast<int>(active[i].size()) != sys.multiplicities[i] + 1) size_ok = false;
        if (!size_ok) {
            fail(tag + ": active set does not have type (m_1,...,m_s)");
            break;
        }
        Matrix C(N);
        std::vector<double> x(N);
        int row = 0;
        for (int i = 0; i < s; ++i)
            for (int local : active[i]) {
                detail::fill_row(sys, i, sys.supports[i][local], C.row(row));
                x[row] = lift.values[sys.label_of(i, local)];
                ++row;
            }
        if (!detail::lu_solve(C, x)) {
            fail(tag + ": active system is singular");
            break;
        }
        bool feasible = true;
        for (int i = 0; i < s && feasible; ++i)
            for (size_t local = 0; local < sys.supports[i].size(); ++local) {
                if (std::binary_search(active[i].begin(), active[i].end(),
                                       static_cast<int>(local)))
                    continue;
                double v = -x[i];
                const Point& p = sys.supports[i][local];
                for (int j = 0; j < n; ++j) v += static_cast<double>(p[j]) * x[s + j];
                if (lift.values[sys.label_of(i, static_cast<int>(local))] - v <= margin_tol) {
                    feasible = false;
                    fail(tag + ": inequality violated at label " +
                         std::to_string(sys.label_of(i, static_cast<int>(local))));
                }
            }
        if (!report.ok) break;
        int64_t vol = 0;
        try {
            vol = cell_normalized_volume(sys, active);
        } catch (const DegenerateCell&) {
            fail(tag + ": degenerate edge matrix");
            break;
        }
        if (vol != cell.volume) {
            fail(tag + ": stored volume " + std::to_string(cell.volume) + " != recomputed " +
                 std::to_string(vol));
            break;
        }
        volume_sum += vol;
        report.cells_checked++;
    }
    if (report.ok && volume_sum * file.index != file.scaled_mixed_volume)
        fail("scaled_mixed_volume " + std::to_string(file.scaled_mixed_volume) +
             " != sum of cell volumes times index " +
             std::to_string(volume_sum * file.index));
    return report;
}

} // namespace mv
