#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "mv/errors.hpp"
#include "mv/intlin.hpp"

namespace mv {

// A lattice point, length n.
using Point = std::vector<Coord>;

// The problem instance: s supports of integer points with multiplicities
// m_1 + ... + m_s = n. Points carry global 0-based labels in concatenation
// order A_1, A_2, ...
struct SupportSystem {
    int n = 0;
    int s = 0;
    std::vector<std::vector<Point>> supports;
    std::vector<int> multiplicities;
    std::vector<int> label_offset; // size s+1, prefix sums

    void rebuild_offsets() {
        label_offset.assign(1, 0);
        for (const auto& sup : supports)
            label_offset.push_back(label_offset.back() + static_cast<int>(sup.size()));
    }
    int total_points() const { return label_offset.empty() ? 0 : label_offset.back(); }
    int block_of_label(int label) const {
        int lo = 0, hi = s;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            (label_offset[mid] <= label ? lo : hi) = mid;
        }
        return lo;
    }
    int label_of(int block, int local) const { return label_offset[block] + local; }
    const Point& point_of_label(int label) const {
        int b = block_of_label(label);
        return supports[b][label - label_offset[b]];
    }
};

// One real value per global label.
struct Lifting {
    std::vector<double> values;
};

// Filling order for the multiplicities: m[d][i] for 0 <= d <= n, plus the
// block that gains its slot at each level.
struct Schedule {
    std::vector<int> order;            // scheduled position -> original block
    std::vector<std::vector<int>> m;   // m[d][i], indexed by original block
    std::vector<int> q;                // q[d] = block with m_q(d) = m_q(d-1)+1; q[0] = -1
};

inline void validate_system(const SupportSystem& sys) {
    if (sys.n <= 0) throw InputError("dimension n must be positive");
    if (sys.s <= 0) throw InputError("support count s must be positive");
    if (static_cast<int>(sys.supports.size()) != sys.s)
        throw InputError("support list size does not match s");
    if (static_cast<int>(sys.multiplicities.size()) != sys.s)
        throw InputError("multiplicity list size does not match s");
    long long msum = 0;
    for (int m : sys.multiplicities) {
        if (m < 0) throw InputError("multiplicity must be non-negative");
        msum += m;
    }
    if (msum != sys.n) throw InputError("multiplicities must sum to n");
    for (int i = 0; i < sys.s; ++i) {
        const auto& sup = sys.supports[i];
        if (sup.empty()) throw InputError("support " + std::to_string(i + 1) + " is empty");
        std::set<Point> seen;
        for (const auto& p : sup) {
            if (static_cast<int>(p.size()) != sys.n)
                throw InputError("point dimension mismatch in support " + std::to_string(i + 1));
            if (!seen.insert(p).second)
                throw InputError("duplicate point in support " + std::to_string(i + 1));
        }
    }
    if (static_cast<int>(sys.label_offset.size()) != sys.s + 1)
        throw InputError("label offsets not built");
}

// Change of coordinates into a basis of the lattice generated by the
// translated supports. Original point = coords * basis + translation.
struct LatticeReduction {
    std::vector<Point> translations;          // one per support
    std::vector<std::vector<Coord>> basis;    // n x n rows
    std::vector<int> pivot_col;
    int64_t index = 1;
    bool applied = false;

    Point unreduce(int block, const Point& reduced) const {
        if (!applied) return reduced;
        const int n = static_cast<int>(translations[block].size());
        Point out(translations[block]);
        for (size_t k = 0; k < reduced.size(); ++k)
            for (int j = 0; j < n; ++j) out[j] += reduced[k] * basis[k][j];
        return out;
    }
};

// Translate each support to contain the origin and rewrite all points in a
// basis of the lattice they generate. Throws when that lattice has rank < n
// (the mixed volume is 0 and the traversal assumes V >= 1).
inline std::pair<SupportSystem, LatticeReduction> hermite_reduce(const SupportSystem& sys) {
    LatticeReduction red;
    red.translations.resize(sys.s);
    std::vector<std::vector<Coord>> gens;
    for (int i = 0; i < sys.s; ++i) {
        red.translations[i] = *std::min_element(sys.supports[i].begin(), sys.supports[i].end());
        for (const auto& p : sys.supports[i]) {
            std::vector<Coord> d(sys.n);
            for (int j = 0; j < sys.n; ++j) d[j] = p[j] - red.translations[i][j];
            gens.push_back(std::move(d));
        }
    }
    LatticeBasis basis = lattice_basis(std::move(gens), sys.n);
    if (basis.rank < sys.n)
        throw RankDeficientLattice("supports span a lattice of rank " +
                                   std::to_string(basis.rank) + " < n; mixed volume is 0");
    red.basis = basis.rows;
    red.pivot_col = basis.pivot_col;
    red.index = basis.det;
    red.applied = true;

    SupportSystem out;
    out.n = sys.n;
    out.s = sys.s;
    out.multiplicities = sys.multiplicities;
    out.supports.resize(sys.s);
    LatticeBasis solver;
    solver.rows = red.basis;
    solver.pivot_col = red.pivot_col;
    solver.rank = sys.n;
    for (int i = 0; i < sys.s; ++i) {
        out.supports[i].reserve(sys.supports[i].size());
        for (const auto& p : sys.supports[i]) {
            std::vector<Coord> d(sys.n);
            for (int j = 0; j < sys.n; ++j) d[j] = p[j] - red.translations[i][j];
            out.supports[i].push_back(lattice_coords(solver, d));
        }
    }
    out.rebuild_offsets();
    return {std::move(out), std::move(red)};
}

// Support ordering and fill schedule: blocks sorted by (dimension, normalized
// volume, point count) ascending, ties by input order; the table fills one
// block at a time in that order.
inline Schedule build_schedule(const SupportSystem& sys,
                               const std::vector<int>& dims,
                               const std::vector<int64_t>& volumes) {
    Schedule sched;
    sched.order.resize(sys.s);
    std::iota(sched.order.begin(), sched.order.end(), 0);
    std::stable_sort(sched.order.begin(), sched.order.end(), [&](int a, int b) {
        if (dims[a] != dims[b]) return dims[a] < dims[b];
        if (volumes[a] != volumes[b]) return volumes[a] < volumes[b];
        return sys.supports[a].size() < sys.supports[b].size();
    });
    sched.m.assign(sys.n + 1, std::vector<int>(sys.s, 0));
    sched.q.assign(sys.n + 1, -1);
    for (int d = 1; d <= sys.n; ++d) {
        int left = d;
        for (int pos = 0; pos < sys.s; ++pos) {
            const int i = sched.order[pos];
            const int take = std::min(sys.multiplicities[i], left);
            sched.m[d][i] = take;
            left -= take;
            if (left == 0) break;
        }
        for (int i = 0; i < sys.s; ++i)
            if (sched.m[d][i] == sched.m[d - 1][i] + 1) sched.q[d] = i;
    }
    return sched;
}

// Exact normalized volume of a cell: |det| of the stacked edge matrix, rows
// a_k - a_0 for each block. Throws DegenerateCell on a zero determinant.
inline int64_t cell_normalized_volume(const SupportSystem& sys,
                                      const std::vector<std::vector<int>>& active_per_block) {
    std::vector<std::vector<Coord>> edges;
    edges.reserve(sys.n);
    for (int i = 0; i < sys.s; ++i) {
        const auto& act = active_per_block[i];
        const Point& base = sys.supports[i][act[0]];
        for (size_t k = 1; k < act.size(); ++k) {
            std::vector<Coord> e(sys.n);
            const Point& p = sys.supports[i][act[k]];
            for (int j = 0; j < sys.n; ++j) e[j] = p[j] - base[j];
            edges.push_back(std::move(e));
        }
    }
    if (static_cast<int>(edges.size()) != sys.n)
        throw InputError("cell edge matrix is not square");
    int64_t det = bareiss_det(std::move(edges));
    if (det == 0) throw DegenerateCell("cell with zero volume");
    return det < 0 ? -det : det;
}

} // namespace mv
