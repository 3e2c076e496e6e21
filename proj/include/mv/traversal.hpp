#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mv/pivot.hpp"
#include "mv/rng.hpp"

namespace mv {

// Hash coefficients drawn once per run and shared by all workers.
struct HashCoeffs {
    std::vector<double> h; // H_1..H_{2n}
};

// sigma(L) = (H_1 l_1 + ... + H_k l_k) mod 1, accumulated left to right so the
// value of a facet is bit-reproducible.
inline double hash_facet(const HashCoeffs& H, const std::vector<uint32_t>& labels) {
    double acc = 0.0;
    for (size_t j = 0; j < labels.size(); ++j) acc += H.h[j] * static_cast<double>(labels[j]);
    acc = std::fmod(acc, 1.0);
    if (acc < 0.0) acc += 1.0;
    return acc < 1.0 ? acc : 0.0;
}

// FNV-1a over the label list. sigma alone lives on a coarse floating-point
// grid (collisions are routine at millions of facets), so set keys carry this
// fingerprint alongside sigma.
inline uint64_t label_fingerprint(const std::vector<uint32_t>& labels) {
    uint64_t h = 1469598103934665603ULL;
    for (uint32_t L : labels)
        for (int b = 0; b < 4; ++b) {
            h ^= (L >> (8 * b)) & 0xffu;
            h *= 1099511628211ULL;
        }
    return h;
}

struct FacetKey {
    double sigma = 0.0;
    uint64_t fp = 0;
    friend bool operator<(const FacetKey& a, const FacetKey& b) {
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return a.fp < b.fp;
    }
    friend bool operator==(const FacetKey& a, const FacetKey& b) {
        return a.sigma == b.sigma && a.fp == b.fp;
    }
};

inline FacetKey facet_key(const HashCoeffs& H, const std::vector<uint32_t>& labels) {
    return FacetKey{hash_facet(H, labels), label_fingerprint(labels)};
}

// Pending facets ordered by sigma (balanced tree); entries carry the labels.
struct Frontier {
    std::map<FacetKey, std::vector<uint32_t>> entries;

    bool insert(const FacetKey& key, std::vector<uint32_t> labels, int64_t* sigma_dups) {
        auto it = entries.find(key);
        if (it != entries.end()) {
            if (it->second != labels)
                throw HashCollision("distinct facets share a hash key");
            return false;
        }
        if (sigma_dups) {
            auto lb = entries.lower_bound(FacetKey{key.sigma, 0});
            if (lb != entries.end() && lb->first.sigma == key.sigma) ++*sigma_dups;
        }
        entries.emplace(key, std::move(labels));
        return true;
    }
    bool empty() const { return entries.empty(); }
    std::pair<FacetKey, std::vector<uint32_t>> pop() {
        auto it = entries.begin();
        auto out = std::make_pair(it->first, std::move(it->second));
        entries.erase(it);
        return out;
    }
};

// Explored facets; only the key is kept.
struct Visited {
    std::set<FacetKey> keys;
    int64_t sigma_dups = 0;
    bool strict_sigma = false;

    bool contains(const FacetKey& k) const { return keys.count(k) != 0; }
    bool insert(const FacetKey& k) {
        auto it = keys.lower_bound(FacetKey{k.sigma, 0});
        if (it != keys.end() && it->sigma == k.sigma && it->fp != k.fp) {
            if (strict_sigma) throw HashCollision("distinct facets share sigma");
            ++sigma_dups;
        }
        return keys.insert(k).second;
    }
};

struct MixedCell {
    std::vector<uint32_t> labels; // sorted global labels
    int64_t volume = 0;           // |det| of the edge matrix, traversal coordinates
    std::vector<double> xi0;
    std::vector<double> lambda0;
};

struct TraversalStats {
    std::vector<int64_t> v;       // expansions per level, size n+1
    int64_t visited = 0;          // sum of v
    int64_t cells = 0;
    int64_t volume_sum = 0;       // sum of |det| in traversal coordinates
    std::vector<int> dims;        // d_i per support
    std::vector<int64_t> Vi;      // normalized volume per support
    std::vector<int> E;           // skeleton degree bound per support
    int64_t point_count = 0;      // total input points
    double T = 0.0;
    double T_prime = 0.0;
    double wall_seconds = 0.0;
    int64_t sigma_duplicates = 0;
    int lifting_attempts = 1;
};

// Test hook: collects invariant measurements while the traversal runs.
struct InvariantProbe {
    double max_balancing = 0.0;
    double max_consistency = 0.0;
    double max_rank1_dev = 0.0;
    bool rank1_ok = true;
    bool feasible = true;
    int64_t facets_checked = 0;
};

struct TraversalOptions {
    bool verify_invariants = false;
    bool rank1_check = false; // materialize neighbors by rank-one update and compare
    bool strict_sigma = false;
    InvariantProbe* probe = nullptr;
};

using CellSink = std::function<void(const LowerFacet&, MixedCell&&)>;

namespace detail {

inline MixedCell cell_from_facet(const PivotContext& ctx, const LowerFacet& f) {
    MixedCell cell;
    cell.labels = f.active;
    cell.xi0 = f.xi0;
    cell.lambda0 = f.lambda0;
    std::vector<std::vector<int>> per_block(ctx.sys->s);
    for (uint32_t L : f.active) {
        const int b = ctx.sys->block_of_label(static_cast<int>(L));
        per_block[b].push_back(static_cast<int>(L) - ctx.sys->label_offset[b]);
    }
    cell.volume = cell_normalized_volume(*ctx.sys, per_block);
    return cell;
}

inline void run_checks(const PivotContext& ctx, const LowerFacet& f,
                       const std::vector<PivotOutcome>& outs, const TraversalOptions& opt) {
    if (opt.verify_invariants) {
        const double bal = balancing_ratio(ctx, f);
        const double cons = consistency_residual(ctx, f);
        double xnorm = 1.0;
        for (double v : f.lambda0) xnorm = std::max(xnorm, std::fabs(v));
        for (double v : f.xi0) xnorm = std::max(xnorm, std::fabs(v));
        if (opt.probe) {
            opt.probe->max_balancing = std::max(opt.probe->max_balancing, bal);
            opt.probe->max_consistency = std::max(opt.probe->max_consistency, cons / xnorm);
            opt.probe->facets_checked++;
            if (feasibility_violation(ctx, f)) opt.probe->feasible = false;
        }
        if (bal > 1e-8) throw GenericityFailure("balancing invariant violated");
        const double cons_tol =
            std::max(ctx.sys->n * ctx.tol.eps, 4.0 * f.B.cond_estimate * kEpsMachine);
        if (cons > cons_tol * xnorm) throw GenericityFailure("ansatz consistency violated");
    }
    if (opt.rank1_check) {
        for (const auto& out : outs) {
            if (out.kind != PivotOutcome::Kind::Neighbor) continue;
            LowerFacet fast = make_facet_rank1(ctx, f, out);
            LowerFacet fresh = make_facet(ctx, out.labels);
            const double tol = 10.0 * std::max(fast.B.cond_estimate, fresh.B.cond_estimate) *
                               kEpsMachine;
            double dev = 0.0;
            for (size_t k = 0; k < fresh.B.B.a.size(); ++k)
                dev = std::max(dev, std::fabs(fresh.B.B.a[k] - fast.B.B.a[k]));
            if (opt.probe) {
                opt.probe->max_rank1_dev = std::max(opt.probe->max_rank1_dev, dev);
                if (dev > tol) opt.probe->rank1_ok = false;
            } else if (dev > tol) {
                throw GenericityFailure("rank-one update disagrees with fresh inversion");
            }
        }
    }
}

} // namespace detail

// Serial graph exploration: pop the pending facet with the smallest sigma,
// expand it once, emit mixed cells, push all neighbors.
inline void all_mixed_cells(const PivotContext& ctx, const HashCoeffs& H, const CellSink& sink,
                            TraversalStats& stats, const TraversalOptions& opt = {}) {
    const int n = ctx.sys->n;
    stats.v.assign(n + 1, 0);

    Frontier frontier;
    Visited visited;
    visited.strict_sigma = opt.strict_sigma;
    PivotWorkspace ws;

    LowerFacet start = start_facet(ctx);
    frontier.insert(facet_key(H, start.active), start.active, nullptr);

    const bool progress = std::getenv("MIXEDVOL_PROGRESS") != nullptr;
    int64_t expanded = 0;

    while (!frontier.empty()) {
        auto [key, labels] = frontier.pop();
        if (!visited.insert(key)) continue;
        LowerFacet f = make_facet(ctx, std::move(labels));
        stats.v[f.level]++;
        if (progress && (++expanded & 0xfffff) == 0)
            std::cerr << "progress: " << expanded << " facets expanded, frontier "
                      << frontier.entries.size() << ", cells " << stats.cells << "\n";
        if (f.level == n && f.quota) {
            MixedCell cell = detail::cell_from_facet(ctx, f);
            stats.cells++;
            stats.volume_sum += cell.volume;
            if (sink) sink(f, std::move(cell));
        }
        const auto outs = neighbors(ctx, f, &ws);
        detail::run_checks(ctx, f, outs, opt);
        for (const auto& out : outs) {
            if (out.kind != PivotOutcome::Kind::Neighbor) continue;
            FacetKey k = facet_key(H, out.labels);
            if (visited.contains(k)) continue;
            frontier.insert(k, out.labels, &visited.sigma_dups);
        }
    }
    stats.visited = 0;
    for (int64_t c : stats.v) stats.visited += c;
    stats.sigma_duplicates += visited.sigma_dups;
}

// Result of the per-support lower-hull pass.
struct HullPass {
    int dim = 0;                          // d_i, affine dimension of the support
    int64_t volume = 1;                   // V_i = d_i! Vol_{d_i}
    Skeleton skeleton;                    // lower-hull 1-skeleton on local ids
    std::vector<uint32_t> hull;           // local ids on the lower hull, sorted
    std::vector<std::vector<uint32_t>> cells; // triangulation simplices, local ids
};

// Runs the s = 1 traversal on one support in its own affine-hull lattice
// coordinates: yields the regular triangulation induced by the lifting, the
// sharp-edge skeleton, the normalized volume, and the lower-hull points.
inline HullPass lower_hull_pass(const std::vector<Point>& pts, const std::vector<double>& values,
                                Rng& rng) {
    HullPass out;
    const int npts = static_cast<int>(pts.size());
    out.skeleton.adj.assign(npts, {});
    if (npts == 1) {
        out.hull = {0};
        return out;
    }

    const Point& base = *std::min_element(pts.begin(), pts.end());
    std::vector<std::vector<Coord>> diffs;
    diffs.reserve(npts);
    const int ambient = static_cast<int>(base.size());
    for (const auto& p : pts) {
        std::vector<Coord> d(ambient);
        for (int j = 0; j < ambient; ++j) d[j] = p[j] - base[j];
        diffs.push_back(std::move(d));
    }
    LatticeBasis basis = lattice_basis(diffs, ambient);
    out.dim = basis.rank;
    if (out.dim == 0) {
        out.hull = {0};
        return out;
    }

    SupportSystem sub;
    sub.n = out.dim;
    sub.s = 1;
    sub.multiplicities = {out.dim};
    sub.supports.resize(1);
    for (const auto& d : diffs) sub.supports[0].push_back(lattice_coords(basis, d));
    sub.rebuild_offsets();

    Lifting sublift;
    sublift.values = values;

    Schedule sched;
    sched.order = {0};
    sched.m.assign(out.dim + 1, std::vector<int>(1, 0));
    sched.q.assign(out.dim + 1, 0);
    for (int d = 0; d <= out.dim; ++d) sched.m[d][0] = d;
    sched.q[0] = -1;

    PivotContext ctx;
    ctx.sys = &sub;
    ctx.lift = &sublift;
    ctx.sched = &sched;
    ctx.flag.q = sample_orthogonal(rng, out.dim);
    ctx.flag.r.assign(out.dim, 1.0);
    ctx.naive_neighbors = true;
    ctx.prepare({out.dim});

    HashCoeffs H;
    H.h.resize(2 * std::max(1, out.dim));
    for (auto& h : H.h) h = rng.uniform01();

    TraversalStats stats;
    out.volume = 0;
    all_mixed_cells(
        ctx, H,
        [&](const LowerFacet&, MixedCell&& cell) {
            out.volume += cell.volume;
            out.cells.push_back(cell.labels);
        },
        stats);

    std::set<uint32_t> on_hull;
    std::set<std::pair<uint32_t, uint32_t>> edges;
    for (const auto& cell : out.cells) {
        for (uint32_t a : cell) on_hull.insert(a);
        for (size_t i = 0; i < cell.size(); ++i)
            for (size_t j = i + 1; j < cell.size(); ++j)
                edges.emplace(std::min(cell[i], cell[j]), std::max(cell[i], cell[j]));
    }
    out.hull.assign(on_hull.begin(), on_hull.end());
    for (const auto& [a, b] : edges) {
        out.skeleton.adj[a].push_back(b);
        out.skeleton.adj[b].push_back(a);
    }
    for (auto& lst : out.skeleton.adj) {
        std::sort(lst.begin(), lst.end());
        out.skeleton.max_degree =
            std::max(out.skeleton.max_degree, static_cast<int>(lst.size()));
    }
    return out;
}

// T and T' from the run statistics; logarithms are natural and guarded below e.
inline std::pair<double, double> compute_T_stats(const TraversalStats& stats, int n) {
    double sumv = 0.0;
    for (size_t d = 2; d < stats.v.size(); ++d) sumv += static_cast<double>(stats.v[d]);
    double sumE = 0.0;
    for (int e : stats.E) sumE += e;
    const double T = sumv * (static_cast<double>(n) * n * sumE +
                             std::log(std::max(sumv, 2.718281828459045)));
    double maxV = 0.0;
    for (int64_t v : stats.Vi) maxV = std::max(maxV, static_cast<double>(v));
    const double Tp = maxV * (static_cast<double>(n) * n * static_cast<double>(stats.point_count) +
                              std::log(std::max(maxV, 2.718281828459045)));
    return {T, Tp};
}

} // namespace mv
