#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <vector>

#include "mv/io.hpp"
#include "mv/traversal.hpp"

namespace mv {

constexpr uint64_t kStreamLifting = 1;
constexpr uint64_t kStreamFlag = 2;

struct RunOptions {
    uint64_t seed = 0;
    std::optional<uint64_t> flag_seed;     // draws Q and H from a separate stream
    std::optional<Lifting> lifting;        // explicit lifting; disables resampling
    bool use_hnf = true;
    bool rank1_check = false;
    bool naive_neighbors = false;
    bool verify_invariants = false;
    bool strict_sigma = false;
    int retries = 3;
    int workers = 1;
    InvariantProbe* probe = nullptr;
};

struct RunResult {
    SupportSystem traversal_system;     // reduced coordinates unless use_hnf was off
    LatticeReduction reduction;
    Lifting lifting;
    std::vector<MixedCell> cells;       // sorted by label list
    TraversalStats stats;
    int64_t index = 1;
    int64_t scaled_mv = 0;              // sum of cell volumes times the lattice index
    uint64_t seed = 0;
};

// Everything the traversal needs, fixed for one attempt and shared read-only
// across workers.
struct PreparedRun {
    SupportSystem sys;
    Lifting lifting;
    Schedule sched;
    PivotContext ctx;
    HashCoeffs H;
    std::vector<int> dims;
    std::vector<int64_t> volumes;
    std::vector<int> degrees;

    PreparedRun(const PreparedRun&) = delete;
    PreparedRun() = default;
};

namespace detail {

inline void prepare_attempt(PreparedRun& prep, const RunOptions& opt, uint64_t attempt,
                            uint64_t flag_attempt) {
    const int n = prep.sys.n;
    const int s = prep.sys.s;

    Rng rng_lift(mix_seed(opt.seed, kStreamLifting, attempt));
    if (opt.lifting) {
        if (static_cast<int>(opt.lifting->values.size()) != prep.sys.total_points())
            throw InputError("lifting size does not match the system");
        prep.lifting = *opt.lifting;
    } else {
        prep.lifting.values.resize(prep.sys.total_points());
        for (auto& v : prep.lifting.values) v = rng_lift.uniform01();
    }

    Rng rng_flag(mix_seed(opt.flag_seed.value_or(opt.seed), kStreamFlag, flag_attempt));
    prep.H.h.resize(2 * std::max(1, n));
    for (auto& h : prep.H.h) h = rng_flag.uniform01();
    Matrix Q = sample_orthogonal(rng_flag, n);

    // Per-support lower-hull pass: triangulation, skeleton, volume, pruning.
    prep.dims.assign(s, 0);
    prep.volumes.assign(s, 1);
    prep.degrees.assign(s, 0);
    std::vector<std::vector<uint32_t>> hull(s);
    std::vector<Skeleton> skeletons(s);
    for (int i = 0; i < s; ++i) {
        std::vector<double> values(prep.sys.supports[i].size());
        for (size_t k = 0; k < values.size(); ++k)
            values[k] = prep.lifting.values[prep.sys.label_of(i, static_cast<int>(k))];
        HullPass pass = lower_hull_pass(prep.sys.supports[i], values, rng_flag);
        prep.dims[i] = pass.dim;
        prep.volumes[i] = pass.volume;
        prep.degrees[i] = pass.skeleton.max_degree;
        hull[i] = std::move(pass.hull);
        skeletons[i] = std::move(pass.skeleton);
    }

    prep.sched = build_schedule(prep.sys, prep.dims, prep.volumes);

    prep.ctx = PivotContext{};
    prep.ctx.sys = &prep.sys;
    prep.ctx.lift = &prep.lifting;
    prep.ctx.sched = &prep.sched;
    prep.ctx.flag.q = std::move(Q);
    prep.ctx.flag.r.assign(n, 1.0);
    prep.ctx.hull = std::move(hull);
    prep.ctx.skeletons = std::move(skeletons);
    prep.ctx.naive_neighbors = opt.naive_neighbors;
    prep.ctx.prepare(prep.dims);
}

inline void finalize_stats(PreparedRun& prep, TraversalStats& stats) {
    stats.dims = prep.dims;
    stats.Vi = prep.volumes;
    stats.E = prep.degrees;
    stats.point_count = prep.sys.total_points();
    auto [T, Tp] = compute_T_stats(stats, prep.sys.n);
    stats.T = T;
    stats.T_prime = Tp;
}

inline void sort_cells(std::vector<MixedCell>& cells) {
    std::sort(cells.begin(), cells.end(),
              [](const MixedCell& a, const MixedCell& b) { return a.labels < b.labels; });
}

} // namespace detail

// Draw a lifting, the hash coefficients and the flag from the seed, run the
// per-support lower-hull passes and then the full traversal; resample the
// lifting on a genericity failure, up to the retry budget.
inline RunResult all_mixed_cells_full(const SupportSystem& input, const RunOptions& opt) {
    validate_system(input);
    RunResult result;
    result.seed = opt.seed;

    SupportSystem work = input;
    if (opt.use_hnf) {
        try {
            auto [reduced, red] = hermite_reduce(input);
            work = std::move(reduced);
            result.reduction = std::move(red);
            result.index = result.reduction.index;
        } catch (const RankDeficientLattice&) {
            result.traversal_system = input;
            result.scaled_mv = 0;
            result.stats.v.assign(input.n + 1, 0);
            return result; // mixed volume is 0, nothing to traverse
        }
    }

    const int max_attempts = std::max(1, opt.retries + 1);
    for (int attempt = 0;; ++attempt) {
        // A hash collision gets one retry with fresh H; a genericity failure
        // resamples the lifting (outer loop).
        for (int h_attempt = 0;; ++h_attempt) {
            try {
                PreparedRun prep;
                prep.sys = work;
                detail::prepare_attempt(prep, opt, static_cast<uint64_t>(attempt),
                                        static_cast<uint64_t>(2 * attempt + h_attempt));

                TraversalOptions topt;
                topt.verify_invariants = opt.verify_invariants;
                topt.rank1_check = opt.rank1_check;
                topt.strict_sigma = opt.strict_sigma;
                topt.probe = opt.probe;

                TraversalStats stats;
                std::vector<MixedCell> cells;
                const auto t0 = std::chrono::steady_clock::now();
                all_mixed_cells(
                    prep.ctx, prep.H,
                    [&](const LowerFacet&, MixedCell&& cell) { cells.push_back(std::move(cell)); },
                    stats, topt);
                stats.wall_seconds = std::chrono::duration<double>(
                                         std::chrono::steady_clock::now() - t0)
                                         .count();
                stats.lifting_attempts = attempt + 1;

                detail::finalize_stats(prep, stats);
                detail::sort_cells(cells);
                result.traversal_system = std::move(prep.sys);
                result.lifting = std::move(prep.lifting);
                result.cells = std::move(cells);
                result.stats = std::move(stats);
                result.scaled_mv = result.stats.volume_sum * result.index;
                return result;
            } catch (const GenericityFailure& err) {
                if (opt.lifting || attempt + 1 >= max_attempts) throw;
                std::cerr << "note: resampling the lifting (" << err.what() << ")\n";
                break;
            } catch (const HashCollision& err) {
                if (h_attempt >= 1) throw;
                std::cerr << "note: redrawing hash coefficients (" << err.what() << ")\n";
            }
        }
    }
}

// cmd-level helper: package a run for the MVCELLS writer.
inline CellsFile cells_file_from_result(const RunResult& result) {
    CellsFile file;
    file.seed = result.seed;
    file.n = result.traversal_system.n;
    file.s = result.traversal_system.s;
    file.index = result.index;
    file.scaled_mixed_volume = result.scaled_mv;
    file.cells = result.cells;
    return file;
}

} // namespace mv
