#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mv/linalg.hpp"
#include "mv/rpoly.hpp"
#include "mv/system.hpp"

namespace mv {

// Affine flag at infinity: F_d = { xi : Q_{d+1} xi = R^{n-d} r_{d+1}, ..., Q_n xi = R r_n }
// with orthogonal rows Q and the scale R treated symbolically.
struct Flag {
    Matrix q;              // n x n, rows Q_1..Q_n (0-based)
    std::vector<double> r; // positive scales; all ones by default
};

// Lower-hull 1-skeleton of one lifted support; bounds the candidate set per pivot.
struct Skeleton {
    std::vector<std::vector<uint32_t>> adj; // per local point id, sorted neighbor ids
    int max_degree = 0;                     // E_i
};

struct Tolerances {
    double eps = kEps;          // working tolerance, 1e5 machine epsilons
    double zero_tol = 0.0;      // 2 (1 + max d_i)(n + s) eps; numerator/denominator flush
    double start_eq_tol = 0.0;  // tie tolerance for the start-facet maximization
};

// Immutable per-run data shared by all pivot operations (and all workers).
struct PivotContext {
    const SupportSystem* sys = nullptr;
    const Lifting* lift = nullptr;
    const Schedule* sched = nullptr;
    Flag flag;
    Tolerances tol;
    std::vector<std::vector<uint32_t>> hull; // per block: local ids on the lower hull, sorted
    std::vector<Skeleton> skeletons;         // per block; may be empty in naive mode
    bool naive_neighbors = false;

    // Sparse Cayley rows [-e_i | a] per global label: (column, value) pairs.
    std::vector<std::vector<std::pair<int, double>>> row_nz;

    int order() const { return sys->s + sys->n; }

    void prepare(const std::vector<int>& dims) {
        const int s = sys->s, n = sys->n;
        int maxd = 0;
        for (int d : dims) maxd = std::max(maxd, d);
        tol.zero_tol = 2.0 * (1.0 + maxd) * (n + s) * tol.eps;
        tol.start_eq_tol = tol.zero_tol;
        row_nz.assign(sys->total_points(), {});
        for (int i = 0; i < s; ++i)
            for (size_t k = 0; k < sys->supports[i].size(); ++k) {
                auto& nz = row_nz[sys->label_of(i, static_cast<int>(k))];
                nz.emplace_back(i, -1.0);
                const Point& p = sys->supports[i][k];
                for (int j = 0; j < n; ++j)
                    if (p[j] != 0) nz.emplace_back(s + j, static_cast<double>(p[j]));
            }
        if (hull.empty()) {
            hull.resize(s);
            for (int i = 0; i < s; ++i) {
                hull[i].resize(sys->supports[i].size());
                for (uint32_t k = 0; k < hull[i].size(); ++k) hull[i][k] = k;
            }
        }
    }
};

// One vertex of the exploration graph: s+d active constraints plus the flag
// rows Q_{d+1}..Q_n. Identity is the sorted label list; B, lambda0, xi0 are
// derived caches satisfying C_act (lambda0, xi0) = b_act with flag rhs zeroed.
struct LowerFacet {
    int level = 0;
    std::vector<uint32_t> active; // sorted global labels
    CertifiedInverse B;
    std::vector<double> lambda0;
    std::vector<double> xi0;
    std::vector<int> count;   // active points per block
    int over_block = -1;      // block with one extra active point (level >= 1)
    bool quota = false;       // counts match the schedule at this level
};

struct PivotOutcome {
    enum class Kind { Neighbor, Unbounded, Ineligible };
    Kind kind = Kind::Ineligible;
    std::vector<uint32_t> labels; // the neighbor's sorted active labels
    uint32_t entering = 0;
    int dropped_row = -1;
    double t0 = 0.0; // constant coefficient of the minimal score
};

namespace detail {

inline double sparse_dot_col(const PivotContext& ctx, uint32_t label, const Matrix& B, int col) {
    double s = 0.0;
    for (const auto& [k, v] : ctx.row_nz[label]) s += v * B.at(k, col);
    return s;
}

inline void assemble_cayley(const PivotContext& ctx, const std::vector<uint32_t>& labels,
                            int level, Matrix& C) {
    const int s = ctx.sys->s, n = ctx.sys->n;
    C = Matrix(s + n);
    for (size_t r = 0; r < labels.size(); ++r)
        for (const auto& [k, v] : ctx.row_nz[labels[r]]) C.at(static_cast<int>(r), k) = v;
    for (int k = level; k < n; ++k)
        for (int j = 0; j < n; ++j) C.at(s + k, s + j) = ctx.flag.q.at(k, j);
}

} // namespace detail

inline LowerFacet make_facet(const PivotContext& ctx, std::vector<uint32_t> labels) {
    const int s = ctx.sys->s, n = ctx.sys->n, N = s + n;
    LowerFacet f;
    f.active = std::move(labels);
    f.level = static_cast<int>(f.active.size()) - s;
    if (f.level < 0 || f.level > n)
        throw GenericityFailure("active set size " + std::to_string(f.active.size()) +
                                " does not fit any level");

    f.count.assign(s, 0);
    for (uint32_t L : f.active) f.count[ctx.sys->block_of_label(L)]++;

    const auto& mprev = f.level >= 1 ? ctx.sched->m[f.level - 1] : ctx.sched->m[0];
    f.over_block = -1;
    for (int i = 0; i < s; ++i) {
        if (f.count[i] < 1) throw GenericityFailure("block without active point");
        if (f.level == 0) continue;
        const int extra = f.count[i] - (mprev[i] + 1);
        if (extra == 1 && f.over_block < 0) {
            f.over_block = i;
        } else if (extra != 0) {
            throw GenericityFailure("facet type does not match the schedule");
        }
    }
    if (f.level >= 1 && f.over_block < 0)
        throw GenericityFailure("facet type does not match the schedule");
    f.quota = true;
    for (int i = 0; i < s; ++i)
        if (f.count[i] != ctx.sched->m[f.level][i] + 1) { f.quota = false; break; }

    Matrix C;
    detail::assemble_cayley(ctx, f.active, f.level, C);
    f.B = invert_certified(C);

    // (lambda0, xi0) = B * b_act with the flag right-hand sides zeroed.
    f.lambda0.assign(s, 0.0);
    f.xi0.assign(n, 0.0);
    const int rows = s + f.level;
    for (int k = 0; k < N; ++k) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r) acc += f.B.B.at(k, r) * ctx.lift->values[f.active[r]];
        (k < s ? f.lambda0[k] : f.xi0[k - s]) = acc;
    }
    return f;
}

// Level-0 facet: per block, the unique maximizer of a . xi(R) - b(i,a) along
// xi(R) = sum_k R^{n+1-k} r_k Q_k, compared as a polynomial in R.
inline LowerFacet start_facet(const PivotContext& ctx) {
    const int s = ctx.sys->s, n = ctx.sys->n;
    std::vector<uint32_t> labels;
    labels.reserve(s);
    for (int i = 0; i < s; ++i) {
        std::optional<RPoly> best;
        uint32_t best_local = 0;
        bool tie = false;
        for (uint32_t local : ctx.hull[i]) {
            const Point& a = ctx.sys->supports[i][local];
            std::vector<double> c(n + 1, 0.0);
            c[0] = -ctx.lift->values[ctx.sys->label_of(i, local)];
            for (int l = 1; l <= n; ++l) {
                const int qrow = n - l;
                double dot = 0.0;
                for (int j = 0; j < n; ++j) dot += ctx.flag.q.at(qrow, j) * a[j];
                c[l] = ctx.flag.r[qrow] * dot;
            }
            RPoly val(std::move(c), ctx.tol.start_eq_tol, 0.0);
            if (!best) {
                best = std::move(val);
                best_local = local;
            } else {
                const int cmp = rpoly_compare(*best, val);
                if (cmp == 0) tie = true;
                else if (cmp < 0) {
                    best = std::move(val);
                    best_local = local;
                    tie = false;
                }
            }
        }
        if (tie) throw GenericityFailure("tie in the start-facet maximization");
        labels.push_back(static_cast<uint32_t>(ctx.sys->label_of(i, best_local)));
    }
    std::sort(labels.begin(), labels.end());
    return make_facet(ctx, std::move(labels));
}

struct ScoredCandidate {
    uint32_t label = 0;
    RPoly t;
    double denom = 0.0;
    bool eligible = false;
};

// Inactive candidates for a pivot: per block, points adjacent (in the lifted
// lower-hull skeleton) to every remaining active point of that block; in
// naive mode, every inactive lower-hull point.
inline std::vector<uint32_t> pivot_candidates(const PivotContext& ctx, const LowerFacet& facet,
                                              std::optional<uint32_t> dropped_label) {
    const int s = ctx.sys->s;
    std::vector<uint32_t> out;
    std::vector<uint32_t> remaining;
    for (int i = 0; i < s; ++i) {
        remaining.clear();
        const int off = ctx.sys->label_offset[i];
        const int end = ctx.sys->label_offset[i + 1];
        for (uint32_t L : facet.active)
            if (static_cast<int>(L) >= off && static_cast<int>(L) < end &&
                !(dropped_label && L == *dropped_label))
                remaining.push_back(L - off);

        std::vector<uint32_t> pool;
        if (!ctx.naive_neighbors && !ctx.skeletons.empty()) {
            const Skeleton& sk = ctx.skeletons[i];
            pool = sk.adj[remaining[0]];
            std::vector<uint32_t> tmp;
            for (size_t k = 1; k < remaining.size() && !pool.empty(); ++k) {
                const auto& other = sk.adj[remaining[k]];
                tmp.clear();
                std::set_intersection(pool.begin(), pool.end(), other.begin(), other.end(),
                                      std::back_inserter(tmp));
                pool.swap(tmp);
            }
        } else {
            pool = ctx.hull[i];
        }
        for (uint32_t local : pool) {
            const uint32_t L = static_cast<uint32_t>(off + local);
            if (dropped_label && L == *dropped_label) continue;
            if (std::binary_search(facet.active.begin(), facet.active.end(), L)) continue;
            out.push_back(L);
        }
    }
    return out;
}

// Score polynomials t(i,a)(R) for dropping row j. Candidates whose
// denominator [-e_i, a] B e_j is flushed to zero are ineligible.
inline std::vector<ScoredCandidate> pivot_scores(const PivotContext& ctx, const LowerFacet& facet,
                                                 int drop_row,
                                                 const std::vector<uint32_t>& candidates) {
    const int s = ctx.sys->s, n = ctx.sys->n, N = s + n;
    const int d = facet.level;
    const Matrix& B = facet.B.B;

    // Columns used by every candidate: e_j and the flag columns s+d .. s+n-1.
    std::vector<double> colj(N);
    for (int k = 0; k < N; ++k) colj[k] = B.at(k, drop_row);
    std::vector<std::vector<double>> flagcols(n - d, std::vector<double>(N));
    for (int l = 1; l <= n - d; ++l) {
        const int col = s + n - l;
        for (int k = 0; k < N; ++k) flagcols[l - 1][k] = B.at(k, col);
    }

    std::vector<ScoredCandidate> out;
    out.reserve(candidates.size());
    for (uint32_t L : candidates) {
        ScoredCandidate sc;
        sc.label = L;
        double den = 0.0;
        for (const auto& [k, v] : ctx.row_nz[L]) den += v * colj[k];
        sc.denom = den;
        if (std::fabs(den) <= ctx.tol.zero_tol) {
            out.push_back(std::move(sc));
            continue;
        }
        const int block = ctx.sys->block_of_label(static_cast<int>(L));
        std::vector<double> num(n - d + 1, 0.0);
        {
            double v0 = -ctx.lift->values[L] - facet.lambda0[block];
            const Point& a = ctx.sys->point_of_label(static_cast<int>(L));
            for (int j = 0; j < n; ++j)
                if (a[j] != 0) v0 += static_cast<double>(a[j]) * facet.xi0[j];
            num[0] = v0;
        }
        for (int l = 1; l <= n - d; ++l) {
            double v = 0.0;
            for (const auto& [k, val] : ctx.row_nz[L]) v += val * flagcols[l - 1][k];
            num[l] = v * ctx.flag.r[n - l];
        }
        for (auto& v : num) {
            if (std::fabs(v) <= ctx.tol.zero_tol) v = 0.0;
            v /= den;
        }
        sc.t = RPoly(std::move(num), ctx.tol.eps / std::fabs(den), 0.0);
        sc.eligible = true;
        out.push_back(std::move(sc));
    }
    return out;
}

// Reusable buffers for the scoring loops; one per traversal, so a facet
// expansion allocates nothing in the hot path.
struct PivotWorkspace {
    std::vector<double> colj;                 // B e_j
    std::vector<double> flagcols;             // (n-d) x N, row l-1 holds B e_{s+n-l}
    std::vector<double> num;                  // score coefficients of one candidate
    std::vector<double> best;                 // current argmin coefficients
    std::vector<std::vector<uint32_t>> cand;  // per-block candidates, full remaining set
    std::vector<uint32_t> candq;              // over-quota block candidates per drop
    std::vector<uint32_t> rem;
    std::vector<uint32_t> flat;
};

namespace detail {

inline std::vector<uint32_t> replace_label(const std::vector<uint32_t>& labels, uint32_t out_label,
                                           uint32_t in_label) {
    std::vector<uint32_t> next;
    next.reserve(labels.size());
    for (uint32_t L : labels)
        if (L != out_label) next.push_back(L);
    next.insert(std::upper_bound(next.begin(), next.end(), in_label), in_label);
    return next;
}

// Candidates of one block: inactive lower-hull points adjacent to every
// remaining active point of the block (or all of them in naive mode).
inline void block_candidates(const PivotContext& ctx, const LowerFacet& facet, int block,
                             std::optional<uint32_t> dropped, PivotWorkspace& ws,
                             std::vector<uint32_t>& out) {
    out.clear();
    const int off = ctx.sys->label_offset[block];
    const int end = ctx.sys->label_offset[block + 1];
    ws.rem.clear();
    for (uint32_t L : facet.active)
        if (static_cast<int>(L) >= off && static_cast<int>(L) < end &&
            !(dropped && L == *dropped))
            ws.rem.push_back(L - off);
    auto is_active = [&](uint32_t L) {
        return std::binary_search(facet.active.begin(), facet.active.end(), L);
    };
    if (!ctx.naive_neighbors && !ctx.skeletons.empty()) {
        const Skeleton& sk = ctx.skeletons[block];
        for (uint32_t local : sk.adj[ws.rem[0]]) {
            bool ok = true;
            for (size_t k = 1; k < ws.rem.size() && ok; ++k)
                ok = std::binary_search(sk.adj[ws.rem[k]].begin(), sk.adj[ws.rem[k]].end(), local);
            if (!ok) continue;
            const uint32_t L = static_cast<uint32_t>(off + local);
            if ((dropped && L == *dropped) || is_active(L)) continue;
            out.push_back(L);
        }
    } else {
        for (uint32_t local : ctx.hull[block]) {
            const uint32_t L = static_cast<uint32_t>(off + local);
            if ((dropped && L == *dropped) || is_active(L)) continue;
            out.push_back(L);
        }
    }
}

// Fill ws.flagcols with the columns shared by every drop of one facet;
// must be called once per facet before detail::pivot_drop.
inline void cache_flag_columns(const PivotContext& ctx, const LowerFacet& facet,
                               PivotWorkspace& ws) {
    const int s = ctx.sys->s, n = ctx.sys->n, N = s + n;
    const int d = facet.level;
    ws.flagcols.resize(static_cast<size_t>(n - d) * N);
    for (int l = 1; l <= n - d; ++l) {
        const int col = s + n - l;
        double* row = ws.flagcols.data() + static_cast<size_t>(l - 1) * N;
        for (int k = 0; k < N; ++k) row[k] = facet.B.B.at(k, col);
    }
}

// Fused score + argmin over the flat candidate list. `ascend` selects the
// |t|-argmin over sign-definite scores; otherwise the min over positive ones.
inline PivotOutcome pivot_drop(const PivotContext& ctx, const LowerFacet& facet, int drop_row,
                               bool ascend, PivotWorkspace& ws) {
    const int s = ctx.sys->s, n = ctx.sys->n, N_ = s + n;
    const int d = facet.level;
    const int len = n - d + 1;
    const Matrix& B = facet.B.B;
    ws.colj.resize(N_);
    for (int k = 0; k < N_; ++k) ws.colj[k] = B.at(k, drop_row);
    ws.num.resize(len);
    ws.best.resize(len);

    bool found = false, tie = false;
    double best_eqtol = 0.0, best_t0 = 0.0;
    uint32_t best_label = 0;
    int shared_sign = 0;

    // Coefficients run top-down so a candidate drops out as soon as its sign
    // is wrong or it compares worse than the current argmin.
    for (uint32_t L : ws.flat) {
        double den = 0.0;
        for (const auto& [k, v] : ctx.row_nz[L]) den += v * ws.colj[k];
        if (std::fabs(den) <= ctx.tol.zero_tol) continue; // ineligible
        const double inv = 1.0 / den;
        const double eqtol = ctx.tol.eps * std::fabs(inv);
        const double cmp_tol = found ? std::max(eqtol, best_eqtol) : eqtol;

        int sign = 0;
        double scale = inv; // replaced by +-inv once the sign is known (ascent)
        int cmp = found ? 0 : -1;
        bool skip = false;
        for (int l = len - 1; l >= 0; --l) {
            double N;
            if (l == 0) {
                const int block = ctx.sys->block_of_label(static_cast<int>(L));
                N = -ctx.lift->values[L] - facet.lambda0[block];
                const Point& a = ctx.sys->point_of_label(static_cast<int>(L));
                for (int j = 0; j < n; ++j)
                    if (a[j] != 0) N += static_cast<double>(a[j]) * facet.xi0[j];
            } else {
                const double* col = ws.flagcols.data() + static_cast<size_t>(l - 1) * N_;
                double v = 0.0;
                for (const auto& [k, val] : ctx.row_nz[L]) v += val * col[k];
                N = v * ctx.flag.r[n - l];
            }
            double t;
            if (std::fabs(N) <= ctx.tol.zero_tol) {
                t = 0.0;
            } else {
                if (sign == 0) {
                    sign = (N > 0.0) == (den > 0.0) ? 1 : -1;
                    if (!ascend && sign != 1) {
                        skip = true;
                        break;
                    }
                    if (ascend) {
                        if (shared_sign == 0) shared_sign = sign;
                        else if (sign != shared_sign)
                            throw GenericityFailure("mixed score signs while ascending");
                        scale = sign > 0 ? inv : -inv;
                    }
                }
                t = N * scale;
            }
            ws.num[l] = t;
            if (cmp == 0) {
                const double diff = t - ws.best[l];
                if (std::fabs(diff) > cmp_tol) {
                    cmp = diff < 0.0 ? -1 : 1;
                    if (cmp > 0) {
                        skip = true;
                        break;
                    }
                }
            }
        }
        if (skip || sign == 0) continue;
        if (!found) {
            found = true;
            std::copy(ws.num.begin(), ws.num.end(), ws.best.begin());
            best_eqtol = eqtol;
            best_label = L;
            best_t0 = ws.num[0] * (ascend && sign < 0 ? -1.0 : 1.0);
        } else if (cmp == 0) {
            tie = true;
        } else if (cmp < 0) {
            std::copy(ws.num.begin(), ws.num.end(), ws.best.begin());
            best_eqtol = eqtol;
            best_label = L;
            best_t0 = ws.num[0] * (ascend && sign < 0 ? -1.0 : 1.0);
            tie = false;
        }
    }

    PivotOutcome out;
    out.dropped_row = drop_row;
    if (!found) {
        out.kind = PivotOutcome::Kind::Unbounded;
        return out;
    }
    if (tie) throw GenericityFailure("non-unique argmin in pivot");
    out.kind = PivotOutcome::Kind::Neighbor;
    out.entering = best_label;
    out.t0 = best_t0;
    if (ascend) {
        out.labels = facet.active;
        out.labels.insert(std::upper_bound(out.labels.begin(), out.labels.end(), best_label),
                          best_label);
    } else {
        out.labels = replace_label(facet.active, facet.active[drop_row], best_label);
    }
    return out;
}

} // namespace detail

// Release an active constraint of the over-quota block and slide along the
// edge of X'_d: the strictly positive score closest to zero blocks the edge
// and its constraint enters. No positive score means a half-line.
inline PivotOutcome pivot_within(const PivotContext& ctx, const LowerFacet& facet, int drop_row,
                                 PivotWorkspace* ws = nullptr) {
    PivotWorkspace local;
    PivotWorkspace& w = ws ? *ws : local;
    if (!ws) {
        detail::cache_flag_columns(ctx, facet, w);
        // standalone call: collect candidates here
        const uint32_t dropped = facet.active[drop_row];
        w.flat.clear();
        std::vector<uint32_t> blockcand;
        for (int i = 0; i < ctx.sys->s; ++i) {
            detail::block_candidates(ctx, facet, i,
                                     i == facet.over_block ? std::optional<uint32_t>(dropped)
                                                           : std::nullopt,
                                     w, blockcand);
            w.flat.insert(w.flat.end(), blockcand.begin(), blockcand.end());
        }
    }
    return detail::pivot_drop(ctx, facet, drop_row, false, w);
}

// Release the first flag row of a quota facet and ascend to a vertex of
// X'_{d+1}. All eligible scores share one sign; the minimal modulus enters.
inline PivotOutcome pivot_up(const PivotContext& ctx, const LowerFacet& facet,
                             PivotWorkspace* ws = nullptr) {
    const int s = ctx.sys->s, n = ctx.sys->n;
    if (!facet.quota || facet.level >= n) {
        PivotOutcome out;
        out.kind = PivotOutcome::Kind::Ineligible;
        return out;
    }
    PivotWorkspace local;
    PivotWorkspace& w = ws ? *ws : local;
    if (!ws) {
        detail::cache_flag_columns(ctx, facet, w);
        w.flat.clear();
        std::vector<uint32_t> blockcand;
        for (int i = 0; i < s; ++i) {
            detail::block_candidates(ctx, facet, i, std::nullopt, w, blockcand);
            w.flat.insert(w.flat.end(), blockcand.begin(), blockcand.end());
        }
    }
    return detail::pivot_drop(ctx, facet, s + facet.level, true, w);
}

// True iff the half-line released by dropping constraint j descends across
// F_d, i.e. this facet was reachable by an ascent through j. Used by the
// verification suite only; the traversal never explores downward.
inline bool pivot_down_check(const PivotContext& ctx, const LowerFacet& facet, int drop_row) {
    const int s = ctx.sys->s;
    if (facet.level < 1) return false;
    const uint32_t dropped = facet.active[drop_row];
    const auto cand = pivot_candidates(ctx, facet, dropped);
    const auto scores = pivot_scores(ctx, facet, drop_row, cand);
    for (const auto& sc : scores)
        if (sc.eligible && rpoly_sign(sc.t) == 1) return false;
    const int qrow = facet.level - 1;
    double dot = 0.0;
    for (int j = 0; j < ctx.sys->n; ++j)
        dot += ctx.flag.q.at(qrow, j) * facet.B.B.at(s + j, drop_row);
    return dot < 0.0;
}

// All outgoing edges: one within-level pivot per droppable constraint of the
// over-quota block, plus the ascent when the facet sits on the schedule.
// Candidate sets of the untouched blocks are shared across all drops.
inline std::vector<PivotOutcome> neighbors(const PivotContext& ctx, const LowerFacet& facet,
                                           PivotWorkspace* ws = nullptr) {
    PivotWorkspace local;
    PivotWorkspace& w = ws ? *ws : local;
    const int s = ctx.sys->s;
    detail::cache_flag_columns(ctx, facet, w);
    w.cand.resize(s);
    for (int i = 0; i < s; ++i) detail::block_candidates(ctx, facet, i, std::nullopt, w, w.cand[i]);

    std::vector<PivotOutcome> out;
    if (facet.level >= 1) {
        const int q = facet.over_block;
        const int off = ctx.sys->label_offset[q];
        const int end = ctx.sys->label_offset[q + 1];
        for (size_t r = 0; r < facet.active.size(); ++r) {
            const int L = static_cast<int>(facet.active[r]);
            if (L < off || L >= end) continue;
            detail::block_candidates(ctx, facet, q, facet.active[r], w, w.candq);
            w.flat.clear();
            for (int i = 0; i < s; ++i) {
                const auto& src = i == q ? w.candq : w.cand[i];
                w.flat.insert(w.flat.end(), src.begin(), src.end());
            }
            out.push_back(detail::pivot_drop(ctx, facet, static_cast<int>(r), false, w));
        }
    }
    if (facet.quota && facet.level < ctx.sys->n) {
        w.flat.clear();
        for (int i = 0; i < s; ++i) w.flat.insert(w.flat.end(), w.cand[i].begin(), w.cand[i].end());
        out.push_back(detail::pivot_drop(ctx, facet, s + facet.level, true, w));
    }
    return out;
}

// Balancing residual at a vertex: || sum_{j in J_q} Delta_j xi ||_inf relative
// to the largest direction. Zero for level-0 facets.
inline double balancing_ratio(const PivotContext& ctx, const LowerFacet& facet) {
    if (facet.level < 1) return 0.0;
    const int s = ctx.sys->s, n = ctx.sys->n;
    const int off = ctx.sys->label_offset[facet.over_block];
    const int end = ctx.sys->label_offset[facet.over_block + 1];
    std::vector<double> sum(n, 0.0);
    double maxdir = 0.0;
    for (size_t r = 0; r < facet.active.size(); ++r) {
        const int L = static_cast<int>(facet.active[r]);
        if (L < off || L >= end) continue;
        double rowmax = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = facet.B.B.at(s + j, static_cast<int>(r));
            sum[j] -= v;
            rowmax = std::max(rowmax, std::fabs(v));
        }
        maxdir = std::max(maxdir, rowmax);
    }
    double err = 0.0;
    for (double v : sum) err = std::max(err, std::fabs(v));
    return maxdir > 0.0 ? err / maxdir : err;
}

// || C_act (lambda0, xi0) - b_act ||_inf with the flag right-hand sides zeroed.
inline double consistency_residual(const PivotContext& ctx, const LowerFacet& facet) {
    const int s = ctx.sys->s, n = ctx.sys->n;
    double worst = 0.0;
    for (size_t r = 0; r < facet.active.size(); ++r) {
        double v = -ctx.lift->values[facet.active[r]];
        for (const auto& [k, val] : ctx.row_nz[facet.active[r]])
            v += val * (k < s ? facet.lambda0[k] : facet.xi0[k - s]);
        worst = std::max(worst, std::fabs(v));
    }
    for (int k = facet.level; k < n; ++k) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += ctx.flag.q.at(k, j) * facet.xi0[j];
        worst = std::max(worst, std::fabs(v));
    }
    return worst;
}

// Strict negativity of every inactive constraint, evaluated as a polynomial
// in R. Returns the first offending label, or nullopt when feasible.
inline std::optional<uint32_t> feasibility_violation(const PivotContext& ctx,
                                                     const LowerFacet& facet) {
    const int s = ctx.sys->s, n = ctx.sys->n;
    const int d = facet.level;
    for (int i = 0; i < s; ++i)
        for (uint32_t local : ctx.hull[i]) {
            const uint32_t L = static_cast<uint32_t>(ctx.sys->label_of(i, local));
            if (std::binary_search(facet.active.begin(), facet.active.end(), L)) continue;
            std::vector<double> c(n - d + 1, 0.0);
            double v0 = -ctx.lift->values[L] - facet.lambda0[i];
            const Point& a = ctx.sys->supports[i][local];
            for (int j = 0; j < n; ++j)
                if (a[j] != 0) v0 += static_cast<double>(a[j]) * facet.xi0[j];
            c[0] = v0;
            for (int l = 1; l <= n - d; ++l) {
                double v = 0.0;
                for (const auto& [k, val] : ctx.row_nz[L]) v += val * facet.B.B.at(k, s + n - l);
                c[l] = v * ctx.flag.r[n - l];
            }
            RPoly val(std::move(c), 0.0, ctx.tol.zero_tol);
            if (rpoly_sign(val) != -1) return L;
        }
    return std::nullopt;
}

// Rank-one construction of a neighbor facet from its parent, Lemma-style:
// C' = C - e_j v with v = (old row j) - (new row), B' by Sherman-Morrison,
// constants by the t0 update, then a column permutation into label order.
inline LowerFacet make_facet_rank1(const PivotContext& ctx, const LowerFacet& parent,
                                   const PivotOutcome& out) {
    const int s = ctx.sys->s, n = ctx.sys->n, N = s + n;
    const int j = out.dropped_row;

    std::vector<double> old_row(N, 0.0);
    if (j < s + parent.level) {
        for (const auto& [k, v] : ctx.row_nz[parent.active[j]]) old_row[k] = v;
    } else {
        const int qrow = j - s;
        for (int c = 0; c < n; ++c) old_row[s + c] = ctx.flag.q.at(qrow, c);
    }
    std::vector<double> v(N, 0.0);
    for (int k = 0; k < N; ++k) v[k] = old_row[k];
    for (const auto& [k, val] : ctx.row_nz[out.entering]) v[k] -= val;
    std::vector<double> u(N, 0.0);
    u[j] = 1.0;

    Matrix B1 = sherman_morrison(parent.B.B, u, v);

    LowerFacet f;
    f.active = out.labels;
    f.level = static_cast<int>(f.active.size()) - s;

    // Row r of the canonical neighbor matrix lives at position inplace(r) of
    // the updated parent matrix; permute columns of B accordingly.
    std::vector<int> inplace(N);
    {
        std::vector<std::pair<uint32_t, int>> rows; // (label, old position)
        for (int r = 0; r < s + parent.level; ++r)
            if (r != j) rows.emplace_back(parent.active[r], r);
        rows.emplace_back(out.entering, j);
        std::sort(rows.begin(), rows.end());
        for (size_t r = 0; r < rows.size(); ++r) inplace[r] = rows[r].second;
        // Flag rows: the neighbor keeps Q_{f.level}..Q_{n-1}, located at the
        // parent positions s + (their Q index).
        for (int k = f.level; k < n; ++k) inplace[s + k] = s + k;
    }
    Matrix B2(N);
    for (int c = 0; c < N; ++c)
        for (int k = 0; k < N; ++k) B2.at(k, c) = B1.at(k, inplace[c]);

    f.B.B = std::move(B2);
    f.B.refined = parent.B.refined;

    f.lambda0.resize(s);
    f.xi0.resize(n);
    for (int k = 0; k < N; ++k) {
        const double base = k < s ? parent.lambda0[k] : parent.xi0[k - s];
        const double upd = base - out.t0 * parent.B.B.at(k, j);
        (k < s ? f.lambda0[k] : f.xi0[k - s]) = upd;
    }

    f.count.assign(s, 0);
    for (uint32_t L : f.active) f.count[ctx.sys->block_of_label(L)]++;
    const auto& mprev = f.level >= 1 ? ctx.sched->m[f.level - 1] : ctx.sched->m[0];
    f.over_block = -1;
    for (int i = 0; i < s; ++i)
        if (f.level >= 1 && f.count[i] == mprev[i] + 2) f.over_block = i;
    f.quota = true;
    for (int i = 0; i < s; ++i)
        if (f.count[i] != ctx.sched->m[f.level][i] + 1) { f.quota = false; break; }

    Matrix C;
    detail::assemble_cayley(ctx, f.active, f.level, C);
    f.B.cond_estimate = norm_inf(C) * norm_inf(f.B.B);
    return f;
}

} // namespace mv
