#pragma once

#include <atomic>
#include <barrier>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "mv/driver.hpp"

namespace mv {

// Worker k owns the lower facets with k <= N sigma(L) < k+1.
inline int owner_of(double sigma, int workers) {
    const int k = static_cast<int>(static_cast<double>(workers) * sigma);
    return k < 0 ? 0 : (k >= workers ? workers - 1 : k);
}

struct Envelope {
    int dest = 0;
    std::vector<uint32_t> labels;
};

// Message fabric between workers. No loss, no duplication; after barrier()
// every envelope sent before it is visible to its recipient's drain().
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(Envelope env) = 0;
    virtual std::vector<std::vector<uint32_t>> drain(int worker) = 0;
    virtual void barrier() = 0;
    virtual void reset() {}
};

class InProcessTransport : public Transport {
public:
    explicit InProcessTransport(int workers)
        : boxes_(workers), locks_(workers), gate_(workers) {}

    void send(Envelope env) override {
        if (env.dest < 0 || env.dest >= static_cast<int>(boxes_.size()))
            throw TransportError("envelope destination out of range");
        std::lock_guard<std::mutex> hold(locks_[env.dest]);
        boxes_[env.dest].push_back(std::move(env.labels));
    }
    std::vector<std::vector<uint32_t>> drain(int worker) override {
        std::lock_guard<std::mutex> hold(locks_[worker]);
        auto out = std::move(boxes_[worker]);
        boxes_[worker].clear();
        return out;
    }
    void barrier() override { gate_.arrive_and_wait(); }
    void reset() override {
        for (auto& b : boxes_) b.clear();
    }

private:
    std::vector<std::vector<std::vector<uint32_t>>> boxes_;
    std::vector<std::mutex> locks_;
    std::barrier<> gate_;
};

// True iff every worker's frontier is empty; with the flush barrier done,
// no envelope is in flight either, so the round reduction can stop.
inline bool quiescence(const std::vector<const Frontier*>& frontiers) {
    for (const Frontier* f : frontiers)
        if (f && !f->empty()) return false;
    return true;
}

namespace detail {

struct WorkerOutput {
    TraversalStats stats;
    std::vector<MixedCell> cells;
    int64_t sigma_dups = 0;
};

inline void worker_loop(int k, int N, const PreparedRun& prep, const TraversalOptions& topt,
                        Transport& transport, std::barrier<>& reduce_gate,
                        std::atomic<int> work_flags[2], std::atomic<bool>& abort,
                        std::mutex& fail_lock, std::exception_ptr& failure, WorkerOutput& out) {
    const PivotContext& ctx = prep.ctx;
    const int n = ctx.sys->n;
    out.stats.v.assign(n + 1, 0);

    Frontier frontier;
    Visited visited;
    visited.strict_sigma = topt.strict_sigma;
    PivotWorkspace ws;

    try {
        LowerFacet start = start_facet(ctx);
        const FacetKey skey = facet_key(prep.H, start.active);
        if (owner_of(skey.sigma, N) == k) frontier.insert(skey, start.active, nullptr);
    } catch (...) {
        abort.store(true);
        std::lock_guard<std::mutex> hold(fail_lock);
        if (!failure) failure = std::current_exception();
    }

    for (uint64_t round = 0;; ++round) {
        const int idx = static_cast<int>(round & 1);
        if (!abort.load()) {
            try {
                while (!frontier.empty()) {
                    auto [key, labels] = frontier.pop();
                    if (!visited.insert(key)) continue;
                    LowerFacet f = make_facet(ctx, std::move(labels));
                    out.stats.v[f.level]++;
                    if (f.level == n && f.quota) {
                        MixedCell cell = cell_from_facet(ctx, f);
                        out.stats.cells++;
                        out.stats.volume_sum += cell.volume;
                        out.cells.push_back(std::move(cell));
                    }
                    const auto outs = neighbors(ctx, f, &ws);
                    run_checks(ctx, f, outs, topt);
                    for (const auto& o : outs) {
                        if (o.kind != PivotOutcome::Kind::Neighbor) continue;
                        const double sigma = hash_facet(prep.H, o.labels);
                        transport.send(Envelope{owner_of(sigma, N), o.labels});
                    }
                    if (abort.load()) break;
                }
            } catch (...) {
                abort.store(true);
                std::lock_guard<std::mutex> hold(fail_lock);
                if (!failure) failure = std::current_exception();
            }
        }
        transport.barrier(); // every sent envelope is now visible
        try {
            for (auto& labels : transport.drain(k)) {
                const FacetKey key = facet_key(prep.H, labels);
                if (visited.contains(key)) continue;
                frontier.insert(key, std::move(labels), &visited.sigma_dups);
            }
        } catch (...) {
            abort.store(true);
            std::lock_guard<std::mutex> hold(fail_lock);
            if (!failure) failure = std::current_exception();
        }
        const bool local_work = !frontier.empty() && !abort.load();
        work_flags[idx].fetch_or(local_work ? 1 : 0);
        reduce_gate.arrive_and_wait();
        const bool work_to_do = work_flags[idx].load() != 0;
        work_flags[idx ^ 1].store(0);
        if (!work_to_do) break;
    }
    out.stats.visited = 0;
    for (int64_t c : out.stats.v) out.stats.visited += c;
    out.sigma_dups = visited.sigma_dups;
}

} // namespace detail

// Hash-partitioned traversal: N workers share one prepared run, exchange
// facets through the transport and stop on an or-reduction of work_to_do.
// The merged cell list is identical to the serial run's.
inline RunResult run_workers(const SupportSystem& input, const RunOptions& opt,
                             Transport* transport = nullptr) {
    validate_system(input);
    const int N = std::max(1, opt.workers);
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
            return result;
        }
    }

    std::unique_ptr<InProcessTransport> owned;
    const int max_attempts = std::max(1, opt.retries + 1);
    for (int attempt = 0;; ++attempt) {
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
                topt.probe = N == 1 ? opt.probe : nullptr;

                Transport* fabric = transport;
                if (!fabric) {
                    owned = std::make_unique<InProcessTransport>(N);
                    fabric = owned.get();
                } else {
                    fabric->reset();
                }

                std::barrier<> reduce_gate(N);
                std::atomic<int> work_flags[2] = {0, 0};
                std::atomic<bool> abort{false};
                std::mutex fail_lock;
                std::exception_ptr failure;
                std::vector<detail::WorkerOutput> outputs(N);

                const auto t0 = std::chrono::steady_clock::now();
                std::vector<std::thread> threads;
                threads.reserve(N);
                for (int k = 0; k < N; ++k)
                    threads.emplace_back([&, k] {
                        detail::worker_loop(k, N, prep, topt, *fabric, reduce_gate, work_flags,
                                            abort, fail_lock, failure, outputs[k]);
                    });
                for (auto& t : threads) t.join();
                if (failure) std::rethrow_exception(failure);

                TraversalStats stats;
                stats.v.assign(prep.sys.n + 1, 0);
                std::vector<MixedCell> cells;
                for (auto& o : outputs) {
                    for (size_t d = 0; d < o.stats.v.size(); ++d) stats.v[d] += o.stats.v[d];
                    stats.cells += o.stats.cells;
                    stats.volume_sum += o.stats.volume_sum;
                    stats.sigma_duplicates += o.sigma_dups;
                    for (auto& c : o.cells) cells.push_back(std::move(c));
                }
                stats.visited = 0;
                for (int64_t c : stats.v) stats.visited += c;
                stats.wall_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                stats.lifting_attempts = attempt + 1;

                detail::finalize_stats(prep, stats);
                detail::sort_cells(cells);
                result.traversal_system = std::move(prep.sys);
                result.lifting = std::move(prep.lifting);
                result.cells = std::move(cells);
                result.stats = std::move(stats);
                result.scaled_mv = result.stats.volume_sum * result.index;
                return result;
            } catch (const GenericityFailure&) {
                if (opt.lifting || attempt + 1 >= max_attempts) throw;
                break;
            } catch (const HashCollision&) {
                if (h_attempt >= 1) throw;
            }
        }
    }
}

} // namespace mv
