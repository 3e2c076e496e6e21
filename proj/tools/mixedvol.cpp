// mixedvol: scaled mixed volumes and mixed cells of integer support systems.
//
// Subcommands:
//   gen      write a benchmark system in MVSYS format
//   compute  enumerate all mixed cells, write an MVCELLS file
//   oracle   brute-force enumeration for small instances
//   check    re-verify an MVCELLS file against its system

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mv/driver.hpp"
#include "mv/generators.hpp"
#include "mv/oracle.hpp"
#include "mv/parallel.hpp"

namespace {

mv::SupportSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mv::InputError("cannot open system file '" + path + "'");
    return mv::read_system(in);
}

mv::Lifting load_lifting(const std::string& path, int total_points) {
    std::ifstream in(path);
    if (!in) throw mv::InputError("cannot open lifting file '" + path + "'");
    return mv::read_lifting(in, total_points);
}

void print_stats(const mv::RunResult& res) {
    const auto& st = res.stats;
    std::cout << "n=" << res.traversal_system.n << "\n";
    std::cout << "s=" << res.traversal_system.s << "\n";
    std::cout << "points=" << st.point_count << "\n";
    int64_t sumE = 0;
    for (size_t i = 0; i < st.E.size(); ++i) {
        std::cout << "E_" << (i + 1) << "=" << st.E[i] << "\n";
        sumE += st.E[i];
    }
    std::cout << "sum_E=" << sumE << "\n";
    for (size_t d = 0; d < st.v.size(); ++d)
        if (st.v[d] != 0) std::cout << "v_" << d << "=" << st.v[d] << "\n";
    std::cout << "visited_facets=" << st.visited << "\n";
    std::cout << "T=" << mv::format_double(st.T) << "\n";
    std::cout << "T_prime=" << mv::format_double(st.T_prime) << "\n";
    std::cout << "cells=" << st.cells << "\n";
    std::cout << "index=" << res.index << "\n";
    std::cout << "reduced_volume=" << st.volume_sum << "\n";
    std::cout << "scaled_mixed_volume=" << res.scaled_mv << "\n";
    std::cout << "sigma_duplicates=" << st.sigma_duplicates << "\n";
    std::cout << "lifting_attempts=" << st.lifting_attempts << "\n";
    std::cout << "wall_time_s=" << mv::format_double(st.wall_seconds) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed volumes and mixed cells by tropical facet pivoting"};
    app.require_subcommand(1);

    // gen
    std::string gen_family, gen_out;
    int gen_n = 0;
    auto* gen = app.add_subcommand("gen", "generate a benchmark support system");
    gen->add_option("family", gen_family,
                    "one of cyclic, noon, chandra, katsura, eco, reimer, graphmodel")
        ->required();
    gen->add_option("n", gen_n, "family size parameter")->required();
    gen->add_option("-o,--output", gen_out, "output file (default: stdout)");

    // compute
    std::string comp_sys, comp_out, comp_lift;
    uint64_t comp_seed = 0;
    int comp_workers = 1, comp_retries = 3;
    bool comp_nohnf = false, comp_rank1 = false, comp_naive = false, comp_stats = false;
    auto* compute = app.add_subcommand("compute", "enumerate all mixed cells");
    compute->add_option("system", comp_sys, "MVSYS input file")->required();
    compute->add_option("-o,--output", comp_out, "MVCELLS output file (default: stdout)");
    compute->add_option("--seed", comp_seed, "random seed (default 0)");
    compute->add_option("--workers", comp_workers, "hash-partitioned worker count")
        ->check(CLI::PositiveNumber);
    compute->add_option("--retries", comp_retries, "lifting resamples after genericity failures");
    compute->add_option("--lifting", comp_lift, "explicit lifting file (label value per line)");
    compute->add_flag("--no-hnf", comp_nohnf, "skip the lattice reduction");
    compute->add_flag("--rank1", comp_rank1,
                      "cross-check rank-one inverse updates against fresh inversions");
    compute->add_flag("--naive-neighbors", comp_naive,
                      "score every inactive point instead of the hull skeleton");
    compute->add_flag("--stats", comp_stats, "print run statistics as key=value lines");

    // oracle
    std::string ora_sys, ora_lift;
    uint64_t ora_seed = 0;
    auto* oracle = app.add_subcommand("oracle", "brute-force cells of a small instance");
    oracle->add_option("system", ora_sys, "MVSYS input file")->required();
    oracle->add_option("--lifting", ora_lift, "explicit lifting file");
    oracle->add_option("--seed", ora_seed, "seed for a drawn lifting (default 0)");

    // check
    std::string chk_cells, chk_sys, chk_lift;
    bool chk_nohnf = false;
    int chk_retries = 3;
    auto* check = app.add_subcommand("check", "verify an MVCELLS file");
    check->add_option("cells", chk_cells, "MVCELLS file")->required();
    check->add_option("system", chk_sys, "MVSYS input file")->required();
    check->add_option("--lifting", chk_lift, "explicit lifting file used by the run");
    check->add_flag("--no-hnf", chk_nohnf, "the run skipped the lattice reduction");
    check->add_option("--retries", chk_retries,
                      "retry budget the run used (sets the liftings to try)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            mv::SupportSystem sys = mv::gen_family(gen_family, gen_n);
            if (gen_out.empty()) {
                mv::write_system(std::cout, sys);
            } else {
                std::ofstream out(gen_out);
                if (!out) throw mv::InputError("cannot open output file '" + gen_out + "'");
                mv::write_system(out, sys);
            }
            return 0;
        }

        if (*compute) {
            mv::SupportSystem sys = load_system(comp_sys);
            mv::RunOptions opt;
            opt.seed = comp_seed;
            opt.use_hnf = !comp_nohnf;
            opt.rank1_check = comp_rank1;
            opt.naive_neighbors = comp_naive;
            opt.retries = comp_retries;
            opt.workers = comp_workers;
            if (!comp_lift.empty()) opt.lifting = load_lifting(comp_lift, sys.total_points());
            mv::RunResult res = comp_workers > 1 ? mv::run_workers(sys, opt)
                                                 : mv::all_mixed_cells_full(sys, opt);
            mv::CellsFile file = mv::cells_file_from_result(res);
            if (comp_out.empty()) {
                mv::write_cells(std::cout, file, res.traversal_system);
            } else {
                std::ofstream out(comp_out);
                if (!out) throw mv::InputError("cannot open output file '" + comp_out + "'");
                mv::write_cells(out, file, res.traversal_system);
            }
            if (comp_stats) print_stats(res);
            return 0;
        }

        if (*oracle) {
            mv::SupportSystem sys = load_system(ora_sys);
            mv::Lifting lift;
            if (!ora_lift.empty()) {
                lift = load_lifting(ora_lift, sys.total_points());
            } else {
                mv::Rng rng(mv::mix_seed(ora_seed, mv::kStreamLifting, 0));
                lift.values.resize(sys.total_points());
                for (auto& v : lift.values) v = rng.uniform01();
            }
            mv::OracleResult res = mv::oracle_enumerate_cells(sys, lift);
            for (const auto& cell : res.cells) {
                std::cout << "cell " << cell.volume << " ;";
                for (uint32_t L : cell.labels) std::cout << ' ' << L;
                std::cout << " ; xi";
                for (double v : cell.xi) std::cout << ' ' << mv::format_double(v);
                std::cout << "\n";
            }
            std::cout << "cells=" << res.cells.size() << "\n";
            std::cout << "scaled_mixed_volume=" << res.scaled_mv << "\n";
            return 0;
        }

        if (*check) {
            mv::SupportSystem sys = load_system(chk_sys);
            std::ifstream in(chk_cells);
            if (!in) throw mv::InputError("cannot open cells file '" + chk_cells + "'");
            mv::CellsFile file = mv::read_cells(in);

            mv::SupportSystem work = sys;
            int64_t index = 1;
            if (!chk_nohnf) {
                try {
                    auto [reduced, red] = mv::hermite_reduce(sys);
                    work = std::move(reduced);
                    index = red.index;
                } catch (const mv::RankDeficientLattice&) {
                    if (file.cells.empty() && file.scaled_mixed_volume == 0) {
                        std::cout << "OK 0 cells, scaled_mixed_volume=0\n";
                        return 0;
                    }
                    throw mv::VerificationFailure(
                        "rank-deficient supports but the file claims cells");
                }
            }
            if (index != file.index)
                throw mv::VerificationFailure("lattice index mismatch: file says " +
                                              std::to_string(file.index) + ", system gives " +
                                              std::to_string(index));

            // The run may have resampled the lifting after genericity failures;
            // try the attempt sequence the driver would have drawn.
            mv::VerifyReport report;
            const int attempts = chk_lift.empty() ? std::max(1, chk_retries + 1) : 1;
            for (int attempt = 0; attempt < attempts; ++attempt) {
                mv::Lifting lift;
                if (!chk_lift.empty()) {
                    lift = load_lifting(chk_lift, work.total_points());
                } else {
                    mv::Rng rng(mv::mix_seed(file.seed, mv::kStreamLifting,
                                             static_cast<uint64_t>(attempt)));
                    lift.values.resize(work.total_points());
                    for (auto& v : lift.values) v = rng.uniform01();
                }
                report = mv::verify_cells(work, lift, file);
                if (report.ok) break;
            }
            if (!report.ok) {
                std::cerr << "FAIL " << report.first_failure << "\n";
                return 1;
            }
            std::cout << "OK " << report.cells_checked << " cells, scaled_mixed_volume="
                      << file.scaled_mixed_volume << "\n";
            return 0;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
