#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "mv/oracle.hpp"
#include "mv/parallel.hpp"

using namespace mv;

TEST_CASE("oracle on the 1-D fixture") {
    OracleResult res = oracle_enumerate_cells(fixtures::segment13(), fixtures::segment13_lifting());
    REQUIRE(res.cells.size() == 1);
    CHECK(res.scaled_mv == 3);
    CHECK(res.cells[0].xi[0] == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("oracle confirms the stretched-segment cell of volume 2") {
    auto sys = fixtures::make_system(2, {{{0, 0}, {1, 0}}, {{0, 0}, {0, 2}}}, {1, 1});
    Rng rng(8);
    auto lift = fixtures::random_lifting(rng, sys);
    OracleResult res = oracle_enumerate_cells(sys, lift);
    REQUIRE(res.cells.size() == 1);
    CHECK(res.scaled_mv == 2);
}

TEST_CASE("oracle on the two-triangle fixture") {
    OracleResult res = oracle_enumerate_cells(fixtures::f3(), fixtures::f3_lifting());
    CHECK(res.scaled_mv == 1);
}

TEST_CASE("oracle matches Bezout on dense quadratics") {
    std::vector<Point> quad = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    auto sys = fixtures::make_system(2, {quad, quad}, {1, 1});
    Rng rng(21);
    auto lift = fixtures::random_lifting(rng, sys);
    CHECK(oracle_enumerate_cells(sys, lift).scaled_mv == 4);
}

TEST_CASE("oracle volume is lifting invariant") {
    auto sys = fixtures::make_system(
        2, {{{0, 0}, {2, 0}, {0, 1}}, {{0, 0}, {1, 0}, {0, 2}}}, {1, 1});
    Rng rng(33);
    std::set<int64_t> mvs;
    for (int trial = 0; trial < 6; ++trial)
        mvs.insert(oracle_enumerate_cells(sys, fixtures::random_lifting(rng, sys)).scaled_mv);
    CHECK(mvs.size() == 1);
}

TEST_CASE("oracle guards oversized enumerations") {
    // 30 points in one block, m+1 = 16: C(30,16) ~ 1.45e8 > 1e7.
    std::vector<Point> pts;
    for (int i = 0; i < 30; ++i) {
        Point p(15, 0);
        p[0] = i; // keep the points distinct
        for (int j = 1; j < 15; ++j) p[j] = (i + j) % 4;
        pts.push_back(std::move(p));
    }
    SupportSystem sys = fixtures::make_system(15, {pts}, {15});
    Lifting lift;
    lift.values.assign(30, 0.5);
    CHECK_THROWS_AS(oracle_enumerate_cells(sys, lift), InstanceTooLarge);
}

TEST_CASE("cyclic-3 fixture reproduces the pinned mixed vertices") {
    auto sys = fixtures::cyclic3_fixture();
    auto lift = fixtures::cyclic3_lifting();
    auto vertices = oracle_mixed_vertices(sys, lift);
    REQUIRE(vertices.size() == 2);

    const std::vector<std::vector<double>> expected = {
        {1.7041246197535198e-01, -2.5568513445391900e-01, 5.2890946299653028e-01},
        {2.8794667050532442e-01, 4.9622307883564581e-01, -3.4053295882300698e-01},
    };
    for (const auto& want : expected) {
        bool found = false;
        for (const auto& got : vertices) {
            double rel = 0.0;
            for (int j = 0; j < 3; ++j)
                rel = std::max(rel, std::fabs(got[j] - want[j]) / std::fabs(want[j]));
            if (rel <= 1e-12) found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("engine and oracle agree on random instances") {
    Rng rng(909);
    int compared = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto sys = fixtures::random_instance(rng);
        auto lift = fixtures::random_lifting(rng, sys);
        OracleResult oracle;
        try {
            oracle = oracle_enumerate_cells(sys, lift);
        } catch (const GenericityFailure&) {
            continue;
        }
        RunOptions opt;
        opt.seed = 1;
        opt.lifting = lift;
        opt.retries = 0;
        RunResult engine;
        try {
            engine = all_mixed_cells_full(sys, opt);
        } catch (const GenericityFailure&) {
            continue;
        }
        ++compared;
        CHECK(engine.scaled_mv == oracle.scaled_mv);
        REQUIRE(engine.cells.size() == oracle.cells.size());
        for (size_t i = 0; i < engine.cells.size(); ++i) {
            CHECK(engine.cells[i].labels == oracle.cells[i].labels);
            CHECK(engine.cells[i].volume * engine.index == oracle.cells[i].volume);
        }
    }
    CHECK(compared >= 25);
}

TEST_CASE("verify_cells accepts engine output and rejects tampering") {
    RunOptions opt;
    opt.seed = 5;
    opt.lifting = fixtures::f3_lifting();
    RunResult res = all_mixed_cells_full(fixtures::f3(), opt);
    CellsFile file = cells_file_from_result(res);

    VerifyReport ok = verify_cells(res.traversal_system, res.lifting, file);
    CHECK(ok.ok);

    SUBCASE("tampered volume fails") {
        CellsFile bad = file;
        bad.cells[0].volume += 1;
        CHECK_FALSE(verify_cells(res.traversal_system, res.lifting, bad).ok);
    }
    SUBCASE("tampered total fails") {
        CellsFile bad = file;
        bad.scaled_mixed_volume += 1;
        CHECK_FALSE(verify_cells(res.traversal_system, res.lifting, bad).ok);
    }
    SUBCASE("swapped label fails") {
        CellsFile bad = file;
        // replace one active label with an inactive point of the same block
        auto& labels = bad.cells[0].labels;
        for (uint32_t cand = 0; cand < 3; ++cand) {
            if (std::binary_search(labels.begin(), labels.end(), cand)) continue;
            for (auto& L : labels)
                if (L < 3) {
                    L = cand;
                    break;
                }
            break;
        }
        std::sort(labels.begin(), labels.end());
        CHECK_FALSE(verify_cells(res.traversal_system, res.lifting, bad).ok);
    }
}
