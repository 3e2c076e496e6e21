#include "doctest.h"

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "mv/driver.hpp"

using namespace mv;

TEST_CASE("hash_facet fixtures") {
    HashCoeffs H{{0.3, 0.6}};
    CHECK(hash_facet(H, {1, 2}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(hash_facet(H, {}) == 0.0);
    const double a = hash_facet(H, {1, 2});
    const double b = hash_facet(H, {1, 2});
    CHECK(a == b); // bit-exact
}

TEST_CASE("lower_hull_pass prunes the lifted interior point") {
    Rng rng(5);
    HullPass pass = lower_hull_pass({{0}, {1}, {3}}, {0.0, 0.9, 0.3}, rng);
    CHECK(pass.dim == 1);
    CHECK(pass.volume == 3);
    CHECK(pass.hull == std::vector<uint32_t>{0, 2});
    CHECK(pass.skeleton.max_degree == 1);
    REQUIRE(pass.cells.size() == 1);
    CHECK(pass.cells[0] == std::vector<uint32_t>{0, 2});
}

TEST_CASE("lower_hull_pass triangulates the unit square") {
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        Lifting lift;
        Rng lrng(100 + trial);
        std::vector<double> values(4);
        for (auto& v : values) v = lrng.uniform01();
        HullPass pass = lower_hull_pass({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, values, rng);
        CHECK(pass.dim == 2);
        CHECK(pass.volume == 2);
        CHECK(pass.cells.size() == 2);
        CHECK(pass.hull.size() == 4);
        CHECK(pass.skeleton.max_degree == 3); // both diagonal endpoints have degree 3
    }
}

TEST_CASE("lower_hull_pass on a single point") {
    Rng rng(1);
    HullPass pass = lower_hull_pass({{4, 5, 6}}, {0.77}, rng);
    CHECK(pass.dim == 0);
    CHECK(pass.volume == 1);
    CHECK(pass.hull == std::vector<uint32_t>{0});
    CHECK(pass.skeleton.max_degree == 0);
}

TEST_CASE("segment traversal finds one cell of volume 3") {
    RunOptions opt;
    opt.seed = 42;
    opt.verify_invariants = true;
    RunResult res = all_mixed_cells_full(fixtures::segment13(), opt);
    CHECK(res.scaled_mv == 3);
    CHECK(res.cells.size() == 1);
    CHECK(res.index == 3); // {0,3} generates the sublattice 3Z
    CHECK(res.cells[0].volume == 1);
}

TEST_CASE("Bezout system has one unit cell") {
    auto sys = fixtures::make_system(2, {{{0, 0}, {1, 0}}, {{0, 0}, {0, 1}}}, {1, 1});
    RunOptions opt;
    opt.seed = 7;
    opt.verify_invariants = true;
    RunResult res = all_mixed_cells_full(sys, opt);
    CHECK(res.scaled_mv == 1);
    CHECK(res.cells.size() == 1);
}

TEST_CASE("two-triangle fixture has mixed volume 1") {
    RunOptions opt;
    opt.seed = 3;
    opt.lifting = fixtures::f3_lifting();
    opt.verify_invariants = true;
    RunResult res = all_mixed_cells_full(fixtures::f3(), opt);
    CHECK(res.scaled_mv == 1);
    CHECK(res.cells.size() == 1);
}

TEST_CASE("dense quadratic pair gives the Bezout number 4") {
    // A_1 = A_2 = all monomials of degree <= 2 in two variables.
    std::vector<Point> quad = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    auto sys = fixtures::make_system(2, {quad, quad}, {1, 1});
    RunOptions opt;
    opt.seed = 11;
    RunResult res = all_mixed_cells_full(sys, opt);
    CHECK(res.scaled_mv == 4);
}

TEST_CASE("same seed reproduces the run bit for bit") {
    RunOptions opt;
    opt.seed = 123;
    RunResult a = all_mixed_cells_full(fixtures::f3(), opt);
    RunResult b = all_mixed_cells_full(fixtures::f3(), opt);
    REQUIRE(a.cells.size() == b.cells.size());
    for (size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].labels == b.cells[i].labels);
        CHECK(a.cells[i].xi0 == b.cells[i].xi0);
        CHECK(a.cells[i].lambda0 == b.cells[i].lambda0);
    }
    CHECK(a.lifting.values == b.lifting.values);
}

TEST_CASE("mixed volume is invariant across liftings") {
    auto sys = fixtures::make_system(
        2, {{{0, 0}, {2, 0}, {0, 1}}, {{0, 0}, {1, 0}, {0, 2}, {1, 1}}}, {1, 1});
    std::set<int64_t> mvs;
    for (uint64_t seed = 0; seed < 8; ++seed) {
        RunOptions opt;
        opt.seed = seed;
        mvs.insert(all_mixed_cells_full(sys, opt).scaled_mv);
    }
    CHECK(mvs.size() == 1);
}

TEST_CASE("cell set is invariant across flags for a fixed lifting") {
    auto sys = fixtures::make_system(
        2, {{{0, 0}, {2, 0}, {0, 1}}, {{0, 0}, {1, 0}, {0, 2}, {1, 1}}}, {1, 1});
    std::set<std::vector<std::vector<uint32_t>>> label_sets;
    for (uint64_t fs = 1; fs <= 5; ++fs) {
        RunOptions opt;
        opt.seed = 5;
        opt.flag_seed = fs * 1000;
        RunResult res = all_mixed_cells_full(sys, opt);
        std::vector<std::vector<uint32_t>> labels;
        for (const auto& c : res.cells) labels.push_back(c.labels);
        label_sets.insert(labels);
    }
    CHECK(label_sets.size() == 1);
}

TEST_CASE("skeleton and naive neighbor modes traverse identically") {
    Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        auto sys = fixtures::random_instance(rng);
        RunOptions a;
        a.seed = 50 + trial;
        RunOptions b = a;
        b.naive_neighbors = true;
        RunResult ra, rb;
        try {
            ra = all_mixed_cells_full(sys, a);
            rb = all_mixed_cells_full(sys, b);
        } catch (const GenericityFailure&) {
            continue;
        }
        REQUIRE(ra.cells.size() == rb.cells.size());
        for (size_t i = 0; i < ra.cells.size(); ++i)
            CHECK(ra.cells[i].labels == rb.cells[i].labels);
        CHECK(ra.stats.visited == rb.stats.visited);
        CHECK(ra.stats.v == rb.stats.v);
    }
}

TEST_CASE("hermite reduction does not change the reported volume") {
    auto sys = fixtures::cyclic3_fixture();
    RunOptions with;
    with.seed = 9;
    RunOptions without = with;
    without.use_hnf = false;
    RunResult a = all_mixed_cells_full(sys, with);
    RunResult b = all_mixed_cells_full(sys, without);
    CHECK(a.index == 3);
    CHECK(b.index == 1);
    CHECK(a.scaled_mv == b.scaled_mv);
    REQUIRE(a.cells.size() == b.cells.size());
    for (size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].labels == b.cells[i].labels);
        CHECK(a.cells[i].volume * a.index == b.cells[i].volume);
    }
}

TEST_CASE("rank-deficient supports short-circuit to volume 0") {
    auto sys = fixtures::make_system(2, {{{0, 0}, {1, 0}}, {{0, 0}, {3, 0}}}, {1, 1});
    RunOptions opt;
    opt.seed = 4;
    RunResult res = all_mixed_cells_full(sys, opt);
    CHECK(res.scaled_mv == 0);
    CHECK(res.cells.empty());
}

TEST_CASE("visited counts dominate the cell count and volumes add up") {
    RunOptions opt;
    opt.seed = 31;
    RunResult res = all_mixed_cells_full(fixtures::cyclic3_fixture(), opt);
    int64_t volume = 0;
    for (const auto& c : res.cells) volume += c.volume;
    CHECK(volume * res.index == res.scaled_mv);
    CHECK(res.stats.v.back() >= static_cast<int64_t>(res.cells.size()));
    CHECK(res.stats.visited >= res.stats.v.back());
}

TEST_CASE("compute_T_stats guards the degenerate logarithm") {
    TraversalStats stats;
    stats.v = {1, 1, 0, 0};
    stats.E = {1, 1, 1};
    stats.Vi = {1, 1, 1};
    stats.point_count = 6;
    auto [T, Tp] = compute_T_stats(stats, 3);
    CHECK(T == 0.0);
    CHECK(Tp == doctest::Approx(1.0 * (9.0 * 6 + 1.0)));
}

TEST_CASE("rank1 cross-check passes on small systems") {
    RunOptions opt;
    opt.seed = 77;
    opt.rank1_check = true;
    InvariantProbe probe;
    opt.probe = &probe;
    RunResult res = all_mixed_cells_full(fixtures::f3(), opt);
    CHECK(res.scaled_mv == 1);
    CHECK(probe.rank1_ok);
}

TEST_CASE("strict sigma mode reports collisions as errors") {
    Visited visited;
    visited.strict_sigma = true;
    CHECK(visited.insert(FacetKey{0.5, 111}));
    CHECK_THROWS_AS(visited.insert(FacetKey{0.5, 222}), HashCollision);
    Visited loose;
    CHECK(loose.insert(FacetKey{0.5, 111}));
    CHECK(loose.insert(FacetKey{0.5, 222})); // distinct facets kept apart
    CHECK(loose.sigma_dups == 1);
}

TEST_CASE("frontier rejects one key carrying two label lists") {
    Frontier frontier;
    CHECK(frontier.insert(FacetKey{0.25, 9}, {1, 2, 3}, nullptr));
    CHECK_FALSE(frontier.insert(FacetKey{0.25, 9}, {1, 2, 3}, nullptr)); // same facet
    CHECK_THROWS_AS(frontier.insert(FacetKey{0.25, 9}, {1, 2, 4}, nullptr), HashCollision);
}
