#include "doctest.h"

#include "mv/intlin.hpp"

using namespace mv;

TEST_CASE("bareiss determinant on small fixtures") {
    CHECK(bareiss_det({{1, 0}, {0, 1}}) == 1);
    CHECK(bareiss_det({{0, 2}, {1, 0}}) == -2);
    CHECK(bareiss_det({{2, 0}, {0, 3}}) == 6);
    CHECK(bareiss_det({{1, 2}, {2, 4}}) == 0);
    CHECK(bareiss_det({{3, 1, 4}, {1, 5, 9}, {2, 6, 5}}) == -90);
    CHECK(bareiss_det({}) == 1);
}

TEST_CASE("bareiss stays exact where doubles would round") {
    // Hilbert-like integer matrix with determinant known by cofactor expansion.
    std::vector<std::vector<Coord>> m = {
        {10000000, 9999999, 0},
        {9999999, 10000000, 0},
        {0, 0, 1},
    };
    CHECK(bareiss_det(m) == 19999999);
}

TEST_CASE("lattice basis of an even sublattice") {
    LatticeBasis b = lattice_basis({{2}}, 1);
    REQUIRE(b.rank == 1);
    CHECK(b.det == 2);
    CHECK(lattice_coords(b, {4}) == std::vector<Coord>{2});
    CHECK_THROWS_AS(lattice_coords(b, {3}), InputError);
}

TEST_CASE("lattice basis rank and index") {
    // e1, e2 and e1+e2 generate Z^2.
    LatticeBasis b = lattice_basis({{1, 0}, {0, 1}, {1, 1}}, 2);
    CHECK(b.rank == 2);
    CHECK(b.det == 1);

    // Sum-zero plus diagonal: index-3 sublattice of Z^3 (coordinate sums = 0 mod 3).
    LatticeBasis c = lattice_basis({{1, -1, 0}, {0, 1, -1}, {1, 1, 1}}, 3);
    CHECK(c.rank == 3);
    CHECK(c.det == 3);

    // Rank-deficient set.
    LatticeBasis d = lattice_basis({{1, 1, 0}, {2, 2, 0}, {-1, -1, 0}}, 3);
    CHECK(d.rank == 1);
}

TEST_CASE("lattice coordinates round-trip") {
    LatticeBasis b = lattice_basis({{2, 1, 0}, {0, 3, 1}, {0, 0, 5}}, 3);
    REQUIRE(b.rank == 3);
    std::vector<Coord> v = {4, 8, 7};
    // v = 2*(2,1,0) + 2*(0,3,1) + 1*(0,0,5)
    auto c = lattice_coords(b, v);
    std::vector<Coord> back(3, 0);
    for (size_t k = 0; k < c.size(); ++k)
        for (int j = 0; j < 3; ++j) back[j] += c[k] * b.rows[k][j];
    CHECK(back == v);
}
