#pragma once

#include <vector>

#include "mv/driver.hpp"
#include "mv/rng.hpp"
#include "mv/system.hpp"

namespace fixtures {

inline mv::SupportSystem make_system(int n, std::vector<std::vector<mv::Point>> supports,
                                     std::vector<int> mult) {
    mv::SupportSystem sys;
    sys.n = n;
    sys.s = static_cast<int>(supports.size());
    sys.supports = std::move(supports);
    sys.multiplicities = std::move(mult);
    sys.rebuild_offsets();
    return sys;
}

// n = 1, A = {0, 3}: one segment of normalized length 3.
inline mv::SupportSystem segment13() { return make_system(1, {{{0}, {3}}}, {1}); }

inline mv::Lifting segment13_lifting() { return mv::Lifting{{0.25, 0.5}}; }

// Two copies of the unit triangle in Z^2 with the pinned liftings b_1, b_2.
inline mv::SupportSystem f3() {
    return make_system(2, {{{0, 0}, {1, 0}, {0, 1}}, {{0, 0}, {1, 0}, {0, 1}}}, {1, 1});
}

inline mv::Lifting f3_lifting() { return mv::Lifting{{0.1, 0.2, 0.7, 0.4, 0.05, 0.3}}; }

// Cyclic-3 supports in the point order that reproduces the pinned mixed
// vertices for the lifting b_0..b_7: A_1 = {e1,e2,e3},
// A_2 = {e1+e2, e3+e1, e2+e3}, A_3 = {e1+e2+e3, 0}.
inline mv::SupportSystem cyclic3_fixture() {
    return make_system(3,
                       {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
                        {{1, 1, 0}, {1, 0, 1}, {0, 1, 1}},
                        {{1, 1, 1}, {0, 0, 0}}},
                       {1, 1, 1});
}

inline mv::Lifting cyclic3_lifting() {
    return mv::Lifting{{0.0681718062929322, 0.2764482146232536, 0.4266688073141105,
                        0.8654168322306781, 0.6630347993316177, 0.2369372029023467,
                        0.6575801418616753, 0.2139433513437121}};
}

// Random small instance for oracle cross-checks: n <= 3, #A_i <= 6.
inline mv::SupportSystem random_instance(mv::Rng& rng) {
    const int n = 1 + static_cast<int>(rng.bits() % 3);
    const int s = 1 + static_cast<int>(rng.bits() % n);
    std::vector<int> mult(s, 1);
    for (int extra = 0; extra < n - s; ++extra) mult[rng.bits() % s]++;
    std::vector<std::vector<mv::Point>> supports(s);
    for (int i = 0; i < s; ++i) {
        const int want = mult[i] + 1 + static_cast<int>(rng.bits() % (6 - mult[i]));
        std::set<mv::Point> pts;
        while (static_cast<int>(pts.size()) < want) {
            mv::Point p(n);
            for (int j = 0; j < n; ++j) p[j] = static_cast<mv::Coord>(rng.bits() % 7) - 3;
            pts.insert(std::move(p));
        }
        supports[i].assign(pts.begin(), pts.end());
    }
    return make_system(n, std::move(supports), std::move(mult));
}

inline mv::Lifting random_lifting(mv::Rng& rng, const mv::SupportSystem& sys) {
    mv::Lifting lift;
    lift.values.resize(sys.total_points());
    for (auto& v : lift.values) v = rng.uniform01();
    return lift;
}

} // namespace fixtures
