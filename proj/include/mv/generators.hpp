#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mv/system.hpp"

namespace mv {

struct UnsupportedFamily : InputError {
    explicit UnsupportedFamily(const std::string& what) : InputError(what) {}
};

namespace gen_detail {

inline Point unit(int n, int j) { // e_{j+1}, 0-based slot j
    Point p(n, 0);
    p[j] = 1;
    return p;
}

inline SupportSystem finish(int n, std::vector<std::vector<Point>> supports) {
    SupportSystem sys;
    sys.n = n;
    sys.s = static_cast<int>(supports.size());
    sys.supports = std::move(supports);
    sys.multiplicities.assign(sys.s, 0);
    // all generated families are fully mixed
    for (int i = 0; i < sys.s; ++i) sys.multiplicities[i] = 1;
    sys.rebuild_offsets();
    validate_system(sys);
    return sys;
}

} // namespace gen_detail

// f_k = sum_i prod_{j=i..i+k-1 mod n} x_j for k < n; f_n = x_1...x_n - 1.
inline SupportSystem gen_cyclic(int n) {
    if (n < 3) throw UnsupportedFamily("cyclic-n needs n >= 3");
    std::vector<std::vector<Point>> supports(n);
    for (int k = 1; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            Point p(n, 0);
            for (int t = 0; t < k; ++t) p[(i + t) % n] = 1;
            supports[k - 1].push_back(std::move(p));
        }
    }
    supports[n - 1].push_back(Point(n, 1));
    supports[n - 1].push_back(Point(n, 0));
    return gen_detail::finish(n, std::move(supports));
}

// f_i = x_i sum_{j != i} x_j^2 - c: monomials x_i x_j^2, x_i, 1.
inline SupportSystem gen_noon(int n) {
    if (n < 2) throw UnsupportedFamily("noon-n needs n >= 2");
    std::vector<std::vector<Point>> supports(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            Point p(n, 0);
            p[i] = 1;
            p[j] += 2;
            supports[i].push_back(std::move(p));
        }
        supports[i].push_back(gen_detail::unit(n, i));
        supports[i].push_back(Point(n, 0));
    }
    return gen_detail::finish(n, std::move(supports));
}

// Discretized H-equation: monomials x_i x_j (j < n), x_i, 1.
inline SupportSystem gen_chandra(int n) {
    if (n < 2) throw UnsupportedFamily("chandra-n needs n >= 2");
    std::vector<std::vector<Point>> supports(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n - 1; ++j) {
            Point p(n, 0);
            p[i] += 1;
            p[j] += 1;
            supports[i].push_back(std::move(p));
        }
        supports[i].push_back(gen_detail::unit(n, i));
        supports[i].push_back(Point(n, 0));
    }
    return gen_detail::finish(n, std::move(supports));
}

// Katsura-m in n = m+1 variables u_0..u_m: for k < m the quadratic
// u_k = sum_l u_{|l|} u_{|k-l|}, plus the linear normalization.
inline SupportSystem gen_katsura(int m) {
    if (m < 1) throw UnsupportedFamily("katsura-m needs m >= 1");
    const int n = m + 1;
    std::vector<std::vector<Point>> supports(n);
    for (int k = 0; k < m; ++k) {
        std::set<Point> pts;
        for (int l = -m; l <= m; ++l) {
            if (std::abs(k - l) > m) continue;
            Point p(n, 0);
            p[std::abs(l)] += 1;
            p[std::abs(k - l)] += 1;
            pts.insert(std::move(p));
        }
        pts.insert(gen_detail::unit(n, k));
        supports[k].assign(pts.begin(), pts.end());
    }
    for (int j = 0; j <= m; ++j) supports[m].push_back(gen_detail::unit(n, j));
    supports[m].push_back(Point(n, 0));
    return gen_detail::finish(n, std::move(supports));
}

// -c_i + x_i x_n + sum_{j=1}^{n-i-1} x_j x_{i+j} x_n for i < n; x_1+..+x_{n-1}+1.
inline SupportSystem gen_eco(int n) {
    if (n < 3) throw UnsupportedFamily("eco-n needs n >= 3");
    std::vector<std::vector<Point>> supports(n);
    for (int i = 1; i < n; ++i) {
        auto& sup = supports[i - 1];
        Point first(n, 0);
        first[i - 1] = 1;
        first[n - 1] += 1;
        sup.push_back(std::move(first));
        for (int j = 1; j <= n - i - 1; ++j) {
            Point p(n, 0);
            p[j - 1] += 1;
            p[i + j - 1] += 1;
            p[n - 1] += 1;
            sup.push_back(std::move(p));
        }
        sup.push_back(Point(n, 0));
    }
    for (int j = 0; j < n - 1; ++j) supports[n - 1].push_back(gen_detail::unit(n, j));
    supports[n - 1].push_back(Point(n, 0));
    return gen_detail::finish(n, std::move(supports));
}

// -1/2 + sum_j (-1)^{j+1} x_j^{i+1} = 0: monomials x_j^{i+1} and 1.
inline SupportSystem gen_reimer(int n) {
    if (n < 2) throw UnsupportedFamily("reimer-n needs n >= 2");
    std::vector<std::vector<Point>> supports(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Point p(n, 0);
            p[j] = i + 2;
            supports[i].push_back(std::move(p));
        }
        supports[i].push_back(Point(n, 0));
    }
    return gen_detail::finish(n, std::move(supports));
}

// Maximum-likelihood equations X Y = I for the cycle graph on N vertices:
// X_ij is a variable on edges (self loops included), Y_ij a variable off
// edges; upper-triangular entries of XY - I give N(N+1)/2 equations.
inline SupportSystem gen_graphmodel(int N) {
    if (N < 3) throw UnsupportedFamily("graphmodel-N needs N >= 3");
    auto is_edge = [N](int a, int b) {
        if (a == b) return true;
        const int lo = std::min(a, b), hi = std::max(a, b);
        return hi - lo == 1 || (lo == 0 && hi == N - 1);
    };
    // Variable slots: X on edges, then Y on non-edges (pairs i <= j).
    std::map<std::pair<int, int>, int> xvar, yvar;
    int slot = 0;
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
            if (is_edge(i, j)) xvar[{i, j}] = slot++;
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
            if (!is_edge(i, j)) yvar[{i, j}] = slot++;
    const int n = slot; // N(N+1)/2

    std::vector<std::vector<Point>> supports;
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
            std::set<Point> pts;
            for (int k = 0; k < N; ++k) {
                if (!is_edge(i, k)) continue; // X_ik = 0 off edges
                Point p(n, 0);
                p[xvar.at({std::min(i, k), std::max(i, k)})] += 1;
                if (!is_edge(k, j)) p[yvar.at({std::min(k, j), std::max(k, j)})] += 1;
                pts.insert(std::move(p));
            }
            if (i == j) pts.insert(Point(n, 0)); // the -1 of the diagonal
            supports.emplace_back(pts.begin(), pts.end());
        }
    return gen_detail::finish(n, std::move(supports));
}

inline SupportSystem gen_family(const std::string& family, int n) {
    if (family == "cyclic") return gen_cyclic(n);
    if (family == "noon") return gen_noon(n);
    if (family == "chandra") return gen_chandra(n);
    if (family == "katsura") return gen_katsura(n);
    if (family == "eco") return gen_eco(n);
    if (family == "reimer") return gen_reimer(n);
    if (family == "graphmodel") return gen_graphmodel(n);
    throw UnsupportedFamily("unknown family '" + family + "'");
}

} // namespace mv
