#pragma once

#include <cmath>
#include <vector>

#include "mv/errors.hpp"

namespace mv {

// Polynomial in the flag scale R, compared as R -> infinity: the sign and
// order are decided by the highest non-flushed coefficient. Coefficients
// whose magnitude falls below the per-poly zero tolerance are stored as
// exact zeros; eq_tol is the tolerance under which two coefficients are
// deemed equal in comparisons.
struct RPoly {
    std::vector<double> c; // c[l] multiplies R^l
    double eq_tol = 0.0;

    RPoly() = default;
    RPoly(std::vector<double> coeffs, double equal_tol, double zero_tol)
        : c(std::move(coeffs)), eq_tol(equal_tol) {
        for (auto& v : c)
            if (std::fabs(v) <= zero_tol) v = 0.0;
    }
};

inline int rpoly_sign(const RPoly& p) {
    for (size_t l = p.c.size(); l-- > 0;) {
        if (p.c[l] > 0.0) return 1;
        if (p.c[l] < 0.0) return -1;
    }
    return 0;
}

// Three-way comparison from the highest degree down; coefficients within the
// equality tolerance are ties. Returns 0 when the polynomials are
// indistinguishable (the caller decides whether that is a genericity failure).
inline int rpoly_compare(const RPoly& p, const RPoly& q) {
    const double tol = std::max(p.eq_tol, q.eq_tol);
    const size_t len = std::max(p.c.size(), q.c.size());
    for (size_t l = len; l-- > 0;) {
        const double a = l < p.c.size() ? p.c[l] : 0.0;
        const double b = l < q.c.size() ? q.c[l] : 0.0;
        const double d = a - b;
        if (std::fabs(d) <= tol) continue;
        return d < 0.0 ? -1 : 1;
    }
    return 0;
}

inline bool rpoly_less(const RPoly& p, const RPoly& q) { return rpoly_compare(p, q) < 0; }

inline RPoly rpoly_negate(RPoly p) {
    for (auto& v : p.c) v = -v;
    return p;
}

// |p| for sign-definite polynomials (used by the argmin over |t|).
inline RPoly rpoly_abs(const RPoly& p) { return rpoly_sign(p) < 0 ? rpoly_negate(p) : p; }

} // namespace mv
