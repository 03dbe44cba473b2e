#pragma once

#include "fac/bump.hpp"
#include "fac/jet.hpp"

#include <map>
#include <memory>
#include <utility>

namespace fac {

/** Smooth flow on the circle generated by a C-inf vector field supported in
    (0,1). The canonical field is a plateau bump: rises 0->1 over [1/8,3/8],
    equals 1 on [3/8,5/8], falls back to 0 over [5/8,7/8]. A nonnegative
    field keeps (0,1) invariant, so every time map is a circle diffeomorphism
    equal to the identity outside the support.

    Time maps and their space derivatives are computed by a Lie-series
    Taylor integrator with adaptive step: per step the iterated derivations
    X_0 = id, X_{m+1} = X * X_m' are expanded at the current point and summed
    as phi_eps = sum eps^m/m! X_m, with eps chosen so the series tail falls
    below the tolerance. */
class FlowSpec {
public:
    static std::shared_ptr<const FlowSpec> canonical();

    /** Vector field value / Taylor coefficients at x. */
    Scalar field(const Scalar& x) const;
    taylor::Series field_taylor(const Scalar& x, int order) const;

    /** Taylor coefficients (in the space variable) of phi_time at x,
        truncated after `order`+1 terms. */
    taylor::Series flow_taylor(const Scalar& x, const Scalar& time, int order,
                               const Scalar& tol) const;

    Scalar flow(const Scalar& x, const Scalar& time, const Scalar& tol) const;

    /** sup |(phi_time - id)^(r)| over a sampled grid (lower bound). */
    Scalar deriv_norm(int r, const Scalar& time, const Scalar& tol, long grid = 257) const;

    /** A dyadic interval on which |X^(r)| stays within a factor 4 of its
        sampled maximum; the higher-derivative witness window. */
    std::pair<Rational, Rational> deriv_window(int r) const;

private:
    FlowSpec() = default;
    taylor::Series flow_taylor_uncached(const Scalar& x, const Scalar& time, int order,
                                        const Scalar& tol) const;

    mutable std::map<int, std::pair<Rational, Rational>> window_cache_;
    // repeated evaluations at identical arguments dominate the norm grids
    // (cover-shifted samples reduce to the same hat coordinates)
    mutable std::map<std::string, taylor::Series> jet_cache_;
};

}  // namespace fac
