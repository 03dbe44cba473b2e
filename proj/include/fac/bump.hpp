#pragma once

#include "fac/jet.hpp"

namespace fac {

/** The canonical smooth step psi: R -> [0,1].
    psi == 0 on (-inf,-1/4], == 1 on [1/4,inf), strictly increasing between,
    with all derivatives vanishing at +-1/4 and psi(-x) = 1 - psi(x).
    Built from the flat kernel E(u) = exp(-1/u) (u>0, else 0) as
        psi(x) = E(x+1/4) / (E(x+1/4) + E(1/4-x)).  */
Scalar bump(const Scalar& x);

/** Taylor coefficients of psi at x, truncated to `order`+1 terms. */
taylor::Series bump_taylor(const Scalar& x, int order);

/** Jet of psi (value and derivatives) at x. */
Jet bump_jet(const Scalar& x, int order);

/** Monotone C-inf step from 0 to 1 across [lo,hi] (flat at both ends):
    psi applied to the affine map sending [lo,hi] onto [-1/4,1/4]. */
Scalar smooth_step(const Scalar& x, const Scalar& lo, const Scalar& hi);
taylor::Series smooth_step_taylor(const Scalar& x, const Scalar& lo, const Scalar& hi, int order);

}  // namespace fac
