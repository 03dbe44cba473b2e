#include "fac/bump.hpp"

namespace fac {

namespace {

const Scalar& quarter() {
    static thread_local Scalar q = Scalar(1) / 4;
    return q;
}

// Taylor of E(u) = exp(-1/u) at u0. For u0 <= 0 the function is identically
// zero on a neighbourhood (one-sidedly flat at 0), so the series is zero.
taylor::Series flat_kernel(const Scalar& u0, int order) {
    const size_t n = static_cast<size_t>(order) + 1;
    if (u0 <= 0) return taylor::Series(n, Scalar(0));
    // -1/(u0+xi) expanded: coefficient k = -(-1)^k / u0^{k+1}
    taylor::Series m(n, Scalar(0));
    Scalar p = -1 / u0;
    for (size_t k = 0; k < n; ++k) {
        m[k] = p;
        p = -p / u0;
    }
    return taylor::exp(m);
}

}  // namespace

Scalar bump(const Scalar& x) {
    if (x <= -quarter()) return Scalar(0);
    if (x >= quarter()) return Scalar(1);
    Scalar ea = boost::multiprecision::exp(-1 / (x + quarter()));
    Scalar eb = boost::multiprecision::exp(-1 / (quarter() - x));
    return ea / (ea + eb);
}

taylor::Series bump_taylor(const Scalar& x, int order) {
    const size_t n = static_cast<size_t>(order) + 1;
    if (x <= -quarter()) return taylor::Series(n, Scalar(0));
    if (x >= quarter()) {
        taylor::Series c(n, Scalar(0));
        c[0] = 1;
        return c;
    }
    taylor::Series ea = flat_kernel(x + quarter(), order);
    taylor::Series eb = flat_kernel(quarter() - x, order);
    for (size_t k = 1; k < n; k += 2) eb[k] = -eb[k];  // inner derivative of 1/4 - x
    taylor::Series sum(n);
    for (size_t k = 0; k < n; ++k) sum[k] = ea[k] + eb[k];
    return taylor::mul(ea, taylor::reciprocal(sum));
}

Jet bump_jet(const Scalar& x, int order) {
    return taylor::to_jet(bump_taylor(x, order), x);
}

Scalar smooth_step(const Scalar& x, const Scalar& lo, const Scalar& hi) {
    Scalar arg = (x - lo) / (hi - lo) / 2 - quarter();
    return bump(arg);
}

taylor::Series smooth_step_taylor(const Scalar& x, const Scalar& lo, const Scalar& hi, int order) {
    Scalar scale = 1 / (2 * (hi - lo));
    Scalar arg = (x - lo) / (hi - lo) / 2 - quarter();
    taylor::Series c = bump_taylor(arg, order);
    Scalar p(1);
    for (size_t k = 1; k < c.size(); ++k) {
        p *= scale;
        c[k] *= p;
    }
    return c;
}

}  // namespace fac
