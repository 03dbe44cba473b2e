#pragma once

#include "fac/scalar.hpp"

#include <vector>

namespace fac {

/** Truncated Taylor data of a map at a point: value and derivatives 1..r.
    d[i] holds the i-th derivative (d[0] is the value). For jets of
    orientation-preserving diffeomorphisms d[1] > 0. */
struct Jet {
    Scalar base_point;
    std::vector<Scalar> d;

    int order() const { return static_cast<int>(d.size()) - 1; }
    const Scalar& value() const { return d[0]; }
    const Scalar& deriv(int i) const { return d[static_cast<size_t>(i)]; }
};

/** Dense truncated Taylor coefficient vectors c[k] = f^(k)(x0)/k!.
    All routines truncate at the common order = size-1 of their inputs. */
namespace taylor {

using Series = std::vector<Scalar>;

Series from_jet(const Jet& j);
Jet to_jet(const Series& c, const Scalar& base_point);

/** c = a*b truncated to a.size() terms. */
Series mul(const Series& a, const Series& b);

/** Truncated product of a running accumulator with b, in place. */
void mul_inplace(Series& acc, const Series& b);

/** g(f(xi)) where g is expanded at f[0]; g's constant coefficient must be
    the expansion point value. Result expanded at xi=0. */
Series compose(const Series& g, const Series& f);

/** 1/a, requires a[0] != 0. */
Series reciprocal(const Series& a);

/** exp(a). */
Series exp(const Series& a);

/** Compositional inverse of f with f[0] = 0, f[1] != 0:
    returns g with g(f(xi)) = xi + O(xi^{n+1}). */
Series revert(const Series& f);

/** Derivative series (one order shorter unless padded); keeps length,
    dropping the top coefficient. */
Series derivative(const Series& a);

}  // namespace taylor

}  // namespace fac
