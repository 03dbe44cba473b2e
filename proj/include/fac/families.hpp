#pragma once

#include "fac/flow.hpp"
#include "fac/jet.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fac {

using json = nlohmann::ordered_json;

/** Arc on the hat circle with exact endpoints, 0 <= lo < hi <= 1. */
struct HatInterval {
    Rational lo, hi;
    Rational length() const { return hi - lo; }
};

// ---------------------------------------------------------------------------
// Piecewise building blocks. Every family below is a contiguous chain of
// these over [0,1], each strictly increasing, joined with matching jets
// (the step weights are flat to all orders at the ends of their windows).
// ---------------------------------------------------------------------------

struct IdentityPiece {};

struct AffinePiece {
    Scalar slope, offset;  // value = slope*x + offset
};

/** Blend of two parallel affine germs a(x) = slope*x + offset and a + gap:
    value = a(x) + gap * step(x), step rising 0 -> 1 over the piece. */
struct BlendPiece {
    Scalar slope, offset, gap;
};

/** One-sided slope sweep across a transversal germ crossing at (xc, yc):
    value = yc + xi * exp(ln_s0 + (ln_s1 - ln_s0) * step(xi)), xi = x - xc.
    The step rises over the full piece, so the map leaves the anchor with
    exact slope s0 germ and reaches the far end with exact slope s1 germ.
    Strictly increasing whenever the sweep sits on the side of the anchor
    where xi * d(ln slope)/dxi >= 0, which is how all families use it. */
struct SweepPiece {
    Scalar xc, yc, ln_s0, ln_s1;
};

/** Rescaled flow map: value = scale * phi_time(x / scale) on [0, scale]. */
struct FlowPiece {
    std::shared_ptr<const FlowSpec> flow;
    Scalar scale, time, tol;
};

struct Piece {
    Scalar lo, hi;    // domain
    Scalar vlo, vhi;  // values at domain ends
    std::variant<IdentityPiece, AffinePiece, BlendPiece, SweepPiece, FlowPiece> impl;
};

// ---------------------------------------------------------------------------

/** An orientation-preserving C-inf circle diffeomorphism fixing 0, given by
    closed-form pieces on the hat circle. Immutable after construction. */
class FamilyBase {
public:
    virtual ~FamilyBase() = default;

    virtual std::string kind() const = 0;
    virtual json descriptor() const = 0;

    /** Value at x in [0,1). */
    Scalar eval(const Scalar& x) const;

    /** Exact value when x lands on an identity/affine piece with rational
        data; nullopt otherwise. */
    virtual std::optional<Rational> eval_exact(const Rational& x) const { return std::nullopt; }

    /** Inverse value; closed form on affine pieces, safeguarded Newton on
        blend/sweep pieces, negative-time flow on flow pieces. */
    Scalar eval_inverse(const Scalar& y) const;

    taylor::Series taylor_at(const Scalar& x, int order) const;
    taylor::Series inverse_taylor_at(const Scalar& y, int order) const;

    /** Named exact hat intervals ("J", "I", "K" as applicable). */
    const std::map<std::string, HatInterval>& hat_sets() const { return sets_; }

    const std::vector<Piece>& pieces() const { return pieces_; }

    /** Slope range sampled at construction (256 points per piece). */
    const Scalar& min_slope() const { return min_slope_; }
    const Scalar& max_slope() const { return max_slope_; }

protected:
    void finalize();

    std::vector<Piece> pieces_;
    std::map<std::string, HatInterval> sets_;
    Scalar min_slope_{1}, max_slope_{1};
};

using GeneratorFamily = std::shared_ptr<const FamilyBase>;

/** Identity map as a degenerate family. */
GeneratorFamily make_identity_family();

/** Affine compression: maps [0, 1-1/k] onto [0, 1/k] with constant slope
    1/(k-1), closed over the rest of the circle by a parallel-germ blend.
    k >= 2; k = 2 degenerates to the identity slope on the long side. */
GeneratorFamily make_g1sing(int n, const Integer& k);

/** Compactly supported push on [0, 2^-n-1] with an exact affine window of
    slope n+1; identity elsewhere. */
GeneratorFamily make_g1ac(int n);

/** Two-slope map: exact magnification 1/t on the window recorded as I, the
    complementary contraction t towards 1, crossings swept at 0 and at
    t/(1+t). Requires 0 < t <= 1/5 so the recorded window [t/4, 7t/12]
    stays inside the exact affine region. If t is rational, pass it for
    exact set bookkeeping. */
GeneratorFamily make_gbeta(const Scalar& t, std::optional<Rational> exact_t = std::nullopt);

/** Three-germ map: magnification t/s on [0,s]-side (exact on the window
    recorded as I = [s/4, 7s/12]), contraction s/t back to the identity at t,
    identity on K = [2t, 1]. s = t yields the identity map. */
GeneratorFamily make_g0ac(const Rational& s, const Rational& t);

/** Rescaled flow map x -> t^k phi_{t^(k^2)}(x / t^k); identity outside
    [0, t^k] (= complement of the recorded K). */
GeneratorFamily make_gk(const Rational& t, int k,
                        std::shared_ptr<const FlowSpec> flow = FlowSpec::canonical(),
                        std::optional<Scalar> tol = std::nullopt);

// ---------------------------------------------------------------------------

/** Preimage of rational hat arcs under the cyclic q-fold cover. Components
    are never enumerated unless the cover is small; measure and membership
    are exact. */
struct IntervalSet {
    std::vector<HatInterval> hat;
    Integer cover{1};
    std::string label;

    Rational measure() const;
    Integer component_count() const;
    bool contains(const Rational& x) const;

    /** Exact arc of component (cell, arc index). */
    HatInterval component(const Integer& cell, size_t arc) const;

    /** All components, ordered; guarded against large covers. */
    std::vector<HatInterval> enumerate(const Integer& max_components = Integer(100000)) const;
};

/** The lifted special set of a family instance: which in {"J","I","K"}. */
IntervalSet special_sets(const GeneratorFamily& f, const Integer& q, const std::string& which);

}  // namespace fac
