#pragma once

#include "fac/families.hpp"

#include <variant>

namespace fac {

/** Point on the circle (or its lift). Exact rational while the evaluation
    path preserves exactness, Scalar afterwards. */
using CirclePoint = std::variant<Rational, Scalar>;

Scalar point_to_scalar(const CirclePoint& p);
CirclePoint point_mod1(const CirclePoint& p);

struct RotationNode {
    Scalar angle;
    std::optional<Rational> exact;
};

/** Lift of a family map by the cyclic q-fold cover, translated so that
    `anchor` is fixed: x -> anchor + (floor + hat(frac)) / q over
    q * (x - anchor) = floor + frac. Commutes with rotation by p/q. */
struct LiftNode {
    GeneratorFamily family;
    Integer cover;
    Rational anchor;
};

struct Node {
    std::variant<RotationNode, LiftNode> prim;
    bool inverted = false;
};

/** Immutable composition chain of primitive circle diffeomorphisms.
    Nodes apply front to back: eval = nodes[k-1](... nodes (nodes[0](x))).
    The empty chain is the identity. */
class CircleMap {
public:
    CircleMap() = default;

    static CircleMap rotation(const Rational& angle);
    static CircleMap rotation(const Scalar& angle);
    static CircleMap lift(GeneratorFamily fam, Integer cover, Rational anchor = Rational(0));

    /** Composition this o other: apply `other` first. */
    CircleMap after(const CircleMap& other) const;

    CircleMap inverse() const;

    bool is_identity() const { return nodes_.empty(); }
    size_t size() const { return nodes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }

    /** Value mod 1; exact rational path kept as long as possible. */
    CirclePoint eval(const CirclePoint& x) const;
    Scalar eval(const Scalar& x) const { return point_to_scalar(eval(CirclePoint(x))); }

    /** The continuous increasing lift to the real line. */
    Scalar eval_lift(const Scalar& x) const;

    /** Jet of the lift at x. A rational base point is reduced exactly
        through the first node before rounding. */
    Jet jet(const CirclePoint& x, int r) const;
    taylor::Series taylor_at(const CirclePoint& x, int r) const;

private:
    std::vector<Node> nodes_;
};

/** The lift h of a family map by the q-fold cover with Fix(h) containing 0. */
CircleMap lift_by_cover(const GeneratorFamily& base, const Integer& q);

}  // namespace fac
