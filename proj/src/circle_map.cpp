#include "fac/circle_map.hpp"

namespace fac {

namespace bm = boost::multiprecision;

Scalar point_to_scalar(const CirclePoint& p) {
    if (const auto* r = std::get_if<Rational>(&p)) return to_scalar(*r);
    return std::get<Scalar>(p);
}

CirclePoint point_mod1(const CirclePoint& p) {
    if (const auto* r = std::get_if<Rational>(&p)) return CirclePoint(mod1(*r));
    return CirclePoint(mod1(std::get<Scalar>(p)));
}

CircleMap CircleMap::rotation(const Rational& angle) {
    CircleMap m;
    m.nodes_.push_back({RotationNode{to_scalar(angle), angle}, false});
    return m;
}

CircleMap CircleMap::rotation(const Scalar& angle) {
    CircleMap m;
    m.nodes_.push_back({RotationNode{angle, std::nullopt}, false});
    return m;
}

CircleMap CircleMap::lift(GeneratorFamily fam, Integer cover, Rational anchor) {
    if (cover < 1) throw InvalidParam("cover must be >= 1");
    CircleMap m;
    m.nodes_.push_back({LiftNode{std::move(fam), std::move(cover), std::move(anchor)}, false});
    return m;
}

CircleMap CircleMap::after(const CircleMap& other) const {
    CircleMap m;
    m.nodes_ = other.nodes_;
    m.nodes_.insert(m.nodes_.end(), nodes_.begin(), nodes_.end());
    return m;
}

CircleMap CircleMap::inverse() const {
    CircleMap m;
    m.nodes_.reserve(nodes_.size());
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        Node n = *it;
        n.inverted = !n.inverted;
        m.nodes_.push_back(std::move(n));
    }
    return m;
}

namespace {

// Exact reduction of q*(x - anchor) into (cell, frac in [0,1)).
std::pair<Integer, Rational> reduce_exact(const Rational& x, const LiftNode& ln) {
    Rational u = (x - ln.anchor) * Rational(ln.cover);
    Integer cell = ifloor(u);
    return {cell, u - Rational(cell)};
}

Scalar lift_node_eval(const LiftNode& ln, bool inverted, const Scalar& x) {
    auto [cell, frac] = split_scaled(x - to_scalar(ln.anchor), ln.cover);
    Scalar hat = inverted ? ln.family->eval_inverse(frac) : ln.family->eval(frac);
    return to_scalar(ln.anchor) + (to_scalar(cell) + hat) / to_scalar(ln.cover);
}

CirclePoint node_eval(const Node& n, const CirclePoint& x) {
    if (const auto* rot = std::get_if<RotationNode>(&n.prim)) {
        if (const auto* rx = std::get_if<Rational>(&x)) {
            if (rot->exact)
                return CirclePoint(n.inverted ? *rx - *rot->exact : *rx + *rot->exact);
            Scalar v = to_scalar(*rx);
            return CirclePoint(n.inverted ? v - rot->angle : v + rot->angle);
        }
        const Scalar& sx = std::get<Scalar>(x);
        return CirclePoint(n.inverted ? sx - rot->angle : sx + rot->angle);
    }
    const auto& ln = std::get<LiftNode>(n.prim);
    if (const auto* rx = std::get_if<Rational>(&x)) {
        auto [cell, frac] = reduce_exact(*rx, ln);
        if (!n.inverted) {
            if (auto ev = ln.family->eval_exact(frac))
                return CirclePoint(ln.anchor + (Rational(cell) + *ev) / Rational(ln.cover));
        }
        Scalar hat = n.inverted ? ln.family->eval_inverse(to_scalar(frac))
                                : ln.family->eval(to_scalar(frac));
        return CirclePoint(to_scalar(ln.anchor) +
                           (to_scalar(cell) + hat) / to_scalar(ln.cover));
    }
    return CirclePoint(lift_node_eval(ln, n.inverted, std::get<Scalar>(x)));
}

// Taylor of one node's lift at the point x (Scalar path).
taylor::Series node_taylor(const Node& n, const Scalar& x, int r) {
    const size_t len = static_cast<size_t>(r) + 1;
    if (const auto* rot = std::get_if<RotationNode>(&n.prim)) {
        taylor::Series c(len, Scalar(0));
        c[0] = n.inverted ? x - rot->angle : x + rot->angle;
        if (r >= 1) c[1] = 1;
        return c;
    }
    const auto& ln = std::get<LiftNode>(n.prim);
    auto [cell, frac] = split_scaled(x - to_scalar(ln.anchor), ln.cover);
    taylor::Series hat = n.inverted ? ln.family->inverse_taylor_at(frac, r)
                                    : ln.family->taylor_at(frac, r);
    Scalar q = to_scalar(ln.cover);
    taylor::Series out(len, Scalar(0));
    out[0] = to_scalar(ln.anchor) + (to_scalar(cell) + hat[0]) / q;
    Scalar p(1);
    for (size_t i = 1; i < len; ++i) {
        out[i] = hat[i] * p;  // q^{i-1}
        p *= q;
    }
    return out;
}

// Same, but a rational base point reduces exactly through a lift node.
taylor::Series node_taylor_exact_entry(const Node& n, const Rational& x, int r) {
    if (std::holds_alternative<RotationNode>(n.prim))
        return node_taylor(n, to_scalar(x), r);
    const auto& ln = std::get<LiftNode>(n.prim);
    auto [cell, frac] = reduce_exact(x, ln);
    Scalar sf = to_scalar(frac);
    taylor::Series hat = n.inverted ? ln.family->inverse_taylor_at(sf, r)
                                    : ln.family->taylor_at(sf, r);
    Scalar q = to_scalar(ln.cover);
    const size_t len = static_cast<size_t>(r) + 1;
    taylor::Series out(len, Scalar(0));
    out[0] = to_scalar(ln.anchor) + (to_scalar(cell) + hat[0]) / q;
    Scalar p(1);
    for (size_t i = 1; i < len; ++i) {
        out[i] = hat[i] * p;
        p *= q;
    }
    return out;
}

}  // namespace

CirclePoint CircleMap::eval(const CirclePoint& x) const {
    CirclePoint cur = x;
    for (const auto& n : nodes_) cur = node_eval(n, cur);
    return point_mod1(cur);
}

Scalar CircleMap::eval_lift(const Scalar& x) const {
    Scalar cur = x;
    for (const auto& n : nodes_) {
        if (const auto* rot = std::get_if<RotationNode>(&n.prim)) {
            cur = n.inverted ? cur - rot->angle : cur + rot->angle;
        } else {
            cur = lift_node_eval(std::get<LiftNode>(n.prim), n.inverted, cur);
        }
    }
    return cur;
}

taylor::Series CircleMap::taylor_at(const CirclePoint& x, int r) const {
    const size_t len = static_cast<size_t>(r) + 1;
    taylor::Series cur(len, Scalar(0));
    if (nodes_.empty()) {
        cur[0] = point_to_scalar(x);
        if (r >= 1) cur[1] = 1;
        return cur;
    }
    // first node: exact reduction when the point is rational
    if (const auto* rx = std::get_if<Rational>(&x)) {
        cur = node_taylor_exact_entry(nodes_[0], *rx, r);
    } else {
        cur = node_taylor(nodes_[0], std::get<Scalar>(x), r);
    }
    for (size_t i = 1; i < nodes_.size(); ++i) {
        taylor::Series g = node_taylor(nodes_[i], cur[0], r);
        taylor::Series comp = taylor::compose(g, cur);
        cur = std::move(comp);
    }
    return cur;
}

Jet CircleMap::jet(const CirclePoint& x, int r) const {
    return taylor::to_jet(taylor_at(x, r), point_to_scalar(x));
}

CircleMap lift_by_cover(const GeneratorFamily& base, const Integer& q) {
    return CircleMap::lift(base, q, Rational(0));
}

}  // namespace fac
