#include "fac/norms.hpp"

#include <algorithm>
#include <set>

namespace fac {

namespace bm = boost::multiprecision;

namespace {

long odd_grid_size(long n) {
    if (n < 3) n = 3;
    if (n % 2 == 0) ++n;
    while (n % 5 == 0) n += 2;
    return n;
}

void add_structural(const CircleMap& chain, long cap, std::vector<CirclePoint>& out) {
    if (chain.nodes().empty()) return;
    const Node& first = chain.nodes().front();
    const auto* ln = std::get_if<LiftNode>(&first.prim);
    if (!ln) return;
    const Integer& q = ln->cover;
    std::set<Integer> cells{Integer(0)};
    if (q > 1) cells.insert(Integer(1));
    if (q > 2) cells.insert(q - 1);
    if (q > 3) cells.insert(q / 2);
    long count = 0;
    static const std::vector<int> dense{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    static const std::vector<int> sparse{2, 4, 9, 11};  // ramp interiors
    for (const auto& piece : ln->family->pieces()) {
        // an inverted entry node reduces into the piece's value range
        Scalar lo = first.inverted ? piece.vlo : piece.lo;
        Scalar hi = first.inverted ? piece.vhi : piece.hi;
        Scalar w = hi - lo;
        // prime denominator: the families' own features sit at dyadic and
        // small-decimal fractions of their pieces, which must not be the
        // only sampled spots. Flow pieces cost an integration per sample,
        // so they get the sparse set.
        const bool heavy = std::holds_alternative<FlowPiece>(piece.impl);
        for (int j : heavy ? sparse : dense) {
            Scalar hat = lo + w * j / 13;
            for (const auto& cell : cells) {
                if (count++ >= cap) return;
                Scalar x = to_scalar(ln->anchor) + (to_scalar(cell) + hat) / to_scalar(q);
                out.emplace_back(mod1(x));
            }
        }
    }
}

// Tracks per-order sup of |expr^(i)|. Order 0 keeps the raw range so the
// displacement can be reduced by the single best integer shift afterwards
// (the continuous representative of a circle-valued difference).
struct OrderMax {
    std::vector<Scalar> m;
    Scalar raw_min, raw_max;
    bool any = false;
    explicit OrderMax(int orders) : m(static_cast<size_t>(orders), Scalar(0)) {}
    void feed(const taylor::Series& c, bool shift_order0) {
        Scalar fact(1);
        for (size_t i = 0; i < m.size() && i < c.size(); ++i) {
            if (i > 1) fact *= static_cast<long>(i);
            Scalar v = c[i] * ((i <= 1) ? Scalar(1) : fact);
            if (i == 0) {
                if (!shift_order0) {
                    if (bm::abs(v) > m[0]) m[0] = bm::abs(v);
                } else {
                    if (!any || v < raw_min) raw_min = v;
                    if (!any || v > raw_max) raw_max = v;
                    any = true;
                }
                continue;
            }
            Scalar a = bm::abs(v);
            if (a > m[i]) m[i] = a;
        }
    }
    void finish_order0() {
        if (!any) return;
        Scalar mid = (raw_min + raw_max) / 2;
        Scalar k = boost::multiprecision::round(mid);
        m[0] = std::max(bm::abs(raw_max - k), bm::abs(raw_min - k));
    }
};

// Coefficient differences (series of H at y+shift+delta) - (series at
// y+shift) by Taylor expansion in delta. Cancellation-free for tiny delta.
// Returns false if the expansion does not visibly converge within the
// available orders; callers then fall back to direct evaluation.
bool shifted_coeff_diff(const taylor::Series& at_base, const Scalar& delta, size_t want,
                        taylor::Series& out) {
    const size_t n = at_base.size();
    out.assign(want, Scalar(0));
    for (size_t i = 0; i < want; ++i) {
        Scalar term(0), dp(1), binom(1), last(0);
        for (size_t m = 1; i + m < n; ++m) {
            dp *= delta;
            binom = binom * static_cast<long>(i + m) / static_cast<long>(m);
            last = at_base[i + m] * binom * dp;
            term += last;
        }
        Scalar scale = std::max(bm::abs(term), bm::abs(at_base[i + 1] * delta));
        if (scale > 0 && bm::abs(last) > scale / 1024) return false;
        out[i] = term;
    }
    return true;
}

Scalar feed_conj_rot(const ConjRotDiff& e, const CirclePoint& y, int orders, OrderMax& mx) {
    const int r1 = orders - 1;          // jets to order r+1 for the pad
    const int pad = 5;                  // delta-expansion headroom
    Rational sa = e.inverse_side ? -e.a : e.a;
    Rational sb = e.inverse_side ? -e.b : e.b;
    Scalar delta = to_scalar(Rational(sb - sa));  // exact difference first

    auto shifted_point = [&](const Rational& s) {
        return std::visit(
            [&](const auto& v) -> CirclePoint {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Rational>) return CirclePoint(v + s);
                else return CirclePoint(v + to_scalar(s));
            },
            y);
    };
    CirclePoint ya = shifted_point(sa);

    taylor::Series A = e.H.taylor_at(ya, r1 + pad);
    taylor::Series phi;
    bool small_delta = bm::abs(delta) < pow2(-static_cast<long>(precision_bits()) / 3);
    bool ok = small_delta &&
              shifted_coeff_diff(A, delta, static_cast<size_t>(r1) + 1, phi);
    if (!ok) {
        // direct two-point difference; keep the first-order magnitude as a
        // floor so cancellation cannot make a huge difference look tiny
        taylor::Series B = e.H.taylor_at(shifted_point(sb), r1);
        phi.assign(static_cast<size_t>(r1) + 1, Scalar(0));
        for (size_t i = 0; i < phi.size(); ++i) {
            Scalar direct = B[i] - A[i];
            Scalar first = A[i + 1] * delta * static_cast<long>(i + 1);
            phi[i] = (bm::abs(direct) >= bm::abs(first) / 2) ? direct : first;
        }
    }

    // y as a function of x = H(y): reversion of the jet of H at y
    taylor::Series Hy = e.H.taylor_at(y, r1);
    taylor::Series sh = Hy;
    sh[0] = 0;
    taylor::Series yofx = taylor::revert(sh);
    taylor::Series D = taylor::compose(phi, yofx);
    mx.feed(D, false);
    return bm::abs(Hy[1]);
}

}  // namespace

std::vector<CirclePoint> norm_samples(const std::vector<const CircleMap*>& chains, long budget) {
    std::vector<CirclePoint> pts;
    const long G = odd_grid_size(budget / 2);
    for (long j = 0; j < G; ++j) pts.emplace_back(Rational(j, G));
    long cap = std::max<long>(8, (budget - G) / std::max<size_t>(chains.size(), 1));
    for (const auto* c : chains) add_structural(*c, cap, pts);
    return pts;
}

NormReport cr_norm(const MapExpr& expr, int r, long grid) {
    if (grid < 2) throw InvalidParam("cr_norm requires grid >= 2");
    const int orders = r + 2;  // one extra order for the pad
    OrderMax mx(orders);

    std::vector<const CircleMap*> chains;
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, MinusId>) chains = {&e.f};
            else if constexpr (std::is_same_v<T, ChainDiff>) chains = {&e.f, &e.g};
            else chains = {&e.H};
        },
        expr);
    std::vector<CirclePoint> pts = norm_samples(chains, grid);

    // the conjugated difference samples in the conjugacy coordinate; shift
    // the sample set so that y + angle also lands on the piece structure
    if (const auto* e = std::get_if<ConjRotDiff>(&expr)) {
        Rational sa = e->inverse_side ? -e->a : e->a;
        Rational sb = e->inverse_side ? -e->b : e->b;
        const size_t base = pts.size();
        pts.reserve(3 * base);
        for (size_t i = 0; i < base; ++i) {
            for (const Rational& s : {sa, sb}) {
                if (const auto* r = std::get_if<Rational>(&pts[i])) {
                    pts.emplace_back(mod1(*r - s));
                } else {
                    pts.emplace_back(mod1(std::get<Scalar>(pts[i]) - to_scalar(s)));
                }
            }
        }
    }

    Scalar spacing_scale(1);
    for (const auto& p : pts) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, MinusId>) {
                    taylor::Series c = e.f.taylor_at(p, orders - 1);
                    c[0] -= point_to_scalar(p);
                    if (c.size() > 1) c[1] -= 1;
                    mx.feed(c, true);
                } else if constexpr (std::is_same_v<T, ChainDiff>) {
                    taylor::Series cf = e.f.taylor_at(p, orders - 1);
                    taylor::Series cg = e.g.taylor_at(p, orders - 1);
                    for (size_t i = 0; i < cf.size(); ++i) cf[i] -= cg[i];
                    mx.feed(cf, true);
                } else {
                    // pad spacing grows by the conjugacy's slope
                    Scalar sl = feed_conj_rot(e, p, orders, mx);
                    if (sl > spacing_scale) spacing_scale = sl;
                }
            },
            expr);
    }

    mx.finish_order0();
    const Scalar spacing = spacing_scale / odd_grid_size(grid / 2);
    NormReport rep;
    rep.r = r;
    rep.samples = static_cast<long>(pts.size());
    rep.order_lower.resize(static_cast<size_t>(r) + 1);
    rep.order_upper.resize(static_cast<size_t>(r) + 1);
    rep.lower = 0;
    rep.upper = 0;
    for (int i = 0; i <= r; ++i) {
        rep.order_lower[i] = mx.m[i];
        rep.order_upper[i] = mx.m[i] + spacing * mx.m[i + 1];
        if (rep.order_lower[i] > rep.lower) rep.lower = rep.order_lower[i];
        if (rep.order_upper[i] > rep.upper) rep.upper = rep.order_upper[i];
    }
    return rep;
}

NormReport abs_r(const CircleMap& f, int r, long grid) {
    NormReport a = cr_norm(MinusId{f}, r, grid);
    NormReport b = cr_norm(MinusId{f.inverse()}, r, grid);
    NormReport out = a;
    out.lower = std::max({a.lower, b.lower, Scalar(1)});
    out.upper = std::max({a.upper, b.upper, Scalar(1)});
    for (int i = 0; i <= r; ++i) {
        out.order_lower[i] = std::max(a.order_lower[i], b.order_lower[i]);
        out.order_upper[i] = std::max(a.order_upper[i], b.order_upper[i]);
    }
    return out;
}

NormReport dist_r(const CircleMap& f, const CircleMap& g, int r, long grid) {
    NormReport a = cr_norm(ChainDiff{f, g}, r, grid);
    NormReport b = cr_norm(ChainDiff{f.inverse(), g.inverse()}, r, grid);
    NormReport out = a;
    out.lower = std::max(a.lower, b.lower);
    out.upper = std::max(a.upper, b.upper);
    for (int i = 0; i <= r; ++i) {
        out.order_lower[i] = std::max(a.order_lower[i], b.order_lower[i]);
        out.order_upper[i] = std::max(a.order_upper[i], b.order_upper[i]);
    }
    return out;
}

std::pair<Scalar, Scalar> slope_range(const CircleMap& f, long grid) {
    std::vector<CirclePoint> pts = norm_samples({&f}, grid);
    Scalar mn, mx;
    bool first = true;
    for (const auto& p : pts) {
        taylor::Series c = f.taylor_at(p, 1);
        if (first || c[1] < mn) mn = c[1];
        if (first || c[1] > mx) mx = c[1];
        first = false;
    }
    return {mn, mx};
}

}  // namespace fac
