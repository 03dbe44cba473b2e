#include "fac/families.hpp"

#include <algorithm>

namespace fac {

namespace bm = boost::multiprecision;

namespace {

Scalar eval_step_window(const Scalar& x, const Scalar& lo, const Scalar& hi) {
    return smooth_step(x, lo, hi);
}

/** Safeguarded Newton for a strictly increasing g on [lo,hi] with g(lo) <= y <= g(hi).
    Secant start, bracket maintained throughout, bisection fallback. */
Scalar invert_increasing(const std::function<Scalar(const Scalar&)>& g,
                         const std::function<Scalar(const Scalar&)>& gp,
                         const Scalar& y, Scalar lo, Scalar hi) {
    Scalar flo = g(lo) - y, fhi = g(hi) - y;
    if (flo > 0 || fhi < 0) throw NonConvergence("inverse target outside bracket");
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    const long bits = static_cast<long>(precision_bits());
    const Scalar tol_res = pow2(-(bits / 2)) * std::max(Scalar(1), bm::abs(y));
    const Scalar tol_step = pow2(-(7 * bits / 8)) * std::max(Scalar(1), bm::abs(hi - lo));

    Scalar a = lo, b = hi;
    Scalar x = a + (-flo) / (fhi - flo) * (b - a);  // secant start
    Scalar last_width = b - a;
    int slow = 0;
    for (int it = 0; it < 400; ++it) {
        Scalar fx = g(x) - y;
        if (bm::abs(fx) <= tol_res) return x;
        if (fx < 0) a = x; else b = x;
        // force bisection when the bracket stops contracting; Newton creeps
        // on the exponentially curved sweep pieces
        Scalar width = b - a;
        if (width > last_width * 3 / 4) ++slow; else slow = 0;
        last_width = width;
        Scalar d = gp(x);
        Scalar xn;
        if (slow >= 3 || d <= 0) {
            xn = (a + b) / 2;
            slow = 0;
        } else {
            xn = x - fx / d;
            if (!(xn > a && xn < b)) xn = (a + b) / 2;
        }
        if (bm::abs(xn - x) <= tol_step || b - a <= tol_step) {
            x = xn;
            Scalar res = g(x) - y;
            if (bm::abs(res) <= tol_res * 16) return x;
        }
        x = xn;
    }
    Scalar res = g(x) - y;
    if (bm::abs(res) <= tol_res * 16) return x;
    throw NonConvergence("piece inversion failed to reach tolerance (y=" + y.str(40) +
                         ", residual=" + res.str(6) + ", bracket=[" + lo.str(10) + "," +
                         hi.str(10) + "])");
}

struct PieceEval {
    const Piece& p;

    Scalar value(const Scalar& x) const {
        return std::visit(
            [&](const auto& imp) -> Scalar { return eval_impl(imp, x); }, p.impl);
    }

    taylor::Series tay(const Scalar& x, int order) const {
        return std::visit(
            [&](const auto& imp) -> taylor::Series { return taylor_impl(imp, x, order); },
            p.impl);
    }

    Scalar inverse(const Scalar& y) const {
        return std::visit(
            [&](const auto& imp) -> Scalar { return inverse_impl(imp, y); }, p.impl);
    }

private:
    Scalar eval_impl(const IdentityPiece&, const Scalar& x) const { return x; }
    Scalar eval_impl(const AffinePiece& a, const Scalar& x) const { return a.slope * x + a.offset; }
    Scalar eval_impl(const BlendPiece& b, const Scalar& x) const {
        return b.slope * x + b.offset + b.gap * eval_step_window(x, p.lo, p.hi);
    }
    Scalar eval_impl(const SweepPiece& s, const Scalar& x) const {
        Scalar xi = x - s.xc;
        Scalar w = eval_step_window(x, p.lo, p.hi);
        return s.yc + xi * bm::exp(s.ln_s0 + (s.ln_s1 - s.ln_s0) * w);
    }
    Scalar eval_impl(const FlowPiece& f, const Scalar& x) const {
        return f.scale * f.flow->flow(x / f.scale, f.time, f.tol);
    }

    taylor::Series taylor_impl(const IdentityPiece&, const Scalar& x, int order) const {
        taylor::Series c(static_cast<size_t>(order) + 1, Scalar(0));
        c[0] = x;
        if (order >= 1) c[1] = 1;
        return c;
    }
    taylor::Series taylor_impl(const AffinePiece& a, const Scalar& x, int order) const {
        taylor::Series c(static_cast<size_t>(order) + 1, Scalar(0));
        c[0] = a.slope * x + a.offset;
        if (order >= 1) c[1] = a.slope;
        return c;
    }
    taylor::Series taylor_impl(const BlendPiece& b, const Scalar& x, int order) const {
        taylor::Series c = smooth_step_taylor(x, p.lo, p.hi, order);
        for (auto& v : c) v *= b.gap;
        c[0] += b.slope * x + b.offset;
        if (order >= 1) c[1] += b.slope;
        return c;
    }
    taylor::Series taylor_impl(const SweepPiece& s, const Scalar& x, int order) const {
        const size_t n = static_cast<size_t>(order) + 1;
        taylor::Series w = smooth_step_taylor(x, p.lo, p.hi, order);
        Scalar dln = s.ln_s1 - s.ln_s0;
        for (auto& v : w) v *= dln;
        w[0] += s.ln_s0;
        taylor::Series m = taylor::exp(w);
        // value = yc + (xi0 + dxi) * m
        Scalar xi0 = x - s.xc;
        taylor::Series out(n, Scalar(0));
        for (size_t i = 0; i < n; ++i) {
            out[i] = xi0 * m[i];
            if (i >= 1) out[i] += m[i - 1];
        }
        out[0] += s.yc;
        return out;
    }
    taylor::Series taylor_impl(const FlowPiece& f, const Scalar& x, int order) const {
        taylor::Series c = f.flow->flow_taylor(x / f.scale, f.time, order, f.tol);
        Scalar p10(1);
        c[0] *= f.scale;
        for (size_t i = 2; i < c.size(); ++i) {
            p10 /= f.scale;
            c[i] *= p10;
        }
        return c;
    }

    Scalar inverse_impl(const IdentityPiece&, const Scalar& y) const { return y; }
    Scalar inverse_impl(const AffinePiece& a, const Scalar& y) const {
        return (y - a.offset) / a.slope;
    }
    Scalar inverse_impl(const BlendPiece& b, const Scalar& y) const {
        auto g = [&](const Scalar& x) { return eval_impl(b, x); };
        auto gp = [&](const Scalar& x) {
            taylor::Series c = taylor_impl(b, x, 1);
            return c[1];
        };
        return invert_increasing(g, gp, y, p.lo, p.hi);
    }
    Scalar inverse_impl(const SweepPiece& s, const Scalar& y) const {
        auto g = [&](const Scalar& x) { return eval_impl(s, x); };
        auto gp = [&](const Scalar& x) {
            taylor::Series c = taylor_impl(s, x, 1);
            return c[1];
        };
        return invert_increasing(g, gp, y, p.lo, p.hi);
    }
    Scalar inverse_impl(const FlowPiece& f, const Scalar& y) const {
        return f.scale * f.flow->flow(y / f.scale, -f.time, f.tol);
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// FamilyBase
// ---------------------------------------------------------------------------

void FamilyBase::finalize() {
    if (pieces_.empty()) throw InvalidParam("family with no pieces");
    if (pieces_.front().lo != 0 || pieces_.back().hi != 1)
        throw InvalidParam("family pieces must cover [0,1]");
    const Scalar cont_tol = pow2(-static_cast<long>(precision_bits() / 2));
    for (auto& p : pieces_) {
        PieceEval pe{p};
        p.vlo = pe.value(p.lo);
        p.vhi = pe.value(p.hi);
    }
    for (size_t i = 0; i + 1 < pieces_.size(); ++i) {
        if (pieces_[i].hi != pieces_[i + 1].lo)
            throw InvalidParam("family pieces not contiguous");
        if (bm::abs(pieces_[i].vhi - pieces_[i + 1].vlo) > cont_tol)
            throw InvalidParam("family pieces not continuous");
    }
    // slope range; this also rejects non-monotone parameter choices
    min_slope_ = Scalar(0);
    max_slope_ = Scalar(0);
    bool first = true;
    for (const auto& p : pieces_) {
        const bool heavy = std::holds_alternative<FlowPiece>(p.impl);
        const int samples = heavy ? 5 : 33;
        PieceEval pe{p};
        for (int j = 0; j <= samples; ++j) {
            Scalar x = p.lo + (p.hi - p.lo) * j / samples;
            taylor::Series c = pe.tay(x, 1);
            if (c[1] <= 0) throw InvalidParam("family piece not strictly increasing");
            if (first || c[1] < min_slope_) min_slope_ = c[1];
            if (first || c[1] > max_slope_) max_slope_ = c[1];
            first = false;
        }
    }
}

namespace {
const Piece& find_piece(const std::vector<Piece>& pieces, const Scalar& x) {
    size_t lo = 0, hi = pieces.size();
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (x < pieces[mid].lo) hi = mid; else lo = mid;
    }
    return pieces[lo];
}

const Piece& find_piece_by_value(const std::vector<Piece>& pieces, const Scalar& y) {
    size_t lo = 0, hi = pieces.size();
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (y < pieces[mid].vlo) hi = mid; else lo = mid;
    }
    return pieces[lo];
}
}  // namespace

Scalar FamilyBase::eval(const Scalar& x) const {
    const Piece& p = find_piece(pieces_, x);
    return PieceEval{p}.value(x);
}

Scalar FamilyBase::eval_inverse(const Scalar& y) const {
    const Piece& p = find_piece_by_value(pieces_, y);
    return PieceEval{p}.inverse(y);
}

taylor::Series FamilyBase::taylor_at(const Scalar& x, int order) const {
    const Piece& p = find_piece(pieces_, x);
    return PieceEval{p}.tay(x, order);
}

taylor::Series FamilyBase::inverse_taylor_at(const Scalar& y, int order) const {
    const Piece& p = find_piece_by_value(pieces_, y);
    if (const auto* f = std::get_if<FlowPiece>(&p.impl)) {
        taylor::Series c = f->flow->flow_taylor(y / f->scale, -f->time, order, f->tol);
        Scalar p10(1);
        c[0] *= f->scale;
        for (size_t i = 2; i < c.size(); ++i) {
            p10 /= f->scale;
            c[i] *= p10;
        }
        return c;
    }
    Scalar v = PieceEval{p}.inverse(y);
    taylor::Series fwd = PieceEval{p}.tay(v, order);
    taylor::Series shifted = fwd;
    shifted[0] = 0;
    taylor::Series g = taylor::revert(shifted);
    g[0] = v;
    return g;
}

// ---------------------------------------------------------------------------
// Concrete families
// ---------------------------------------------------------------------------

namespace {

class IdentityFamily final : public FamilyBase {
public:
    IdentityFamily() {
        pieces_.push_back({Scalar(0), Scalar(1), {}, {}, IdentityPiece{}});
        finalize();
    }
    std::string kind() const override { return "identity"; }
    json descriptor() const override { return json{{"kind", "identity"}}; }
    std::optional<Rational> eval_exact(const Rational& x) const override { return x; }
};

class G1SingFamily final : public FamilyBase {
public:
    G1SingFamily(int n, Integer k) : n_(n), k_(std::move(k)) {
        if (k_ < 2) throw InvalidParam("g1sing requires k >= 2");
        s0_ = Rational(1, k_ - 1);
        jhi_ = Rational(k_ - 1, k_);  // 1 - 1/k
        Scalar s0 = to_scalar(s0_);
        Scalar jhi = to_scalar(jhi_);
        pieces_.push_back({Scalar(0), jhi, {}, {}, AffinePiece{s0, Scalar(0)}});
        pieces_.push_back({jhi, Scalar(1), {}, {}, BlendPiece{s0, Scalar(0), 1 - s0}});
        sets_["J"] = {Rational(0), jhi_};
        sets_["I"] = {Rational(0), Rational(1, k_)};
        finalize();
    }
    std::string kind() const override { return "g1sing"; }
    json descriptor() const override {
        return json{{"kind", "g1sing"}, {"n", n_}, {"k", k_.str()}};
    }
    std::optional<Rational> eval_exact(const Rational& x) const override {
        if (x >= 0 && x <= jhi_) return s0_ * x;
        return std::nullopt;
    }

private:
    int n_;
    Integer k_;
    Rational s0_, jhi_;
};

class GBetaFamily final : public FamilyBase {
public:
    GBetaFamily(Scalar t, std::optional<Rational> exact_t)
        : t_(std::move(t)), exact_t_(std::move(exact_t)) {
        if (t_ <= 0 || t_ > Scalar(1) / 5)
            throw InvalidParam("gbeta requires 0 < t <= 1/5 (case windows overlap)");
        Scalar xs = t_ / (1 + t_);
        Scalar ys = 1 / (1 + t_);
        Scalar lnt = bm::log(t_);
        Scalar q4 = t_ / 4;
        pieces_.push_back({Scalar(0), q4, {}, {}, SweepPiece{Scalar(0), Scalar(0), lnt, -lnt}});
        pieces_.push_back({q4, xs - q4, {}, {}, AffinePiece{1 / t_, Scalar(0)}});
        pieces_.push_back({xs - q4, xs, {}, {}, SweepPiece{xs, ys, -lnt, lnt}});
        pieces_.push_back({xs, Scalar(1), {}, {}, AffinePiece{t_, 1 - t_}});
        if (exact_t_) {
            const Rational& rt = *exact_t_;
            sets_["I"] = {rt / 4, rt * 7 / 12};
        }
        finalize();
    }
    std::string kind() const override { return "gbeta"; }
    json descriptor() const override {
        json j{{"kind", "gbeta"}, {"t", render_decimal(t_)}};
        if (exact_t_) j["t_exact"] = exact_t_->str();
        return j;
    }
    std::optional<Rational> eval_exact(const Rational& x) const override {
        if (!exact_t_) return std::nullopt;
        const Rational& rt = *exact_t_;
        Rational xs = rt / (1 + rt);
        if (x >= rt / 4 && x <= xs - rt / 4) return x / rt;
        if (x >= xs && x <= 1) return rt * (x - 1) + 1;
        return std::nullopt;
    }

private:
    Scalar t_;
    std::optional<Rational> exact_t_;
};

class G1AcFamily final : public FamilyBase {
public:
    explicit G1AcFamily(int n) : n_(n) {
        if (n < 1) throw InvalidParam("g1ac requires n >= 1");
        Integer s(1);
        while (s < n) s *= 2;  // dyadic ceiling of n
        L_ = Rational(1, Integer(1) << (n + 1));
        x0_ = L_ / 4;
        d1_ = L_ / (32 * s);
        w_ = L_ / (16 * s);
        d3_ = L_ / (32 * s);
        Rational xm = x0_ + d1_ + w_ + d3_;
        Rational disp = Rational(n) * (d1_ + w_ + d3_);
        Rational gxm = xm + disp;
        sigma_ = Rational(1, 2);
        Rational x1 = xm + disp / (1 - sigma_);
        Rational d2 = L_ / 16;
        if (x1 + d2 > L_) throw InvalidParam("g1ac geometry overflow");
        xm_ = xm; x1_ = x1; d2_ = d2; gxm_ = gxm;

        Scalar sl_mid = Scalar(n + 1);
        Scalar ln_mid = bm::log(sl_mid);
        Scalar ln_sig = bm::log(to_scalar(sigma_));
        auto S = [](const Rational& r) { return to_scalar(r); };
        pieces_.push_back({Scalar(0), S(x0_), {}, {}, IdentityPiece{}});
        pieces_.push_back({S(x0_), S(x0_ + d1_), {}, {},
                           SweepPiece{S(x0_), S(x0_), Scalar(0), ln_mid}});
        pieces_.push_back({S(x0_ + d1_), S(xm - d3_), {}, {},
                           AffinePiece{sl_mid, S(x0_) - sl_mid * S(x0_)}});
        pieces_.push_back({S(xm - d3_), S(xm), {}, {},
                           SweepPiece{S(xm), S(gxm), ln_mid, ln_sig}});
        pieces_.push_back({S(xm), S(x1), {}, {},
                           AffinePiece{to_scalar(sigma_), S(gxm) - to_scalar(sigma_) * S(xm)}});
        pieces_.push_back({S(x1), S(x1 + d2), {}, {},
                           SweepPiece{S(x1), S(x1), ln_sig, Scalar(0)}});
        pieces_.push_back({S(x1 + d2), Scalar(1), {}, {}, IdentityPiece{}});
        sets_["K"] = {L_, Rational(1)};
        sets_["I"] = {x0_ + d1_, x0_ + d1_ + w_};
        finalize();
    }
    std::string kind() const override { return "g1ac"; }
    json descriptor() const override { return json{{"kind", "g1ac"}, {"n", n_}}; }
    std::optional<Rational> eval_exact(const Rational& x) const override {
        if (x >= 0 && x <= x0_) return x;
        if (x >= x0_ + d1_ && x <= xm_ - d3_) return Rational(n_ + 1) * (x - x0_) + x0_;
        if (x >= xm_ && x <= x1_) return sigma_ * (x - xm_) + gxm_;
        if (x >= x1_ + d2_ && x <= 1) return x;
        return std::nullopt;
    }

private:
    int n_;
    Rational L_, x0_, d1_, w_, d3_, xm_, x1_, d2_, gxm_, sigma_;
};

class G0AcFamily final : public FamilyBase {
public:
    G0AcFamily(Rational s, Rational t) : s_(std::move(s)), t_(std::move(t)) {
        if (s_ <= 0 || t_ >= 1 || s_ > t_) throw InvalidParam("g0ac requires 0 < s <= t < 1");
        if (t_ >= Rational(1, 2)) throw InvalidParam("g0ac requires t < 1/2");
        identity_ = (s_ == t_);
        if (!identity_ && 5 * s_ > t_)
            throw InvalidParam("g0ac collars overlap (need t >= 5 s)");
        if (identity_) {
            pieces_.push_back({Scalar(0), Scalar(1), {}, {}, IdentityPiece{}});
        } else {
            xab_ = s_ * t_ / (s_ + t_);
            Rational yab = t_ * t_ / (s_ + t_);
            Scalar up = to_scalar(Rational(t_) / s_);
            Scalar dn = to_scalar(Rational(s_) / t_);
            Scalar ln_up = bm::log(up);
            auto S = [](const Rational& r) { return to_scalar(r); };
            pieces_.push_back({Scalar(0), S(s_ / 4), {}, {},
                               SweepPiece{Scalar(0), Scalar(0), Scalar(0), ln_up}});
            pieces_.push_back({S(s_ / 4), S(xab_ - s_ / 4), {}, {}, AffinePiece{up, Scalar(0)}});
            pieces_.push_back({S(xab_ - s_ / 4), S(xab_), {}, {},
                               SweepPiece{S(xab_), S(yab), ln_up, -ln_up}});
            pieces_.push_back({S(xab_), S(t_), {}, {}, AffinePiece{dn, S(t_ - s_)}});
            pieces_.push_back({S(t_), S(t_ + t_ / 4), {}, {},
                               SweepPiece{S(t_), S(t_), -ln_up, Scalar(0)}});
            pieces_.push_back({S(t_ + t_ / 4), Scalar(1), {}, {}, IdentityPiece{}});
        }
        sets_["I"] = {s_ / 4, s_ * 7 / 12};
        sets_["K"] = {2 * t_, Rational(1)};
        finalize();
    }
    std::string kind() const override { return "g0ac"; }
    json descriptor() const override {
        return json{{"kind", "g0ac"}, {"s", s_.str()}, {"t", t_.str()}};
    }
    std::optional<Rational> eval_exact(const Rational& x) const override {
        if (identity_) return x;
        if (x >= s_ / 4 && x <= xab_ - s_ / 4) return x * t_ / s_;
        if (x >= xab_ && x <= t_) return x * s_ / t_ + (t_ - s_);
        if (x >= t_ + t_ / 4 && x <= 1) return x;
        return std::nullopt;
    }

private:
    Rational s_, t_, xab_;
    bool identity_ = false;
};

class GkFamily final : public FamilyBase {
public:
    GkFamily(Rational t, int k, std::shared_ptr<const FlowSpec> flow, std::optional<Scalar> tol)
        : t_(std::move(t)), k_(k), flow_(std::move(flow)) {
        if (t_ <= 0 || t_ >= 1) throw InvalidParam("gk requires 0 < t < 1");
        if (k_ < 1) throw InvalidParam("gk requires k >= 1");
        tol_ = tol ? *tol : bm::pow(Scalar(10), -static_cast<long>(precision_bits() / 4));
        scale_ = rational_pow(t_, k_);
        Rational time_r = rational_pow(t_, static_cast<long>(k_) * k_);
        Scalar sc = to_scalar(scale_);
        Scalar tm = to_scalar(time_r);
        pieces_.push_back({Scalar(0), sc, {}, {}, FlowPiece{flow_, sc, tm, tol_}});
        pieces_.push_back({sc, Scalar(1), {}, {}, IdentityPiece{}});
        sets_["K"] = {scale_, Rational(1)};
        auto win = flow_->deriv_window(k_ + 1);
        sets_["I"] = {scale_ * win.first, scale_ * win.second};
        finalize();
        // integrator self-check: flow group property at probe points
        for (int j = 1; j <= 3; ++j) {
            Scalar u = Scalar(j) / 4;
            Scalar fwd = flow_->flow(u, tm, tol_);
            Scalar back = flow_->flow(fwd, -tm, tol_);
            if (bm::abs(back - u) > tol_ * 64)
                throw IntegrationFailure("flow round trip misses tolerance");
        }
    }
    std::string kind() const override { return "gk"; }
    json descriptor() const override {
        return json{{"kind", "gk"}, {"t", t_.str()}, {"k", k_}};
    }
    std::optional<Rational> eval_exact(const Rational& x) const override {
        if (x >= scale_ && x <= 1) return x;
        return std::nullopt;
    }

private:
    Rational t_, scale_;
    int k_;
    std::shared_ptr<const FlowSpec> flow_;
    Scalar tol_;
};

}  // namespace

GeneratorFamily make_identity_family() { return std::make_shared<IdentityFamily>(); }

GeneratorFamily make_g1sing(int n, const Integer& k) {
    return std::make_shared<G1SingFamily>(n, k);
}

GeneratorFamily make_g1ac(int n) { return std::make_shared<G1AcFamily>(n); }

GeneratorFamily make_gbeta(const Scalar& t, std::optional<Rational> exact_t) {
    return std::make_shared<GBetaFamily>(t, std::move(exact_t));
}

GeneratorFamily make_g0ac(const Rational& s, const Rational& t) {
    return std::make_shared<G0AcFamily>(s, t);
}

GeneratorFamily make_gk(const Rational& t, int k, std::shared_ptr<const FlowSpec> flow,
                        std::optional<Scalar> tol) {
    return std::make_shared<GkFamily>(t, k, std::move(flow), std::move(tol));
}

// ---------------------------------------------------------------------------
// IntervalSet
// ---------------------------------------------------------------------------

Rational IntervalSet::measure() const {
    Rational m(0);
    for (const auto& a : hat) m += a.length();
    return m;
}

Integer IntervalSet::component_count() const {
    return cover * Integer(static_cast<long>(hat.size()));
}

bool IntervalSet::contains(const Rational& x) const {
    Rational u = mod1(x * Rational(cover));
    for (const auto& a : hat)
        if (u >= a.lo && u <= a.hi) return true;
    return false;
}

HatInterval IntervalSet::component(const Integer& cell, size_t arc) const {
    const auto& a = hat.at(arc);
    Rational c(cell);
    Rational q(cover);
    return {(c + a.lo) / q, (c + a.hi) / q};
}

std::vector<HatInterval> IntervalSet::enumerate(const Integer& max_components) const {
    if (component_count() > max_components)
        throw PrecisionExhausted("interval set too large to enumerate");
    std::vector<HatInterval> out;
    for (Integer cell = 0; cell < cover; ++cell)
        for (size_t a = 0; a < hat.size(); ++a) out.push_back(component(cell, a));
    return out;
}

IntervalSet special_sets(const GeneratorFamily& f, const Integer& q, const std::string& which) {
    auto it = f->hat_sets().find(which);
    if (it == f->hat_sets().end())
        throw InvalidParam("family " + f->kind() + " has no recorded set '" + which + "'");
    IntervalSet s;
    s.hat.push_back(it->second);
    s.cover = q;
    s.label = which + ":" + f->kind();
    return s;
}

}  // namespace fac
