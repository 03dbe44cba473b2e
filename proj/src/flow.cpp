#include "fac/flow.hpp"

#include <algorithm>

namespace fac {

namespace {

const Rational kSupLo(1, 8);
const Rational kSupHi(7, 8);

Scalar abs_max(const taylor::Series& c, size_t upto) {
    Scalar m(0);
    for (size_t i = 0; i < c.size() && i <= upto; ++i) {
        Scalar a = boost::multiprecision::abs(c[i]);
        if (a > m) m = a;
    }
    return m;
}

}  // namespace

std::shared_ptr<const FlowSpec> FlowSpec::canonical() {
    static std::shared_ptr<const FlowSpec> inst(new FlowSpec());
    return inst;
}

Scalar FlowSpec::field(const Scalar& x) const {
    Scalar lo = to_scalar(kSupLo), hi = to_scalar(kSupHi);
    if (x <= lo || x >= hi) return Scalar(0);
    Scalar up = smooth_step(x, lo, to_scalar(Rational(3, 8)));
    Scalar dn = smooth_step(x, to_scalar(Rational(5, 8)), hi);
    return up * (1 - dn);
}

taylor::Series FlowSpec::field_taylor(const Scalar& x, int order) const {
    Scalar lo = to_scalar(kSupLo), hi = to_scalar(kSupHi);
    if (x <= lo || x >= hi) return taylor::Series(static_cast<size_t>(order) + 1, Scalar(0));
    taylor::Series up = smooth_step_taylor(x, lo, to_scalar(Rational(3, 8)), order);
    taylor::Series dn = smooth_step_taylor(x, to_scalar(Rational(5, 8)), hi, order);
    for (auto& c : dn) c = -c;
    dn[0] += 1;
    return taylor::mul(up, dn);
}

taylor::Series FlowSpec::flow_taylor(const Scalar& x, const Scalar& time, int order,
                                     const Scalar& tol) const {
    std::string key = x.str(0, std::ios_base::scientific) + "|" +
                      time.str(0, std::ios_base::scientific) + "|" +
                      std::to_string(order) + "|" +
                      std::to_string(mpfr_get_exp(tol.backend().data()));
    auto it = jet_cache_.find(key);
    if (it != jet_cache_.end()) return it->second;
    taylor::Series out = flow_taylor_uncached(x, time, order, tol);
    if (jet_cache_.size() > 20000) jet_cache_.clear();
    jet_cache_.emplace(std::move(key), out);
    return out;
}

taylor::Series FlowSpec::flow_taylor_uncached(const Scalar& x, const Scalar& time, int order,
                                              const Scalar& tol) const {
    const size_t R = static_cast<size_t>(order);
    taylor::Series cur(R + 1, Scalar(0));
    cur[0] = x;
    if (R >= 1) cur[1] = 1;
    if (time == 0) return cur;

    // series order per step; tails are tested numerically below
    double lt = -static_cast<double>(mpfr_get_exp(tol.backend().data())) * 0.30103;
    const size_t M = std::clamp<size_t>(static_cast<size_t>(1.3 * lt) + 8, 16, 44);
    const size_t L = R + M + 1;
    // hard step cap: the flat-kernel field makes the time series asymptotic
    // rather than convergent, with a remainder floor the computed
    // coefficients cannot see; steps of ~1e-2 keep that floor far below
    // working tolerances (measured), shrinking further for tighter ones
    const Scalar eps_cap = Scalar(64) / (100 * std::max(64.0, lt));

    Scalar remaining = time;
    const Scalar sign = (time > 0) ? Scalar(1) : Scalar(-1);
    const int max_steps = 100000;
    for (int step = 0; step < max_steps; ++step) {
        if (remaining == 0) break;
        const Scalar y = cur[0];

        // Lie coefficients X_m at y, full length L so truncation stays exact
        taylor::Series xjet = field_taylor(y, static_cast<int>(L) - 1);
        std::vector<taylor::Series> lie(M + 1);
        lie[0].assign(L, Scalar(0));
        lie[0][0] = y;
        lie[0][1] = 1;
        bool all_zero = true;
        for (size_t m = 1; m <= M; ++m) {
            lie[m] = taylor::mul(xjet, taylor::derivative(lie[m - 1]));
            if (all_zero && abs_max(lie[m], L - 1) != 0) all_zero = false;
        }
        if (all_zero) break;  // flat region: stationary to all computed orders

        // choose the largest step eps <= |remaining| with a decaying tail
        Scalar eps = std::min(boost::multiprecision::abs(remaining), eps_cap);
        const Scalar scale = std::max(Scalar(1), abs_max(cur, R));
        for (int halvings = 0;; ++halvings) {
            if (halvings > 2000) throw IntegrationFailure("flow step underflow");
            Scalar fact(1), ep(1);
            Scalar last(0), prev(0);
            for (size_t m = 1; m <= M; ++m) {
                fact *= static_cast<long>(m);
                ep *= eps;
                Scalar term = abs_max(lie[m], L - 1) * ep / fact;
                prev = last;
                last = term;
            }
            if (last < tol * scale && (prev == 0 || last <= prev)) break;
            eps /= 2;
        }

        // phi_eps jet at y (signed step), truncated to order R
        Scalar h = eps * sign;
        taylor::Series phi(R + 1, Scalar(0));
        Scalar fact(1), hp(1);
        phi[0] = y;
        if (R >= 1) phi[1] = 1;
        for (size_t m = 1; m <= M; ++m) {
            fact *= static_cast<long>(m);
            hp *= h;
            Scalar w = hp / fact;
            for (size_t i = 0; i <= R; ++i) phi[i] += w * lie[m][i];
        }

        // advance: phi_{tau+h} = phi_h o phi_tau; compose() expands phi
        // around cur[0], which is exactly where the step jet was built
        cur = taylor::compose(phi, cur);
        remaining -= h;
        if (boost::multiprecision::abs(remaining) < tol * boost::multiprecision::abs(time))
            break;
    }
    return cur;
}

Scalar FlowSpec::flow(const Scalar& x, const Scalar& time, const Scalar& tol) const {
    return flow_taylor(x, time, 0, tol)[0];
}

Scalar FlowSpec::deriv_norm(int r, const Scalar& time, const Scalar& tol, long grid) const {
    Scalar best(0);
    for (long j = 0; j <= grid; ++j) {
        Scalar x = to_scalar(kSupLo) + (to_scalar(kSupHi) - to_scalar(kSupLo)) * j / grid;
        taylor::Series c = flow_taylor(x, time, r, tol);
        Scalar v = c[static_cast<size_t>(r)];
        Scalar fact(1);
        for (int i = 2; i <= r; ++i) fact *= i;
        v *= fact;                       // taylor coeff -> derivative
        if (r == 0) v -= x;              // displacement for order 0
        if (r == 1) v -= 1;              // (phi - id)' = phi' - 1
        Scalar a = boost::multiprecision::abs(v);
        if (a > best) best = a;
    }
    return best;
}

std::pair<Rational, Rational> FlowSpec::deriv_window(int r) const {
    auto it = window_cache_.find(r);
    if (it != window_cache_.end()) return it->second;
    const long G = 512;
    long best_j = 0;
    Scalar best(-1);
    for (long j = G / 8 + 1; j < 7 * G / 8; ++j) {
        Scalar x = Scalar(j) / G;
        taylor::Series c = field_taylor(x, r);
        Scalar fact(1);
        for (int i = 2; i <= r; ++i) fact *= i;
        Scalar v = boost::multiprecision::abs(c[static_cast<size_t>(r)] * fact);
        if (v > best) { best = v; best_j = j; }
    }
    Rational lo(best_j - 1, G), hi(best_j + 1, G);
    // shrink until |X^(r)| keeps a quarter of its max on the window
    for (int tries = 0; tries < 12; ++tries) {
        bool ok = true;
        for (long j = 0; j <= 16; ++j) {
            Scalar x = to_scalar(lo) + to_scalar(hi - lo) * j / 16;
            taylor::Series c = field_taylor(x, r);
            Scalar fact(1);
            for (int i = 2; i <= r; ++i) fact *= i;
            if (boost::multiprecision::abs(c[static_cast<size_t>(r)] * fact) < best / 4) {
                ok = false;
                break;
            }
        }
        if (ok) break;
        Rational mid = (lo + hi) / 2, w = (hi - lo) / 4;
        lo = mid - w;
        hi = mid + w;
    }
    window_cache_[r] = {lo, hi};
    return {lo, hi};
}

}  // namespace fac
