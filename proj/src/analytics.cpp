#include "fac/analytics.hpp"

#include <algorithm>

namespace fac {

namespace bm = boost::multiprecision;

RotationEstimate rotation_number(const CircleMap& f, long iterations) {
    if (iterations < 1) throw InvalidParam("rotation_number requires iterations >= 1");
    Scalar x(0);
    for (long i = 0; i < iterations; ++i) x = f.eval_lift(x);
    RotationEstimate out;
    out.estimate = x / iterations;
    out.error_bound = Scalar(1) / iterations;
    out.iterations = iterations;
    return out;
}

HolderFit holder_exponent(const std::function<Scalar(const Scalar&)>& map,
                          int scale_lo, int scale_hi, long pairs) {
    if (scale_hi - scale_lo + 1 < 3) throw DegenerateFit("need at least 3 scales");
    if (scale_lo < 3 || static_cast<unsigned>(scale_hi) > precision_bits() / 4)
        throw InvalidParam("scale range outside (2^-bits/4, 2^-3)");
    HolderFit fit;
    fit.scale_lo = scale_lo;
    fit.scale_hi = scale_hi;
    std::vector<Scalar> zs, ys;
    for (int j = scale_lo; j <= scale_hi; ++j) {
        Scalar h = pow2(-j);
        Scalar sup(0);
        for (long i = 0; i < pairs; ++i) {
            Scalar x = Scalar(i) / pairs;
            Scalar d = circle_dist(map(mod1(x + h)), map(x));
            if (d > sup) sup = d;
        }
        fit.table.emplace_back(h, sup);
        zs.push_back(-j * bm::log(Scalar(2)));
        ys.push_back(bm::log(sup));
    }
    const size_t m = zs.size();
    Scalar sz(0), sy(0), szz(0), szy(0);
    for (size_t i = 0; i < m; ++i) {
        sz += zs[i];
        sy += ys[i];
        szz += zs[i] * zs[i];
        szy += zs[i] * ys[i];
    }
    Scalar denom = Scalar(static_cast<long>(m)) * szz - sz * sz;
    fit.exponent = (Scalar(static_cast<long>(m)) * szy - sz * sy) / denom;
    Scalar icept = (sy - fit.exponent * sz) / static_cast<long>(m);
    Scalar ss(0);
    for (size_t i = 0; i < m; ++i) {
        Scalar rres = ys[i] - (fit.exponent * zs[i] + icept);
        ss += rres * rres;
    }
    fit.residual = bm::sqrt(ss / static_cast<long>(m));
    return fit;
}

HolderFit holder_exponent(const CircleMap& map, bool inverse_direction,
                          int scale_lo, int scale_hi, long pairs) {
    CircleMap m = inverse_direction ? map.inverse() : map;
    return holder_exponent([m](const Scalar& x) { return m.eval(x); },
                           scale_lo, scale_hi, pairs);
}

EmpiricalMeasure measure_cdf_pushforward(const CircleMap& H, long grid) {
    EmpiricalMeasure out;
    out.source = "pushforward";
    CircleMap hinv = H.inverse();
    Scalar y0 = point_to_scalar(hinv.eval(CirclePoint(Rational(0))));
    out.cdf.emplace_back(Scalar(0), Scalar(0));
    for (long j = 1; j < grid; ++j) {
        Rational x(j, grid);
        Scalar y = point_to_scalar(hinv.eval(CirclePoint(x)));
        out.cdf.emplace_back(to_scalar(x), mod1(y - y0));
    }
    out.cdf.emplace_back(Scalar(1), Scalar(1));
    return out;
}

EmpiricalMeasure measure_cdf_birkhoff(const CircleMap& f, long orbit_len) {
    EmpiricalMeasure out;
    out.source = "birkhoff";
    std::vector<Scalar> pts;
    pts.reserve(static_cast<size_t>(orbit_len));
    Scalar x(0);
    for (long i = 0; i < orbit_len; ++i) {
        pts.push_back(mod1(x));
        x = f.eval(x);
    }
    std::sort(pts.begin(), pts.end());
    out.cdf.emplace_back(Scalar(0), Scalar(0));
    for (long i = 0; i < orbit_len; ++i)
        out.cdf.emplace_back(pts[static_cast<size_t>(i)], Scalar(i + 1) / orbit_len);
    out.cdf.emplace_back(Scalar(1), Scalar(1));
    return out;
}

namespace {
Scalar cdf_value(const EmpiricalMeasure& m, const Scalar& x) {
    // right-continuous step/polyline evaluation at x
    size_t lo = 0, hi = m.cdf.size();
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (m.cdf[mid].first <= x) lo = mid; else hi = mid;
    }
    return m.cdf[lo].second;
}
}  // namespace

Scalar cdf_sup_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    Scalar sup(0);
    for (const auto& [x, fa] : a.cdf) {
        Scalar d = bm::abs(fa - cdf_value(b, x));
        if (d > sup) sup = d;
    }
    for (const auto& [x, fb] : b.cdf) {
        Scalar d = bm::abs(cdf_value(a, x) - fb);
        if (d > sup) sup = d;
    }
    return sup;
}

SingularityDiagnostic singularity_diagnostic(const ConstructionState& st) {
    if (st.construction != Construction::G1Sing)
        throw UnknownDiagnostic("singularity diagnostic needs a g1sing run");
    SingularityDiagnostic out;
    out.n = st.n;
    out.m_C = 1;
    out.m_HC = 1;
    out.exact = true;
    for (int i = 1; i <= st.n; ++i) {
        Integer k = st.config.k_at(i);
        out.m_C *= Rational(k - 1, k);
        out.m_HC *= Rational(1, k);
        // affine action: hat map sends the J endpoint to the I endpoint exactly
        const GeneratorFamily& fam = st.families[static_cast<size_t>(i) - 1];
        auto v = fam->eval_exact(Rational(k - 1, k));
        bool affine_ok = v && *v == Rational(1, k);
        out.checks.push_back({"affine-action", Scalar(affine_ok ? 0 : 1), Scalar(0), affine_ok});
        if (!affine_ok) out.exact = false;
        if (i >= 2) {
            bool div = (st.covers[static_cast<size_t>(i) - 1] %
                        (st.config.k_at(i - 1) * st.covers[static_cast<size_t>(i) - 2])) == 0;
            out.checks.push_back({"divisibility", Scalar(div ? 0 : 1), Scalar(0), div});
            if (!div) out.exact = false;
        }
    }
    return out;
}

AcDiagnostic ac_diagnostic(const ConstructionState& st, long samples) {
    if (st.construction != Construction::G1Ac && st.construction != Construction::G0Ac)
        throw UnknownDiagnostic("ac diagnostic needs a g1ac or g0ac run");
    AcDiagnostic out;
    out.n = st.n;

    // fixed-set mass
    if (st.construction == Construction::G1Ac) {
        bool aligned = true;
        for (int i = 1; i < st.n; ++i) {
            Integer den = (Integer(1) << (i + 1)) * st.covers[static_cast<size_t>(i) - 1];
            if (st.covers[static_cast<size_t>(i)] % den != 0) aligned = false;
        }
        out.mass_exact = aligned;
        out.fixed_mass = 1;
        if (aligned) {
            for (int i = 1; i <= st.n; ++i)
                out.fixed_mass *= 1 - rational_pow(Rational(1, 2), i + 1);
        } else {
            for (int i = 1; i <= st.n; ++i)
                out.fixed_mass -= rational_pow(Rational(1, 2), i + 1);
        }
    } else {
        out.mass_exact = false;
        out.fixed_mass = 1;
        for (int i = 1; i <= st.n; ++i)
            out.fixed_mass -= 2 * rational_pow(Rational(1, 3), i + 2);
    }

    // identity on the fixed set, probed at exact rational points
    Scalar sup(0);
    long checked = 0;
    auto in_all_K = [&](const Rational& x) {
        for (int i = 1; i <= st.n; ++i) {
            IntervalSet K = special_sets(st.families[static_cast<size_t>(i) - 1],
                                         st.covers[static_cast<size_t>(i) - 1], "K");
            if (!K.contains(x)) return false;
        }
        return true;
    };
    // points inside the certified nested region are in every K by construction
    std::vector<Rational> probes;
    for (long j = 1; j <= samples / 2; ++j)
        probes.push_back(st.nested.lo +
                         (st.nested.hi - st.nested.lo) * Rational(j, samples / 2 + 1));
    for (long j = 0; j < samples && checked < samples; ++j) {
        Rational x(2 * j + 1, 2 * samples);
        if (in_all_K(x)) probes.push_back(x);
    }
    for (const auto& x : probes) {
        if (checked >= samples) break;
        if (!in_all_K(x)) continue;
        ++checked;
        CirclePoint y = st.H.eval(CirclePoint(x));
        Scalar d;
        if (const auto* ry = std::get_if<Rational>(&y)) {
            d = to_scalar(circle_dist(*ry, x));
        } else {
            d = circle_dist(std::get<Scalar>(y), to_scalar(x));
        }
        if (d > sup) sup = d;
    }
    out.identity_sup = sup;
    out.points_checked = checked;
    out.identity_verified = checked > 0 && sup < bm::pow(Scalar(10), -30);

    // g0ac modulus ratios on an I component (exact affine action)
    if (st.construction == Construction::G0Ac) {
        for (int i = 1; i <= st.n; ++i) {
            const GeneratorFamily& fam = st.families[static_cast<size_t>(i) - 1];
            const Integer& q = st.covers[static_cast<size_t>(i) - 1];
            IntervalSet I = special_sets(fam, q, "I");
            HatInterval comp = I.component(Integer(0), 0);
            CircleMap h = lift_by_cover(fam, q);
            CirclePoint va = h.eval(CirclePoint(comp.lo));
            CirclePoint vb = h.eval(CirclePoint(comp.hi));
            Scalar num = bm::abs(point_to_scalar(vb) - point_to_scalar(va));
            Scalar den = pow_rational(to_scalar(comp.hi - comp.lo), Rational(1, i));
            out.ratio_rows.emplace_back(num / den, Scalar(i));
        }
    }
    return out;
}

CircleMap partial_conjugacy(const ConstructionState& st, int i) {
    CircleMap H;
    for (int j = 1; j <= i; ++j) H = H.after(st.lifts[static_cast<size_t>(j) - 1]);
    return H;
}

CkDiagnostic ck_diagnostic(const ConstructionState& st) {
    CkDiagnostic out;
    if (st.construction == Construction::G1Ac) {
        out.quantity = "max |H_n'| on the nested witness";
        for (int i = 1; i <= st.n; ++i) {
            const HatInterval& w = st.nested_I_witness[static_cast<size_t>(i) - 1];
            CircleMap Hi = partial_conjugacy(st, i);
            Scalar mx(0);
            for (int j = 0; j <= 16; ++j) {
                Rational x = w.lo + (w.hi - w.lo) * Rational(j, 16);
                Jet jet = Hi.jet(CirclePoint(x), 1);
                if (jet.d[1] > mx) mx = jet.d[1];
            }
            out.rows.push_back({i, mx, Scalar(i)});
        }
    } else if (st.construction == Construction::Gk) {
        out.quantity = "|(h_n^-1)^(k+1)| against q_n^k";
        const int k = st.config.k;
        for (int i = 1; i <= st.n; ++i) {
            const HatInterval& w = st.nested_I_witness[static_cast<size_t>(i) - 1];
            CircleMap hinv = st.lifts[static_cast<size_t>(i) - 1].inverse();
            Scalar mx(0);
            for (int j = 0; j <= 8; ++j) {
                Rational x = w.lo + (w.hi - w.lo) * Rational(j, 8);
                Jet jet = hinv.jet(CirclePoint(x), k + 1);
                Scalar v = bm::abs(jet.d[static_cast<size_t>(k) + 1]);
                if (v > mx) mx = v;
            }
            Scalar ref = pow_rational(to_scalar(st.covers[static_cast<size_t>(i) - 1]),
                                      Rational(k));
            out.rows.push_back({i, mx, ref});
        }
    } else if (st.n == 0) {
        out.quantity = "identity run";
    } else {
        throw UnknownDiagnostic("ck diagnostic needs a g1ac or gk run");
    }
    return out;
}

}  // namespace fac
