#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fac/norms.hpp"

#include <random>

using namespace fac;
namespace bm = boost::multiprecision;

namespace {
struct PrecisionGuard {
    PrecisionGuard() { set_precision_bits(256); }
} guard;

// matched-grid lower bound of sup |(expr)^(i)| over the odd grid j/G;
// order 0 reduced by the single best integer shift
std::vector<Scalar> grid_order_max(const CircleMap& f, bool minus_id, long G, int r) {
    std::vector<Scalar> out(static_cast<size_t>(r) + 1, Scalar(0));
    Scalar rmin(0), rmax(0);
    bool first = true;
    for (long j = 0; j < G; ++j) {
        Rational x(j, G);
        taylor::Series c = f.taylor_at(CirclePoint(x), r);
        if (minus_id) {
            c[0] -= to_scalar(x);
            if (r >= 1) c[1] -= 1;
        }
        if (first || c[0] < rmin) rmin = c[0];
        if (first || c[0] > rmax) rmax = c[0];
        first = false;
        Scalar fact(1);
        for (int i = 1; i <= r; ++i) {
            if (i > 1) fact *= i;
            Scalar v = bm::abs(c[static_cast<size_t>(i)] * ((i == 1) ? Scalar(1) : fact));
            if (v > out[static_cast<size_t>(i)]) out[static_cast<size_t>(i)] = v;
        }
    }
    Scalar k = bm::round((rmin + rmax) / 2);
    out[0] = std::max(bm::abs(rmax - k), bm::abs(rmin - k));
    return out;
}
}  // namespace

TEST_CASE("norm of a rotation displacement") {
    // |R_b - Id|_3: circle distance at order 0, zero above
    Rational b(1, 5);
    NormReport rep = cr_norm(MinusId{CircleMap::rotation(b)}, 3, 64);
    CHECK(bm::abs(rep.order_lower[0] - Scalar(1) / 5) < pow2(-200));
    for (int i = 1; i <= 3; ++i) CHECK(rep.order_lower[static_cast<size_t>(i)] == 0);
    CHECK(bm::abs(rep.lower - Scalar(1) / 5) < pow2(-200));

    Rational big(9, 10);  // displacement wraps: distance is 1/10
    NormReport rep2 = cr_norm(MinusId{CircleMap::rotation(big)}, 0, 16);
    CHECK(bm::abs(rep2.lower - Scalar(1) / 10) < pow2(-200));
}

TEST_CASE("cover scaling law on matched grids") {
    GeneratorFamily fam = make_gbeta(Scalar(1) / 10, Rational(1, 10));
    const long G = 243;
    for (int r = 0; r <= 3; ++r) {
        std::vector<Scalar> hat = grid_order_max(lift_by_cover(fam, Integer(1)), true, G, r);
        for (long q : {2L, 3L, 10L}) {
            std::vector<Scalar> lifted =
                grid_order_max(lift_by_cover(fam, Integer(q)), true, G * q, r);
            // per-order: lifted max equals hat max times q^{i-1}
            Scalar qi = Scalar(1) / q;
            Scalar expect(0);
            for (int i = 0; i <= r; ++i) {
                Scalar want = hat[static_cast<size_t>(i)] * qi;
                CHECK(bm::abs(lifted[static_cast<size_t>(i)] - want) <=
                      Scalar(1e-8) * std::max(Scalar(1), want));
                if (want > expect) expect = want;
                qi *= q;
            }
            // and the full norm satisfies |h - Id|_r = |hat - Id|_r q^{r-1}
            Scalar hat_norm(0);
            for (int i = 0; i <= r; ++i)
                if (hat[static_cast<size_t>(i)] > hat_norm) hat_norm = hat[static_cast<size_t>(i)];
            Scalar lift_norm(0);
            for (int i = 0; i <= r; ++i)
                if (lifted[static_cast<size_t>(i)] > lift_norm) lift_norm = lifted[static_cast<size_t>(i)];
            Scalar qr = pow_rational(Scalar(q), Rational(r - 1));
            CHECK(bm::abs(lift_norm - hat_norm * qr) <= Scalar(1e-8) * hat_norm * qr);
        }
    }
}

TEST_CASE("size |f|_r basics") {
    NormReport id5 = abs_r(CircleMap(), 5, 32);
    CHECK(id5.lower == 1);
    CHECK(id5.upper == 1);

    NormReport rot = abs_r(CircleMap::rotation(Rational(1, 4)), 2, 32);
    CHECK(rot.lower == 1);  // max(1/4, 1/4, 1)
}

TEST_CASE("metric d_r basics") {
    GeneratorFamily fam = make_g1sing(1, Integer(4));
    CircleMap h = lift_by_cover(fam, Integer(2));
    NormReport same = dist_r(h, h, 4, 48);
    CHECK(same.lower == 0);
    CHECK(same.upper == 0);

    NormReport rots = dist_r(CircleMap::rotation(Rational(1, 3)),
                             CircleMap::rotation(Rational(1, 4)), 0, 16);
    CHECK(bm::abs(rots.lower - Scalar(1) / 12) < pow2(-200));
}

TEST_CASE("size bound under covers") {
    // |h|_r <= |hat|_r q^{r-1} for the compression family, q = 6, r = 2
    GeneratorFamily fam = make_g1sing(1, Integer(4));
    NormReport hat = abs_r(lift_by_cover(fam, Integer(1)), 2, 192);
    NormReport lifted = abs_r(lift_by_cover(fam, Integer(6)), 2, 192);
    CHECK(lifted.lower <= hat.upper * 6 * Scalar("1.0000001"));
}

TEST_CASE("two-slope family magnification shows in the C1 norm") {
    Scalar t = Scalar(1) / 10;
    NormReport rep = cr_norm(MinusId{lift_by_cover(make_gbeta(t), Integer(1))}, 1, 128);
    CHECK(rep.lower >= 1 / t - 1);
}

TEST_CASE("grid refinement stays within the reported pad") {
    GeneratorFamily fam = make_g0ac(Rational(1, 256), Rational(1, 16));
    MinusId expr{lift_by_cover(fam, Integer(1))};
    NormReport coarse = cr_norm(expr, 2, 1L << 12);
    NormReport fine = cr_norm(expr, 2, 1L << 16);
    CHECK(fine.lower >= coarse.lower);
    CHECK(fine.lower <= coarse.upper * Scalar("1.0000001"));
}

TEST_CASE("composition inequality with a fitted constant") {
    // |fg - g|_r <= C(r) |f - Id|_r |g|_r^r across a small family; the
    // fitted constant just has to be finite and stable
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> numer(1, 9);
    Scalar worst(0);
    for (int trial = 0; trial < 6; ++trial) {
        CircleMap f = lift_by_cover(make_g1sing(1, Integer(3 + trial % 3)), Integer(1 + trial % 2));
        CircleMap g = CircleMap::rotation(Rational(numer(rng), 10))
                          .after(lift_by_cover(make_gbeta(Scalar(1) / 6), Integer(1)));
        const int r = 2;
        NormReport lhs = cr_norm(ChainDiff{f.after(g), g}, r, 96);
        NormReport fnorm = cr_norm(MinusId{f}, r, 96);
        NormReport gsize = abs_r(g, r, 96);
        Scalar c = lhs.lower / (fnorm.upper * bm::pow(gsize.upper, r));
        if (c > worst) worst = c;
    }
    CHECK(worst > 0);
    CHECK(worst < 1000);
}

TEST_CASE("conjugated rotation difference: pointwise against the chains") {
    CircleMap H = lift_by_cover(make_gbeta(Scalar(1) / 8), Integer(2));
    Rational a(1, 7);
    Rational b = a + Rational(1, 1000);
    CircleMap fa = H.after(CircleMap::rotation(a).after(H.inverse()));
    CircleMap fb = H.after(CircleMap::rotation(b).after(H.inverse()));
    // D(x) = fb(x) - fa(x) evaluated two ways at matched points x = H(y)
    for (int j = 1; j <= 7; ++j) {
        Rational y(j, 8);
        Scalar x = point_to_scalar(H.eval(CirclePoint(y)));
        taylor::Series ca = fa.taylor_at(CirclePoint(x), 2);
        taylor::Series cb = fb.taylor_at(CirclePoint(x), 2);
        Scalar direct0 = cb[0] - ca[0];
        Scalar hb = point_to_scalar(H.eval(CirclePoint(mod1(y + b))));
        Scalar ha = point_to_scalar(H.eval(CirclePoint(mod1(y + a))));
        Scalar expect = mod1(hb - ha);
        CHECK(bm::abs(mod1(direct0) - expect) < Scalar(1e-40));
    }

    // the conjugacy-coordinate sampler sees at least what the generic
    // chain-difference sampler sees (its samples target the sweep windows,
    // the generic x-grid usually misses them)
    NormReport conj = cr_norm(ConjRotDiff{H, a, b, false}, 2, 192);
    NormReport diff = cr_norm(ChainDiff{fb, fa}, 2, 192);
    CHECK(diff.lower <= conj.upper * 4);
    CHECK(conj.lower >= diff.lower / 4);

    // conjugation-difference bound with a fitted constant (r = 1)
    NormReport habs = abs_r(H, 2, 96);
    for (long den : {1000L, 10000L, 100000L}) {
        Rational bb = a + Rational(1, den);
        NormReport d = cr_norm(ConjRotDiff{H, a, bb, false}, 1, 96);
        Scalar c = d.upper / (bm::pow(habs.upper, 2) * to_scalar(Rational(1, den)));
        CHECK(c < 1000);
    }
}

TEST_CASE("two-slope family norms grow polynomially in 1/t") {
    // log |h_t|_r against log(1/t) is close to linear; the fitted slope
    // grows with the order
    std::vector<Scalar> slope_prev;
    Scalar last_slope(-1);
    for (int r = 1; r <= 3; ++r) {
        std::vector<Scalar> logs;
        for (const char* ts : {"0.1", "0.01", "0.001"}) {
            NormReport n = abs_r(lift_by_cover(make_gbeta(Scalar(ts)), Integer(1)), r, 96);
            logs.push_back(bm::log(n.lower));
        }
        Scalar l10 = bm::log(Scalar(10));
        Scalar s12 = (logs[1] - logs[0]) / l10;
        Scalar s23 = (logs[2] - logs[1]) / l10;
        CHECK(bm::abs(s23 - s12) < Scalar("0.8"));     // near-linear
        Scalar slope = (s12 + s23) / 2;
        CHECK(slope > Scalar(r) - 1);                  // at least the affine scale
        CHECK(slope < Scalar(r) + Scalar(5) / 2);      // polynomial, bounded degree
        CHECK(slope > last_slope);                     // degree grows with order
        last_slope = slope;
    }
}

TEST_CASE("telescoping of the metric") {
    CircleMap H = lift_by_cover(make_g1sing(1, Integer(4)), Integer(2));
    auto conj = [&](const Rational& th) {
        return H.after(CircleMap::rotation(th).after(H.inverse()));
    };
    CircleMap f0 = conj(Rational(1, 10));
    CircleMap f1 = conj(Rational(11, 100));
    CircleMap f2 = conj(Rational(111, 1000));
    const int r = 1;
    NormReport whole = dist_r(f0, f2, r, 96);
    NormReport s1 = dist_r(f0, f1, r, 96);
    NormReport s2 = dist_r(f1, f2, r, 96);
    CHECK(whole.lower <= (s1.upper + s2.upper) * Scalar("1.0000001"));
}
