#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fac/analytics.hpp"

#include <random>

using namespace fac;
namespace bm = boost::multiprecision;

namespace {

SchedulerConfig base_config(int steps) {
    SchedulerConfig cfg;
    cfg.r = 1;
    cfg.steps = steps;
    cfg.precision_bits = 256;
    cfg.max_q_digits = Integer(5000000);
    cfg.verify_grid = 64;
    return cfg;
}

}  // namespace

TEST_CASE("rotation numbers of rotations and conjugates") {
    set_precision_bits(256);
    RotationEstimate r1 = rotation_number(CircleMap::rotation(Rational(1, 3)), 100);
    CHECK(bm::abs(r1.estimate - Scalar(1) / 3) < pow2(-200));
    CHECK(r1.error_bound == Scalar(1) / 100);

    CircleMap H = lift_by_cover(make_g1sing(1, Integer(4)), Integer(2));
    CircleMap f = H.after(CircleMap::rotation(Rational(2, 7)).after(H.inverse()));
    RotationEstimate r2 = rotation_number(f, 700);
    CHECK(bm::abs(r2.estimate - Scalar(2) / 7) <= r2.error_bound);
}

TEST_CASE("rotation number is invariant under random conjugations") {
    set_precision_bits(256);
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> numer(1, 12);
    for (int trial = 0; trial < 3; ++trial) {
        CircleMap H = lift_by_cover(make_gbeta(Scalar(1) / (6 + trial)), Integer(1 + trial));
        if (trial == 2) H = H.after(lift_by_cover(make_g1sing(1, Integer(5)), Integer(2)));
        Rational rho(numer(rng), 13);
        CircleMap f = H.after(CircleMap::rotation(rho).after(H.inverse()));
        RotationEstimate est = rotation_number(f, 500);
        CHECK(circle_dist(est.estimate, to_scalar(rho)) <= est.error_bound);
    }
}

TEST_CASE("Holder fit of the identity and of a square-root modulus") {
    set_precision_bits(256);
    HolderFit id = holder_exponent(CircleMap(), false, 4, 12);
    CHECK(bm::abs(id.exponent - 1) < Scalar(1e-12));

    // x -> x^(1/2) rescaled on a fundamental interval, as a raw evaluable
    HolderFit root = holder_exponent(
        [](const Scalar& x) { return bm::sqrt(mod1(x)); }, 6, 16, 1024);
    CHECK(bm::abs(root.exponent - Scalar(1) / 2) < Scalar("0.02"));

    // two-slope piecewise-affine homeomorphism: exponent exactly 1
    auto affine2 = [](const Scalar& x) {
        Scalar u = mod1(x);
        if (u <= Scalar(1) / 3) return 2 * u;
        return Scalar(2) / 3 + (u - Scalar(1) / 3) / 2;
    };
    HolderFit a = holder_exponent(affine2, 4, 12, 512);
    CHECK(bm::abs(a.exponent - 1) < Scalar(1e-6));

    CHECK_THROWS_AS(holder_exponent(CircleMap(), false, 4, 5), DegenerateFit);
}

TEST_CASE("cdf of a pure rotation is Lebesgue") {
    set_precision_bits(256);
    // a well-balanced angle (Fibonacci convergent) so the orbit
    // equidistributes rather than cycling through a short period
    CircleMap r = CircleMap::rotation(Rational(610, 987));
    EmpiricalMeasure push = measure_cdf_pushforward(r, 512);
    for (const auto& [x, fx] : push.cdf) CHECK(bm::abs(fx - x) < pow2(-200));
    EmpiricalMeasure orb = measure_cdf_birkhoff(r, 2000);
    Scalar d = cdf_sup_distance(push, orb);
    CHECK(d < Scalar("0.01"));
}

TEST_CASE("cdf basics: monotone, normalized") {
    set_precision_bits(256);
    CircleMap H = lift_by_cover(make_g1ac(1), Integer(2));
    EmpiricalMeasure push = measure_cdf_pushforward(H, 128);
    CHECK(push.cdf.front().second == 0);
    CHECK(push.cdf.back().second == 1);
    for (size_t i = 1; i < push.cdf.size(); ++i)
        CHECK(push.cdf[i].second >= push.cdf[i - 1].second - pow2(-120));
}

TEST_CASE("pushforward and orbit cdfs agree on a finished run") {
    SchedulerConfig cfg = base_config(2);
    RunResult run = scheduler_run(Construction::G1Sing, cfg, LiouvilleNumber::factorial());
    EmpiricalMeasure push = measure_cdf_pushforward(run.state.H, 256);
    EmpiricalMeasure orb = measure_cdf_birkhoff(run.state.f_cur, 4000);
    CHECK(cdf_sup_distance(push, orb) < Scalar("0.05"));
}

TEST_CASE("singularity diagnostic: exact products") {
    SchedulerConfig cfg = base_config(2);
    RunResult run = scheduler_run(Construction::G1Sing, cfg, LiouvilleNumber::factorial());
    SingularityDiagnostic d = singularity_diagnostic(run.state);
    CHECK(d.exact);
    CHECK(d.m_C == Rational(2, 3));       // (3/4)(8/9)
    CHECK(d.m_HC == Rational(1, 36));     // (1/4)(1/9)
    CHECK(d.m_HC / d.m_C < Rational(1, 4));  // ratio strictly below level 1's

    CHECK_THROWS_AS(singularity_diagnostic(
                        scheduler_run(Construction::G1Ac, base_config(1),
                                      LiouvilleNumber::factorial()).state),
                    UnknownDiagnostic);
}

TEST_CASE("fixed-set diagnostic for the push construction") {
    SchedulerConfig cfg = base_config(2);
    RunResult run = scheduler_run(Construction::G1Ac, cfg, LiouvilleNumber::factorial());
    AcDiagnostic d = ac_diagnostic(run.state);
    CHECK(d.mass_exact);
    CHECK(d.fixed_mass == Rational(3, 4) * Rational(7, 8));
    CHECK(d.fixed_mass >= Rational(5, 8));
    CHECK(d.points_checked > 0);
    CHECK(d.identity_verified);
    CHECK(d.identity_sup < bm::pow(Scalar(10), -30));
}

TEST_CASE("modulus ratios for the three-germ construction") {
    SchedulerConfig cfg = base_config(2);
    RunResult run = scheduler_run(Construction::G0Ac, cfg, LiouvilleNumber::factorial());
    AcDiagnostic d = ac_diagnostic(run.state);
    REQUIRE(d.ratio_rows.size() == 2);
    for (const auto& [ratio, level] : d.ratio_rows)
        CHECK(bm::abs(ratio - level) <= Scalar(1e-6) * level);
    CHECK(d.identity_verified);
}

TEST_CASE("derivative growth tables") {
    SchedulerConfig cfg = base_config(2);
    RunResult ac = scheduler_run(Construction::G1Ac, cfg, LiouvilleNumber::factorial());
    CkDiagnostic d = ck_diagnostic(ac.state);
    REQUIRE(d.rows.size() == 2);
    for (const auto& row : d.rows) CHECK(row.value > row.reference);  // > n on the witness

    RunResult gk = scheduler_run(Construction::Gk, cfg, LiouvilleNumber::factorial());
    CkDiagnostic dk = ck_diagnostic(gk.state);
    REQUIRE(dk.rows.size() == 2);
    // |(h_n^-1)^(k+1)| tracks q_n^k within a factor of 10 across levels
    Scalar c1 = dk.rows[0].value / dk.rows[0].reference;
    Scalar c2 = dk.rows[1].value / dk.rows[1].reference;
    Scalar ratio = (c1 > c2) ? c1 / c2 : c2 / c1;
    CHECK(ratio < 10);
}
