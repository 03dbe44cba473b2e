#include "fac/scalar.hpp"

#include <cmath>

namespace fac {

namespace {
unsigned g_precision_bits = 256;

unsigned digits10_for_bits(unsigned bits) {
    // ceil(bits * log10(2)) plus guard digits
    return static_cast<unsigned>(std::ceil(bits * 0.3010299956639812)) + 2;
}

// apply the 256-bit default before any Scalar is created
const bool g_default_applied = [] {
    Scalar::default_precision(digits10_for_bits(256));
    return true;
}();
}  // namespace

void set_precision_bits(unsigned bits) {
    if (bits < 64) throw InvalidParam("precision_bits must be >= 64");
    g_precision_bits = bits;
    Scalar::default_precision(digits10_for_bits(bits));
}

unsigned precision_bits() { return g_precision_bits; }

Scalar to_scalar(const Rational& r) {
    Scalar num(boost::multiprecision::numerator(r));
    Scalar den(boost::multiprecision::denominator(r));
    return num / den;
}

Scalar to_scalar(const Integer& n) { return Scalar(n); }

Integer ifloor(const Scalar& x) {
    Scalar f = boost::multiprecision::floor(x);
    Integer out;
    mpfr_get_z(out.backend().data(), f.backend().data(), MPFR_RNDD);
    return out;
}

Integer ifloor(const Rational& x) {
    Integer num = boost::multiprecision::numerator(x);
    Integer den = boost::multiprecision::denominator(x);
    Integer q = num / den;                  // truncates toward zero
    if (num < 0 && q * den != num) q -= 1;  // correct to floor
    return q;
}

Scalar mod1(const Scalar& x) {
    Scalar f = x - boost::multiprecision::floor(x);
    if (f >= 1) f -= 1;  // guard against rounding at the boundary
    if (f < 0) f += 1;
    return f;
}

Rational mod1(const Rational& x) { return x - Rational(ifloor(x)); }

Scalar centered_mod1(const Scalar& x) {
    Scalar f = mod1(x);
    if (f >= Scalar(1) / 2) f -= 1;
    return f;
}

Scalar circle_dist(const Scalar& a, const Scalar& b) {
    Scalar d = mod1(a - b);
    if (d > Scalar(1) / 2) d = 1 - d;
    return d;
}

Rational circle_dist(const Rational& a, const Rational& b) {
    Rational d = mod1(a - b);
    if (d > Rational(1, 2)) d = 1 - d;
    return d;
}

std::pair<Integer, Scalar> split_scaled(const Scalar& x, const Integer& q) {
    const mpfr_prec_t xprec = mpfr_get_prec(x.backend().data());
    const size_t qbits = mpz_sizeinbase(q.backend().data(), 2);
    mpfr_t prod;
    mpfr_init2(prod, xprec + static_cast<mpfr_prec_t>(qbits) + 8);
    mpfr_mul_z(prod, x.backend().data(), q.backend().data(), MPFR_RNDN);

    Integer m;
    mpfr_get_z(m.backend().data(), prod, MPFR_RNDD);
    mpfr_sub_z(prod, prod, m.backend().data(), MPFR_RNDN);

    Scalar frac;
    mpfr_set(frac.backend().data(), prod, MPFR_RNDN);
    mpfr_clear(prod);
    if (frac < 0) { frac += 1; m -= 1; }
    if (frac >= 1) { frac -= 1; m += 1; }
    return {std::move(m), std::move(frac)};
}

Scalar pow_rational(const Scalar& x, const Rational& e) {
    if (x <= 0) throw InvalidParam("pow_rational requires positive base");
    return boost::multiprecision::exp(to_scalar(e) * boost::multiprecision::log(x));
}

Scalar pow2(long k) {
    Scalar one(1);
    Scalar out;
    mpfr_mul_2si(out.backend().data(), one.backend().data(), k, MPFR_RNDN);
    return out;
}

Integer pow10_int(const Integer& k) {
    if (k < 0) throw InvalidParam("pow10_int requires k >= 0");
    if (k > Integer(1000000000)) throw PrecisionExhausted("10^k exceeds any sane budget");
    Integer out;
    mpz_ui_pow_ui(out.backend().data(), 10, k.convert_to<unsigned long>());
    return out;
}

Rational rational_pow(const Rational& base, long e) {
    if (e < 0) {
        if (base == 0) throw InvalidParam("rational_pow: zero base, negative exponent");
        return 1 / rational_pow(base, -e);
    }
    Rational out(1), b = base;
    unsigned long n = static_cast<unsigned long>(e);
    while (n) {
        if (n & 1) out *= b;
        b *= b;
        n >>= 1;
    }
    return out;
}

long digits10_of(const Integer& n) {
    if (n == 0) return 1;
    // sizeinbase may overestimate by one for non-binary bases
    long est = static_cast<long>(mpz_sizeinbase(n.backend().data(), 10));
    if (est > 1 && boost::multiprecision::abs(n) < pow10_int(Integer(est - 1))) --est;
    return est;
}

std::string render_decimal(const Scalar& x, unsigned sig_digits) {
    return x.str(sig_digits, std::ios_base::scientific);
}

}  // namespace fac
