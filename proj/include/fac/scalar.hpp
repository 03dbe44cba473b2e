#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <stdexcept>
#include <string>
#include <utility>

namespace fac {

/** Multiprecision real at a session-wide configurable precision (MPFR).
    All real quantities of the pipeline live in this type. */
using Scalar = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                             boost::multiprecision::et_off>;

/** Exact rational (GMP). Rotation angles, schedule truncations and interval
    endpoints stay exact; only analysis-side quantities are rounded. */
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

/** Arbitrary-size integer (GMP). */
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

// ---------------------------------------------------------------------------
// Error taxonomy shared by all modules.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& m) : std::runtime_error(m) {}
};
struct NonConvergence : Error { using Error::Error; };
struct InvalidParam : Error { using Error::Error; };
struct InvalidSchedule : Error { using Error::Error; };
struct ScheduleExhausted : Error { using Error::Error; };
struct PrecisionExhausted : Error { using Error::Error; };
struct CandidateLimit : Error { using Error::Error; };
struct IntegrationFailure : Error { using Error::Error; };
struct DegenerateFit : Error { using Error::Error; };
struct UnknownDiagnostic : Error { using Error::Error; };
struct UnknownExport : Error { using Error::Error; };
struct ArchiveVersionMismatch : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Precision control. Minimum 64 bits; default 256.
// ---------------------------------------------------------------------------

/** Set the working precision in bits for all subsequently created Scalars. */
void set_precision_bits(unsigned bits);

/** Currently configured precision in bits. */
unsigned precision_bits();

// ---------------------------------------------------------------------------
// Conversions and circle helpers.
// ---------------------------------------------------------------------------

Scalar to_scalar(const Rational& r);
Scalar to_scalar(const Integer& n);

/** Reduce to [0,1). */
Scalar mod1(const Scalar& x);
Rational mod1(const Rational& x);

/** floor(x) as Integer. */
Integer ifloor(const Scalar& x);
Integer ifloor(const Rational& x);

/** Circle distance of the representatives a,b in R/Z, in [0, 1/2]. */
Scalar circle_dist(const Scalar& a, const Scalar& b);
Rational circle_dist(const Rational& a, const Rational& b);

/** Representative of x in [-1/2, 1/2). */
Scalar centered_mod1(const Scalar& x);

/** Exact split of q*x into (floor, frac) with frac in [0,1).
    Computed at extended precision so the integer part of q*x is removed
    exactly; the fractional part keeps the session precision. */
std::pair<Integer, Scalar> split_scaled(const Scalar& x, const Integer& q);

/** x^e for rational exponent, via exp(e*log(x)); requires x > 0. */
Scalar pow_rational(const Scalar& x, const Rational& e);

/** 2^-k as Scalar. */
Scalar pow2(long k);

/** Exact 10^k (k >= 0). */
Integer pow10_int(const Integer& k);

/** Exact base^e for integer e (negative e inverts; base != 0 then). */
Rational rational_pow(const Rational& base, long e);

/** Number of decimal digits of |n| (0 -> 1). */
long digits10_of(const Integer& n);

/** Decimal rendering with the given significant digit count (deterministic). */
std::string render_decimal(const Scalar& x, unsigned sig_digits = 30);

}  // namespace fac
