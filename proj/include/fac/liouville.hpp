#pragma once

#include "fac/scalar.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fac {

enum class ScheduleKind { Factorial, Tower, Custom };

/** A Liouville number 0 < alpha < 1 given by a decimal digit schedule
    alpha = sum_k 10^-a_k with a_1 < a_2 < ... and a_{k+1} >= (k+1) a_k.
    Truncations are exact rationals p / 10^-a_k with the exact tail enclosure
        10^-a_{k+1} < alpha - truncation(k) < 2 * 10^-a_{k+1}.
    Factorial and tower schedules extend on demand; custom ones are finite. */
class LiouvilleNumber {
public:
    static LiouvilleNumber factorial();
    static LiouvilleNumber tower();
    static LiouvilleNumber custom(std::vector<Integer> schedule);

    ScheduleKind kind() const { return kind_; }
    size_t prefix_length() const { return a_.size(); }
    const Integer& exponent(size_t k) const;  // a_k, 1-based

    /** Grow the prefix to at least `upto` terms (ScheduleExhausted for
        custom schedules, PrecisionExhausted past the digit budget). */
    void ensure_length(size_t upto, const Integer& max_digits) const;

    /** Exact truncation sum_{j<=k} 10^-a_j (1-based k >= 1). */
    Rational truncation(size_t k, const Integer& max_digits) const;

    /** Exact tail bounds for alpha - truncation(k). */
    Rational tail_upper(size_t k, const Integer& max_digits) const;
    Rational tail_lower(size_t k, const Integer& max_digits) const;

    /** Decimal digits of the truncation denominator without materializing. */
    const Integer& denominator_exponent(size_t k) const { return exponent(k); }

    std::string descriptor_kind() const;

private:
    LiouvilleNumber(ScheduleKind kind, std::vector<Integer> a);
    void extend_once(const Integer& max_digits) const;

    ScheduleKind kind_;
    mutable std::vector<Integer> a_;
};

/** Certified rational approximation |alpha - p/q| < eps q^-N, q = 10^a_k. */
struct RationalWitness {
    Integer p, q;
    Rational value;   // p/q
    Rational epsilon;
    unsigned N = 0;
    bool certified = false;
    size_t schedule_index = 0;  // k of the truncation
};

struct WitnessQuery {
    Rational epsilon{1};
    unsigned N = 0;
    Integer q_min{1};
    Integer max_digits{1000000};
    std::optional<size_t> strictly_deeper_than;  // enforce |alpha - new| < |alpha - old|
};

/** First certified truncation with q >= q_min. The certificate uses the
    exact tail upper bound, so it implies the true inequality. */
RationalWitness find_rational(const LiouvilleNumber& alpha, const WitnessQuery& query);

/** Re-derives the certificate in exact arithmetic. */
bool verify_witness(const LiouvilleNumber& alpha, const RationalWitness& w,
                    const Integer& max_digits = Integer(1000000));

}  // namespace fac
