#include "fac/liouville.hpp"

namespace fac {

namespace {

// Decides 2 * 10^E < eps without materializing 10^|E| when the margin is
// wide; falls back to exact arithmetic near the boundary.
bool two_pow10_less(const Integer& E, const Rational& eps, const Integer& max_digits) {
    const Integer num = boost::multiprecision::numerator(eps);
    const Integer den = boost::multiprecision::denominator(eps);
    // eps >= 10^-(d-1) with d = digits(den/num) + 1, eps <= 10^(digits(num/den)+1)
    const long dn = digits10_of(num), dd = digits10_of(den);
    if (E + (dd - dn) < -2) return true;   // far below
    if (E + (dd - dn) > 2) return false;   // far above
    if (boost::multiprecision::abs(E) > max_digits)
        throw PrecisionExhausted("exponent comparison exceeds digit budget");
    if (E >= 0) return Rational(2 * pow10_int(E)) < eps;
    return Rational(2, pow10_int(-E)) < eps;
}

}  // namespace

LiouvilleNumber::LiouvilleNumber(ScheduleKind kind, std::vector<Integer> a)
    : kind_(kind), a_(std::move(a)) {
    if (a_.empty()) throw InvalidSchedule("schedule needs at least one exponent");
    for (size_t i = 0; i < a_.size(); ++i) {
        if (a_[i] < 1) throw InvalidSchedule("schedule exponents must be positive");
        if (i > 0 && a_[i] < Integer(static_cast<long>(i) + 1) * a_[i - 1])
            throw InvalidSchedule("schedule growth a_{k+1} >= (k+1) a_k violated");
    }
}

LiouvilleNumber LiouvilleNumber::factorial() {
    return LiouvilleNumber(ScheduleKind::Factorial, {Integer(1), Integer(2)});
}

LiouvilleNumber LiouvilleNumber::tower() {
    return LiouvilleNumber(ScheduleKind::Tower, {Integer(1), Integer(10)});
}

LiouvilleNumber LiouvilleNumber::custom(std::vector<Integer> schedule) {
    return LiouvilleNumber(ScheduleKind::Custom, std::move(schedule));
}

const Integer& LiouvilleNumber::exponent(size_t k) const {
    if (k == 0 || k > a_.size()) throw InvalidSchedule("schedule index out of range");
    return a_[k - 1];
}

void LiouvilleNumber::extend_once(const Integer& max_digits) const {
    // exponents are cheap bookkeeping; the materialization budget applies
    // only when a truncation or tail bound is built as a rational
    static const Integer kExponentCap = pow10_int(Integer(15));
    const size_t k = a_.size();
    Integer next;
    switch (kind_) {
        case ScheduleKind::Factorial:
            next = a_.back() * Integer(static_cast<long>(k) + 1);
            break;
        case ScheduleKind::Tower:
            if (a_.back() > Integer(15))
                throw PrecisionExhausted("tower schedule exponent overflows");
            next = pow10_int(a_.back());
            break;
        case ScheduleKind::Custom:
            throw ScheduleExhausted("custom schedule prefix exhausted");
    }
    if (next > kExponentCap)
        throw PrecisionExhausted("schedule exponent exceeds any sane budget");
    (void)max_digits;
    a_.push_back(std::move(next));
}

void LiouvilleNumber::ensure_length(size_t upto, const Integer& max_digits) const {
    while (a_.size() < upto) extend_once(max_digits);
}

Rational LiouvilleNumber::truncation(size_t k, const Integer& max_digits) const {
    ensure_length(k, max_digits);
    if (a_[k - 1] > max_digits)
        throw PrecisionExhausted("truncation denominator exceeds digit budget");
    Integer den = pow10_int(a_[k - 1]);
    Integer num(0);
    for (size_t j = 0; j < k; ++j) num += pow10_int(a_[k - 1] - a_[j]);
    return Rational(num, den);
}

Rational LiouvilleNumber::tail_upper(size_t k, const Integer& max_digits) const {
    ensure_length(k + 1, max_digits);
    if (a_[k] > max_digits) throw PrecisionExhausted("tail bound exceeds digit budget");
    return Rational(2, pow10_int(a_[k]));
}

Rational LiouvilleNumber::tail_lower(size_t k, const Integer& max_digits) const {
    ensure_length(k + 1, max_digits);
    if (a_[k] > max_digits) throw PrecisionExhausted("tail bound exceeds digit budget");
    return Rational(1, pow10_int(a_[k]));
}

std::string LiouvilleNumber::descriptor_kind() const {
    switch (kind_) {
        case ScheduleKind::Factorial: return "factorial";
        case ScheduleKind::Tower: return "tower";
        case ScheduleKind::Custom: return "custom";
    }
    return "custom";
}

RationalWitness find_rational(const LiouvilleNumber& alpha, const WitnessQuery& q) {
    if (q.epsilon <= 0) throw InvalidParam("epsilon must be positive");
    const long qmin_digits = digits10_of(q.q_min);
    size_t k = 1;
    if (q.strictly_deeper_than) k = *q.strictly_deeper_than + 1;
    for (;; ++k) {
        alpha.ensure_length(k + 1, q.max_digits);
        const Integer& ak = alpha.exponent(k);
        if (ak > q.max_digits)
            throw PrecisionExhausted("candidate denominator exceeds digit budget");
        // q = 10^ak >= q_min?
        if (ak < qmin_digits - 1) continue;
        if (ak == qmin_digits - 1 && pow10_int(ak) < q.q_min) continue;
        // certification: 2 * 10^{N ak - a_{k+1}} < eps
        Integer E = Integer(q.N) * ak - alpha.exponent(k + 1);
        if (!two_pow10_less(E, q.epsilon, q.max_digits)) continue;

        RationalWitness w;
        w.schedule_index = k;
        w.value = alpha.truncation(k, q.max_digits);
        w.p = boost::multiprecision::numerator(w.value);
        w.q = boost::multiprecision::denominator(w.value);
        w.epsilon = q.epsilon;
        w.N = q.N;
        w.certified = true;
        return w;
    }
}

bool verify_witness(const LiouvilleNumber& alpha, const RationalWitness& w,
                    const Integer& max_digits) {
    if (w.schedule_index == 0) return false;
    Rational tr = alpha.truncation(w.schedule_index, max_digits);
    if (tr != w.value) return false;
    Integer E = Integer(w.N) * alpha.exponent(w.schedule_index) -
                alpha.exponent(w.schedule_index + 1);
    return two_pow10_less(E, w.epsilon, max_digits);
}

}  // namespace fac
