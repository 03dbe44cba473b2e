#pragma once

#include "fac/scheduler.hpp"

#include <functional>

namespace fac {

struct RotationEstimate {
    Scalar estimate;
    Scalar error_bound;  // 1/iterations
    long iterations = 0;
};

/** Birkhoff estimate (F^n(0) - 0) / n from the lift, error bound 1/n. */
RotationEstimate rotation_number(const CircleMap& f, long iterations);

struct HolderFit {
    Scalar exponent;
    Scalar residual;  // rms residual of the log-log fit
    int scale_lo = 0, scale_hi = 0;
    std::vector<std::pair<Scalar, Scalar>> table;  // (scale, sup modulus)
};

/** Least-squares slope of log sup-modulus against log scale over the dyadic
    scales 2^-j, j = scale_lo .. scale_hi; sup over `pairs` sampled pairs at
    distance 2^-j per scale. */
HolderFit holder_exponent(const std::function<Scalar(const Scalar&)>& map,
                          int scale_lo, int scale_hi, long pairs = 1024);
HolderFit holder_exponent(const CircleMap& map, bool inverse_direction,
                          int scale_lo, int scale_hi, long pairs = 1024);

struct EmpiricalMeasure {
    std::vector<std::pair<Scalar, Scalar>> cdf;  // (x, F(x)), x ascending
    std::string source;
};

/** CDF of the pushforward of Lebesgue by H: F(x) = H^-1(x) - H^-1(0). */
EmpiricalMeasure measure_cdf_pushforward(const CircleMap& H, long grid = 1024);

/** Empirical CDF of the orbit of 0 under f. */
EmpiricalMeasure measure_cdf_birkhoff(const CircleMap& f, long orbit_len);

Scalar cdf_sup_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

struct SingularityDiagnostic {
    int n = 0;
    Rational m_C;   // product of (1 - 1/k_i)
    Rational m_HC;  // product of 1/k_i
    bool exact = false;
    std::vector<BoundCheck> checks;
};

/** Exact measure identities of a singular-conjugacy run; the products are
    certified by the logged divisibility and the affine action of each level. */
SingularityDiagnostic singularity_diagnostic(const ConstructionState& st);

struct AcDiagnostic {
    int n = 0;
    Rational fixed_mass;  // lower bound; exact product when aligned
    bool mass_exact = false;
    Scalar identity_sup;
    bool identity_verified = false;
    long points_checked = 0;
    std::vector<std::pair<Scalar, Scalar>> ratio_rows;  // (ratio, level) for g0ac
};

/** Fixed-set mass and identity verification for the absolutely continuous
    constructions; for g0ac additionally the per-level modulus ratios. */
AcDiagnostic ac_diagnostic(const ConstructionState& st, long samples = 64);

struct CkRow {
    int n = 0;
    Scalar value;
    Scalar reference;
};
struct CkDiagnostic {
    std::string quantity;
    std::vector<CkRow> rows;
};

/** Derivative growth across levels: max |H_n'| on the nested witness for
    g1ac, |(h_n^-1)^(k+1)| against q_n^k for gk. */
CkDiagnostic ck_diagnostic(const ConstructionState& st);

/** Partial conjugacy H_i = h_1 o ... o h_i from a finished run. */
CircleMap partial_conjugacy(const ConstructionState& st, int i);

}  // namespace fac
