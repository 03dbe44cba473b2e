#pragma once

#include "fac/liouville.hpp"
#include "fac/norms.hpp"

namespace fac {

enum class Construction { G1Sing, G1Ac, GBeta, G0Ac, Gk };

std::string construction_name(Construction c);
Construction construction_from_name(const std::string& s);

struct SchedulerConfig {
    int r = 1;
    int steps = 1;
    unsigned precision_bits = 256;
    Integer max_q_digits{12};  // largest allowed denominator is 10^this
    int candidate_cap = 4;
    int backtrack_cap = 64;
    long verify_grid = 96;
    Rational holder_test_d{1, 2};  // exponent d used in the growth checks

    std::vector<Integer> k_schedule;  // G1Sing; defaults to (i+1)^2
    Rational beta{1, 2};              // GBeta target exponent
    std::vector<Rational> beta_seq;   // defaults to beta + 1/(n+4), kept < 1
    int k = 1;                        // Gk smoothness parameter

    Integer k_at(int i) const;        // 1-based G1Sing schedule access
    Rational beta_at(int i) const;    // 1-based GBeta sequence access
};

struct BoundCheck {
    std::string name;
    Scalar lhs, rhs;
    bool passed = false;
};

struct StepRecord {
    int n = 0;
    Integer q_n, Q_n;
    json family_params;
    size_t alpha_index = 0, alpha_next_index = 0;
    Rational alpha_n, alpha_next;
    Scalar verified_bound;  // upper estimate of d_{n+r}(f_{n-1}, f_n)
    Rational threshold;     // 2^{-n-r-1}
    Scalar M_n;             // measured bi-Lipschitz constant of H_n
    Scalar cauchy_value;    // |H_n^{-1} - H_{n-1}^{-1}|_0 sampled
    Rational cauchy_bound;  // q_n^{-1}
    std::vector<BoundCheck> checks;
};

struct ConstructionState {
    Construction construction = Construction::GBeta;
    SchedulerConfig config;
    LiouvilleNumber alpha = LiouvilleNumber::factorial();

    int n = 0;                            // completed steps
    std::vector<RationalWitness> alphas;  // alpha_1 .. alpha_{n+1}
    CircleMap H;                          // h_1 o ... o h_n
    CircleMap f_prev, f_cur;              // f_{n-1}, f_n
    std::vector<StepRecord> log;

    std::vector<GeneratorFamily> families;  // hat family per level
    std::vector<Integer> covers;            // cover per level
    std::vector<CircleMap> lifts;           // h_i per level

    // identity-region bookkeeping (G1Ac / G0Ac / Gk)
    HatInterval nested{Rational(0), Rational(1)};
    std::vector<HatInterval> nested_I_witness;

    // GBeta bookkeeping
    std::vector<Scalar> gbeta_t;
    Scalar gbeta_tinv_product{1};

    // G1Sing bookkeeping
    Integer g1sing_K{1};  // k_1 q_1 ... k_{n-1} q_{n-1}
};

/** Choose alpha_1 (certified |alpha - alpha_1| < 2^{-r-1}) and set up
    f_0 = R_{alpha_1}. The level-1 family must be buildable. */
ConstructionState scheduler_init(Construction c, const SchedulerConfig& cfg,
                                 LiouvilleNumber alpha,
                                 const Integer& q_min_alpha1 = Integer(1));

/** One induction step: builds h_n from alpha_n, iterates certified
    candidates for alpha_{n+1} with growing q_min and accepts the first one
    passing the direct d_{n+r} verification plus the construction checks. */
void scheduler_step(ConstructionState& st, const Integer& q_min_next = Integer(1));

struct RunResult {
    ConstructionState state;
    int backtracks = 0;
};

/** Full run. A level whose candidate retries are exhausted restarts the
    previous level with a deeper denominator floor (deepening always
    succeeds eventually for a Liouville schedule, budget permitting). */
RunResult scheduler_run(Construction c, const SchedulerConfig& cfg, LiouvilleNumber alpha);

/** Deterministic rebuild of a finished run's state from the accepted
    schedule indices of alpha_1..alpha_{steps+1}; no search, no norm
    verification. Used when loading archives. */
ConstructionState replay_state(Construction c, const SchedulerConfig& cfg,
                               LiouvilleNumber alpha,
                               const std::vector<size_t>& alpha_indices);

}  // namespace fac
