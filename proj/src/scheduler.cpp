#include "fac/scheduler.hpp"

namespace fac {

namespace bm = boost::multiprecision;

std::string construction_name(Construction c) {
    switch (c) {
        case Construction::G1Sing: return "g1sing";
        case Construction::G1Ac: return "g1ac";
        case Construction::GBeta: return "gbeta";
        case Construction::G0Ac: return "g0ac";
        case Construction::Gk: return "gk";
    }
    return "gbeta";
}

Construction construction_from_name(const std::string& s) {
    if (s == "g1sing") return Construction::G1Sing;
    if (s == "g1ac") return Construction::G1Ac;
    if (s == "gbeta") return Construction::GBeta;
    if (s == "g0ac") return Construction::G0Ac;
    if (s == "gk") return Construction::Gk;
    throw InvalidParam("unknown construction '" + s + "'");
}

Integer SchedulerConfig::k_at(int i) const {
    if (i >= 1 && static_cast<size_t>(i) <= k_schedule.size())
        return k_schedule[static_cast<size_t>(i) - 1];
    return Integer(i + 1) * Integer(i + 1);
}

Rational SchedulerConfig::beta_at(int i) const {
    if (i >= 1 && static_cast<size_t>(i) <= beta_seq.size())
        return beta_seq[static_cast<size_t>(i) - 1];
    Rational b = beta + Rational(1, i + 4);
    if (b >= 1) b = beta + (1 - beta) * Rational(1, i + 4);
    return b;
}

namespace {

Rational pow2_rational(long k) {  // 2^k exact
    if (k >= 0) return Rational(Integer(1) << k);
    return Rational(Integer(1), Integer(1) << (-k));
}

Rational ceil_rational(const Rational& x) { return -Rational(ifloor(-x)); }

struct LevelBuild {
    GeneratorFamily family;
    Integer cover;
    json params;
};

// Family and cover for level n from the denominator of alpha_n. Throws
// InvalidParam when the denominator is too shallow for the level's
// parameter formulas; candidate validation catches that.
LevelBuild build_level(const ConstructionState& st, int n, const Integer& q_n) {
    const SchedulerConfig& cfg = st.config;
    LevelBuild out;
    switch (st.construction) {
        case Construction::G1Sing: {
            Integer k = cfg.k_at(n);
            out.family = make_g1sing(n, k);
            out.cover = st.g1sing_K * q_n;
            out.params = json{{"k", k.str()}};
            break;
        }
        case Construction::G1Ac: {
            out.family = make_g1ac(n);
            out.cover = q_n;
            out.params = json{{"support", "2^-" + std::to_string(n + 1)}};
            break;
        }
        case Construction::GBeta: {
            Rational bn = cfg.beta_at(n);
            Rational expo = 1 - 1 / bn;  // negative
            Scalar t = pow_rational(to_scalar(q_n), expo);
            out.family = make_gbeta(t);
            out.cover = q_n;
            out.params = json{{"beta_n", bn.str()}, {"t", render_decimal(t)}};
            break;
        }
        case Construction::G0Ac: {
            Rational t = rational_pow(Rational(1, 3), n + 2);
            Rational s = rational_pow(Rational(1, 3), static_cast<long>(n) * n + 3 * n - 1) *
                         rational_pow(Rational(1, n), n) *
                         rational_pow(Rational(1) / Rational(q_n), n - 1);
            out.family = make_g0ac(s, t);
            out.cover = q_n;
            out.params = json{{"s", s.str()}, {"t", t.str()}};
            break;
        }
        case Construction::Gk: {
            // keep the flow time t^(k^2) small enough for the integrator
            if (rational_pow(Rational(1, q_n), static_cast<long>(cfg.k) * cfg.k) >
                Rational(1, 64))
                throw InvalidParam("gk level needs a deeper denominator");
            out.family = make_gk(Rational(1, q_n), cfg.k);
            out.cover = q_n;
            out.params = json{{"t", Rational(1, q_n).str()}, {"k", cfg.k}};
            break;
        }
    }
    return out;
}

// Exact cell-fit: is there a cover-cell [m/Q, (m+1)/Q] inside `region`?
std::optional<Integer> fit_cell(const HatInterval& region, const Integer& cover) {
    Rational q(cover);
    Integer m = ifloor(ceil_rational(region.lo * q));
    if (Rational(m + 1) / q <= region.hi) return m;
    return std::nullopt;
}

bool uses_nesting(Construction c) {
    return c == Construction::G1Ac || c == Construction::G0Ac || c == Construction::Gk;
}

void push_check(std::vector<BoundCheck>& checks, std::string name, Scalar lhs, Scalar rhs) {
    bool ok = lhs <= rhs;
    checks.push_back({std::move(name), std::move(lhs), std::move(rhs), ok});
}

// Context of the level being built, needed by the lookahead checks.
struct LevelCtx {
    int level = 0;
    Integer q_cur;       // denominator of alpha_level
    Integer cover_cur;   // cover of h_level
    Scalar t_cur;        // GBeta: t_level
    Scalar measured_M;   // bi-Lipschitz constant of H_level
    HatInterval nested;  // identity region after carving this level
};

// Construction-specific acceptance checks for the candidate alpha_{level+1}.
// All of them look one level ahead so that the next step is feasible.
bool candidate_checks(const ConstructionState& st, const LevelCtx& ctx, const Integer& q_next,
                      std::vector<BoundCheck>& checks) {
    const SchedulerConfig& cfg = st.config;
    const int level = ctx.level;
    bool ok = true;
    // the next level's family must be buildable from this denominator
    try {
        build_level(st, level + 1, q_next);
        checks.push_back({"buildable", Scalar(1), Scalar(1), true});
    } catch (const InvalidParam&) {
        checks.push_back({"buildable", Scalar(0), Scalar(1), false});
        return false;
    } catch (const IntegrationFailure&) {
        checks.push_back({"buildable", Scalar(0), Scalar(1), false});
        return false;
    }

    switch (st.construction) {
        case Construction::G1Sing: {
            Integer Q_next = st.g1sing_K * cfg.k_at(level) * ctx.q_cur * q_next;
            // (3.2): M_{level+2} Q_{level+1}^{d-1} <= 1 with hat-Lipschitz
            // estimates for the two future maps
            Scalar Mfut = ctx.measured_M;
            for (int j = level + 1; j <= level + 2; ++j) {
                GeneratorFamily f = make_g1sing(j, cfg.k_at(j));
                Mfut *= std::max(f->max_slope(), 1 / f->min_slope());
            }
            Scalar lhs = Mfut * pow_rational(to_scalar(Q_next), cfg.holder_test_d - 1);
            push_check(checks, "(3.2)", lhs, Scalar(1));
            if (!checks.back().passed) ok = false;
            push_check(checks, "(3.3)", Scalar(8) * ctx.measured_M * to_scalar(ctx.cover_cur),
                       to_scalar(Q_next));
            if (!checks.back().passed) ok = false;
            push_check(checks, "(3.4)", 2 * to_scalar(ctx.cover_cur), to_scalar(Q_next));
            if (!checks.back().passed) ok = false;
            // exact divisibility keeping the measure products exact
            bool div = (Q_next % (cfg.k_at(level) * ctx.cover_cur)) == 0;
            checks.push_back({"divisibility", Scalar(div ? 0 : 1), Scalar(0), div});
            if (!div) ok = false;
            break;
        }
        case Construction::GBeta: {
            Rational bnext = cfg.beta_at(level + 1);
            Rational expo = cfg.beta / bnext - 1;  // negative
            Scalar lhs = st.gbeta_tinv_product * (1 / ctx.t_cur) *
                         pow_rational(to_scalar(q_next), expo);
            push_check(checks, "(eee2)", lhs, Scalar(1));
            if (!checks.back().passed) ok = false;
            // sum condition one step ahead: 2/q_next <= t_level q_level^-1 / 3
            Scalar rhs = ctx.t_cur / (3 * to_scalar(ctx.q_cur));
            push_check(checks, "sum-condition", 2 / to_scalar(q_next), rhs);
            if (!checks.back().passed) ok = false;
            break;
        }
        case Construction::G1Ac:
        case Construction::G0Ac:
        case Construction::Gk: {
            auto cell = fit_cell(ctx.nested, q_next);
            checks.push_back({"nesting", Scalar(cell ? 0 : 1), Scalar(0), cell.has_value()});
            if (!cell) ok = false;
            if (st.construction == Construction::G1Ac) {
                // alignment: components of K_level split into full q_next cells
                Integer den = (Integer(1) << (level + 1)) * ctx.q_cur;
                bool div = (q_next % den) == 0;
                checks.push_back({"alignment", Scalar(div ? 0 : 1), Scalar(0), div});
                if (!div) ok = false;
            }
            if (st.construction == Construction::Gk) {
                Integer den = ctx.q_cur;
                for (int j = 0; j < cfg.k; ++j) den *= ctx.q_cur;  // q_cur^{k+1}
                bool div = (q_next % den) == 0;
                checks.push_back({"alignment", Scalar(div ? 0 : 1), Scalar(0), div});
                if (!div) ok = false;
            }
            break;
        }
    }
    return ok;
}

}  // namespace

ConstructionState scheduler_init(Construction c, const SchedulerConfig& cfg,
                                 LiouvilleNumber alpha, const Integer& q_min_alpha1) {
    if (cfg.r < 1) throw InvalidParam("r must be >= 1");
    set_precision_bits(cfg.precision_bits);
    ConstructionState st;
    st.construction = c;
    st.config = cfg;
    st.alpha = std::move(alpha);

    WitnessQuery q;
    q.epsilon = pow2_rational(-(cfg.r + 1));
    q.N = 0;
    q.q_min = q_min_alpha1;
    q.max_digits = cfg.max_q_digits;

    for (int tries = 0; tries <= cfg.candidate_cap; ++tries) {
        RationalWitness w = find_rational(st.alpha, q);
        bool ok = true;
        try {
            build_level(st, 1, w.q);
        } catch (const InvalidParam&) {
            ok = false;
        } catch (const IntegrationFailure&) {
            ok = false;
        }
        if (c == Construction::G1Sing && ok) {
            // level-1 growth condition with hat-Lipschitz estimates
            Scalar Mfut(1);
            for (int j = 1; j <= 2; ++j) {
                GeneratorFamily f = make_g1sing(j, cfg.k_at(j));
                Mfut *= std::max(f->max_slope(), 1 / f->min_slope());
            }
            ok = Mfut * pow_rational(to_scalar(w.q), cfg.holder_test_d - 1) <= 1;
        }
        if (ok) {
            st.alphas.push_back(w);
            st.f_cur = CircleMap::rotation(w.value);
            return st;
        }
        q.strictly_deeper_than = w.schedule_index;
    }
    throw CandidateLimit("no feasible alpha_1 within the retry cap");
}

void scheduler_step(ConstructionState& st, const Integer& q_min_next) {
    const SchedulerConfig& cfg = st.config;
    set_precision_bits(cfg.precision_bits);
    const int n = st.n + 1;
    const RationalWitness& wn = st.alphas[static_cast<size_t>(n) - 1];
    const Integer q_n = wn.q;

    LevelBuild lb = build_level(st, n, q_n);
    CircleMap h_n = lift_by_cover(lb.family, lb.cover);
    CircleMap H_n = st.H.after(h_n);

    StepRecord rec;
    rec.n = n;
    rec.q_n = q_n;
    rec.Q_n = lb.cover;
    rec.family_params = lb.params;
    rec.alpha_index = wn.schedule_index;
    rec.alpha_n = wn.value;
    rec.threshold = pow2_rational(-(n + cfg.r + 1));

    // commutation of h_n with R_{alpha_n} (exact by the cover structure;
    // probed at exact rational points)
    {
        Scalar worst(0);
        for (int j = 1; j <= 3; ++j) {
            Rational x(2 * j - 1, 7);
            Scalar lhs = point_to_scalar(h_n.eval(CirclePoint(mod1(x + wn.value))));
            Scalar rhs = mod1(point_to_scalar(h_n.eval(CirclePoint(x))) + to_scalar(wn.value));
            Scalar d = circle_dist(lhs, rhs);
            if (d > worst) worst = d;
        }
        push_check(rec.checks, "commutation", worst,
                   pow2(-(3 * static_cast<long>(precision_bits()) / 4)));
    }

    // measured bi-Lipschitz constant of H_n
    auto [mn_slope, mx_slope] = slope_range(H_n, cfg.verify_grid);
    if (mn_slope <= 0) throw InvalidParam("H_n not increasing on samples");
    rec.M_n = std::max(mx_slope, 1 / mn_slope);

    // uniform Cauchy bound |H_n^-1 - H_{n-1}^-1|_0 = |h_n^-1 - id|_0
    {
        Scalar sup(0);
        for (int j = 0; j <= 64; ++j) {
            Scalar u = Scalar(j) / 64;
            Scalar d = bm::abs(lb.family->eval(u) - u);
            if (d > sup) sup = d;
        }
        rec.cauchy_value = sup / to_scalar(lb.cover);
        rec.cauchy_bound = Rational(1, q_n);
    }

    // nested-cell bookkeeping for the identity-region constructions
    HatInterval new_nested = st.nested;
    std::optional<HatInterval> new_witness;
    if (uses_nesting(st.construction)) {
        auto cell = fit_cell(st.nested, lb.cover);
        if (!cell) throw CandidateLimit("no nested cell at level " + std::to_string(n));
        const auto& sets = lb.family->hat_sets();
        const HatInterval& K = sets.at("K");
        const HatInterval& I = sets.at("I");
        Rational q(lb.cover);
        new_nested = {(Rational(*cell) + K.lo) / q, (Rational(*cell) + K.hi) / q};
        new_witness = HatInterval{(Rational(*cell) + I.lo) / q, (Rational(*cell) + I.hi) / q};
    }

    LevelCtx ctx;
    ctx.level = n;
    ctx.q_cur = q_n;
    ctx.cover_cur = lb.cover;
    ctx.measured_M = rec.M_n;
    ctx.nested = new_nested;
    if (st.construction == Construction::GBeta)
        ctx.t_cur = pow_rational(to_scalar(q_n), 1 - 1 / cfg.beta_at(n));

    // candidate iteration for alpha_{n+1}
    WitnessQuery q;
    q.epsilon = pow2_rational(-(n + cfg.r + 1));
    q.N = 1;
    q.q_min = q_min_next;
    q.max_digits = cfg.max_q_digits;
    q.strictly_deeper_than = wn.schedule_index;

    for (int tries = 0; tries <= cfg.candidate_cap; ++tries) {
        RationalWitness cand = find_rational(st.alpha, q);
        std::vector<BoundCheck> checks = rec.checks;
        bool ok = candidate_checks(st, ctx, cand.q, checks);

        Scalar bound(0);
        if (ok) {
            NormReport fwd = cr_norm(ConjRotDiff{H_n, wn.value, cand.value, false},
                                     n + cfg.r, cfg.verify_grid);
            NormReport inv = cr_norm(ConjRotDiff{H_n, wn.value, cand.value, true},
                                     n + cfg.r, cfg.verify_grid);
            bound = std::max(fwd.upper, inv.upper);
            bool pass = bound < to_scalar(rec.threshold);
            checks.push_back({"d-norm", bound, to_scalar(rec.threshold), pass});
            ok = pass;
        }

        if (ok) {
            rec.alpha_next = cand.value;
            rec.alpha_next_index = cand.schedule_index;
            rec.verified_bound = bound;
            rec.checks = std::move(checks);

            st.alphas.push_back(cand);
            st.H = H_n;
            st.f_prev = st.f_cur;
            // f_n = H_n o R o H_n^-1: apply H_n^-1 first
            st.f_cur = H_n.after(CircleMap::rotation(cand.value).after(H_n.inverse()));
            st.families.push_back(lb.family);
            st.covers.push_back(lb.cover);
            st.lifts.push_back(h_n);
            st.nested = new_nested;
            if (new_witness) st.nested_I_witness.push_back(*new_witness);
            if (st.construction == Construction::GBeta) {
                st.gbeta_t.push_back(ctx.t_cur);
                st.gbeta_tinv_product *= 1 / ctx.t_cur;
            }
            if (st.construction == Construction::G1Sing)
                st.g1sing_K *= cfg.k_at(n) * q_n;
            st.log.push_back(std::move(rec));
            st.n = n;
            return;
        }
        q.strictly_deeper_than = cand.schedule_index;
    }
    throw CandidateLimit("no feasible alpha_" + std::to_string(n + 1) +
                         " within the retry cap");
}

ConstructionState replay_state(Construction c, const SchedulerConfig& cfg,
                               LiouvilleNumber alpha,
                               const std::vector<size_t>& alpha_indices) {
    if (alpha_indices.empty()) throw InvalidParam("replay needs at least alpha_1");
    set_precision_bits(cfg.precision_bits);
    ConstructionState st;
    st.construction = c;
    st.config = cfg;
    st.alpha = std::move(alpha);

    auto witness_at = [&](size_t idx) {
        RationalWitness w;
        w.schedule_index = idx;
        w.value = st.alpha.truncation(idx, cfg.max_q_digits);
        w.p = bm::numerator(w.value);
        w.q = bm::denominator(w.value);
        w.certified = true;
        return w;
    };
    st.alphas.push_back(witness_at(alpha_indices[0]));
    st.f_cur = CircleMap::rotation(st.alphas[0].value);

    for (size_t n = 1; n < alpha_indices.size(); ++n) {
        const RationalWitness& wn = st.alphas[n - 1];
        LevelBuild lb = build_level(st, static_cast<int>(n), wn.q);
        CircleMap h_n = lift_by_cover(lb.family, lb.cover);
        st.H = st.H.after(h_n);
        if (uses_nesting(c)) {
            auto cell = fit_cell(st.nested, lb.cover);
            if (!cell) throw InvalidParam("replay: nested cell vanished");
            const auto& sets = lb.family->hat_sets();
            Rational q(lb.cover);
            st.nested_I_witness.push_back({(Rational(*cell) + sets.at("I").lo) / q,
                                           (Rational(*cell) + sets.at("I").hi) / q});
            st.nested = {(Rational(*cell) + sets.at("K").lo) / q,
                         (Rational(*cell) + sets.at("K").hi) / q};
        }
        if (c == Construction::GBeta) {
            Scalar t = pow_rational(to_scalar(wn.q), 1 - 1 / cfg.beta_at(static_cast<int>(n)));
            st.gbeta_t.push_back(t);
            st.gbeta_tinv_product *= 1 / t;
        }
        if (c == Construction::G1Sing)
            st.g1sing_K *= cfg.k_at(static_cast<int>(n)) * wn.q;
        st.alphas.push_back(witness_at(alpha_indices[n]));
        st.f_prev = st.f_cur;
        st.f_cur = st.H.after(CircleMap::rotation(st.alphas.back().value).after(st.H.inverse()));
        st.families.push_back(lb.family);
        st.covers.push_back(lb.cover);
        st.lifts.push_back(h_n);
        st.n = static_cast<int>(n);
    }
    return st;
}

RunResult scheduler_run(Construction c, const SchedulerConfig& cfg, LiouvilleNumber alpha) {
    set_precision_bits(cfg.precision_bits);
    // floors[j]: minimal denominator when choosing alpha_{j+1}
    std::vector<Integer> floors(static_cast<size_t>(cfg.steps) + 1, Integer(1));
    int backtracks = 0;

    std::vector<ConstructionState> stack;
    auto rebuild_base = [&]() {
        stack.clear();
        stack.push_back(scheduler_init(c, cfg, alpha, floors[0]));
    };
    rebuild_base();

    while (stack.back().n < cfg.steps) {
        ConstructionState next = stack.back();
        const size_t level = static_cast<size_t>(next.n) + 1;  // chooses alpha_{level+1}
        try {
            scheduler_step(next, floors[level]);
            stack.push_back(std::move(next));
        } catch (const CandidateLimit&) {
            if (++backtracks > cfg.backtrack_cap)
                throw CandidateLimit("backtrack cap exhausted");
            // blame alpha_level: require the previous level to dig deeper
            const RationalWitness& blamed = stack.back().alphas.back();
            floors[level - 1] = blamed.q * 10;
            if (stack.size() == 1) {
                rebuild_base();
            } else {
                stack.pop_back();
            }
        }
    }
    RunResult out;
    out.state = stack.back();
    out.backtracks = backtracks;
    return out;
}

}  // namespace fac
