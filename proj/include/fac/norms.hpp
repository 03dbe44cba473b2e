#pragma once

#include "fac/circle_map.hpp"

namespace fac {

/** Sampled bound on a C^r norm. lower is attained by a sampled point;
    upper adds a grid-spacing * sampled-next-derivative pad per order.
    The pad is a heuristic, not a certificate. */
struct NormReport {
    int r = 0;
    long samples = 0;
    Scalar lower, upper;
    std::vector<Scalar> order_lower, order_upper;  // per derivative order 0..r
};

/** Expression whose C^r norm is wanted. */
struct MinusId {
    CircleMap f;
};
struct ChainDiff {
    CircleMap f, g;
};
/** H R_a H^-1 - H R_b H^-1 (or the difference of the inverses), evaluated
    without cancellation: coefficients of H at y+b are recovered from the
    jet of H at y+a by a Taylor expansion in b-a. Sampling runs in the
    conjugacy coordinate y. */
struct ConjRotDiff {
    CircleMap H;
    Rational a, b;
    bool inverse_side = false;
};
using MapExpr = std::variant<MinusId, ChainDiff, ConjRotDiff>;

NormReport cr_norm(const MapExpr& expr, int r, long grid);

/** |f|_r = max(|f - id|_r, |f^-1 - id|_r, 1). */
NormReport abs_r(const CircleMap& f, int r, long grid);

/** d_r(f,g) = max(|f - g|_r, |f^-1 - g^-1|_r). */
NormReport dist_r(const CircleMap& f, const CircleMap& g, int r, long grid);

/** Sampled range of f' over the circle (min, max). */
std::pair<Scalar, Scalar> slope_range(const CircleMap& f, long grid);

/** Deterministic sample set: odd uniform grid (coprime to 10) plus
    piece-structure points of the innermost lift node of each chain. */
std::vector<CirclePoint> norm_samples(const std::vector<const CircleMap*>& chains, long budget);

}  // namespace fac
