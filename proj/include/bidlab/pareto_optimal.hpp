#pragma once

#include <vector>

#include "bidlab/bidding_function.hpp"
#include "bidlab/numerics.hpp"
#include "bidlab/polynomial.hpp"

namespace bidlab {

/// Regime split for the near-Pareto-optimal function: the flat deterministic
/// bid survives only while r >= 2/ln 2; below it the flat part shrinks to
/// length L < 1 and the head polynomial picks up an exponential piece.
struct RegimeParams {
    double r = 0.0;
    bool small_regime = false;
    double w_hi = 0.0;
    double alpha = 0.0;  // 1 / w_hi
    double mu = 0.0;     // r - w_hi (large) or e^y / alpha (small)
    double y = 0.0;      // small regime only
    double flat_len = 1.0;  // L; 1 in the large regime
};

RegimeParams regime_params(double r, const SolverConfig& cfg = {});

/// The head polynomials p_0..p_k_max on t <= 0. Each p_k lives on the unit
/// interval with an optional split at `split`: `low[k]` in s on [0,split),
/// `high[k]` in v = s - split on [split,1]. In the large regime split == 0
/// and only `high` is populated (a plain polynomial in s).
///
/// In the small regime p_0's right piece is exp(alpha v); it is stored as a
/// machine-precision Taylor polynomial so the whole recurrence stays in
/// exact coefficient arithmetic.
struct PolynomialFamily {
    double r = 0.0;
    double x = 0.0;  // 1/r
    bool small_regime = false;
    double split = 0.0;
    std::vector<Poly> low;
    std::vector<Poly> high;
    std::vector<double> q;  // q_k = p_k(0)
    int k_max = 0;

    double eval(int k, double s) const {
        if (split > 0.0 && s < split) return low[static_cast<size_t>(k)](s);
        return high[static_cast<size_t>(k)](s - split);
    }
};

/// min_depth forces at least that many unit cells below zero (the default
/// stops once r * q_k <= tail_tol). Requesting depth beyond the precision
/// floor of the recurrence trips the positivity guard rather than emitting
/// garbage coefficients.
PolynomialFamily build_polynomial_family(double r, double tail_tol = 1e-12, int min_depth = 0,
                                         const SolverConfig& cfg = {});

/// The bidding function of the main construction: exponential tail above,
/// flat bid of length L, delay-ODE polynomials below zero, truncated where
/// r * q_k <= tail_tol.
BiddingFunction build_algorithm_a(double r, double tail_tol = 1e-12, int min_depth = 0,
                                  const SolverConfig& cfg = {});

/// Max relative residual of r*B'(t) - B(t+1) over non-integer t in
/// [t_lo, 0), using exact per-segment derivatives.
double verify_delay_ode(const BiddingFunction& fn, double r, double t_lo = -20.0,
                        int samples_per_unit = 64);

struct TheoremGuarantees {
    double cons_measured = 0.0;
    double cons_predicted = 0.0;
    double rob_measured = 0.0;
};

TheoremGuarantees evaluate_theorem_guarantees(double r, const SolverConfig& cfg = {});

struct AsymptoticPoint {
    double eps = 0.0;
    double cons = 0.0;
    double predicted = 0.0;  // e - 2^{3/4} e^{3/4} eps^{1/4}
};

std::vector<AsymptoticPoint> asymptotic_consistency_curve(const std::vector<double>& eps_list,
                                                          const SolverConfig& cfg = {});

}  // namespace bidlab
