#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bidlab/bidding_function.hpp"
#include "bidlab/strategy_classes.hpp"

namespace bidlab {

/// Discretized consistency-minimization LP on mesh 1/a: variables are the
/// per-cell averages of a bidding function at reference points in
/// [-n/a, m/a], the objective C bounds the mass left of the consistency
/// point, and one mass constraint per reference point encodes r-robustness.
struct PrimalLP {
    int a = 1;
    int n = 1;
    int m = 0;
    double r = 0.0;

    struct Row {
        std::string name;
        std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
        char rel = '<';                              // '<' : lhs <= rhs, '>' : lhs >= rhs
        double rhs = 0.0;
    };
    std::vector<Row> rows;

    int num_vars() const { return n + m + 2; }        // x_{-n}..x_m plus C
    int var_index(int k) const { return k + n; }      // x_k
    int c_index() const { return n + m + 1; }
    std::string var_name(int idx) const;
};

PrimalLP build_primal(double r, int a, int n, int m);

/// CPLEX-style LP text with one named row per constraint and coefficients
/// printed at 17 significant digits; deterministic byte-for-byte.
void export_lp_text(const PrimalLP& lp, const std::filesystem::path& path);

/// Unique real root of X^a - a*r*(X-1) in (1, 1 + 1/a).
double rho_root(int a, double r);

/// Positive solution of a*r*b_n = 1 + sum_{m <= min(n_cap, n+a-1)} b_m,
/// reached by monotone fixed-point sweeps from zero. Componentwise below
/// (rho-1)*rho^{n-1} and converging to it as n_cap grows.
std::vector<double> fixed_point_b(int a, int n_cap, double r, double tol = 1e-13,
                                  long long sweep_cap = 1000000);

/// Feasible dual solution with objective lambda; by weak duality a certified
/// lower bound on the consistency of every r-robust bidding sequence.
struct DualCertificate {
    int a = 1;
    int n = 1;
    int m = 0;  // fixed to a-1 by the construction
    double r = 0.0;
    double lambda = 0.0;
    std::vector<double> beta;   // indices -n..m, stored at [k + n]
    std::vector<double> gamma;  // indices -n-1..m, stored at [k + n + 1]
    double max_violation = 0.0;

    double beta_at(int k) const { return beta[static_cast<size_t>(k + n)]; }
    double gamma_at(int k) const { return gamma[static_cast<size_t>(k + n + 1)]; }
};

DualCertificate build_dual_certificate(int a, int n, double r, double tol = 1e-13);

/// Worst dual-row violation (rhs - lhs), scaled by the row magnitude;
/// feasible certificates stay at or below roundoff level.
double dual_max_violation(const DualCertificate& cert);

/// Signed residual (lhs - rhs) of one dual row, scaled by row magnitude.
/// Rows with k <= 0 hold with equality in the analytic construction.
double dual_row_residual(const DualCertificate& cert, int k);

std::vector<TradeoffPoint> lower_bound_curve(const std::vector<double>& r_list, int a, int n);

nlohmann::json certificate_to_json(const DualCertificate& cert);

/// Lemma-5.1 discretization x_k = a * integral of B over [k/a, (k+1)/a],
/// scaled so x_0 = 1. Feasible for the primal whenever B is r-robust.
std::vector<double> discretize_bidding_function(const BiddingFunction& fn, int a, int n, int m);

/// Minimum slack over all rows given x (and C set to the theta row value);
/// nonnegative means primal-feasible. Returns {min_slack, objective C}.
std::pair<double, double> primal_feasibility(const PrimalLP& lp, const std::vector<double>& x);

}  // namespace bidlab
