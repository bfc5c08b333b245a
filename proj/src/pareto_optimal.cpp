#include "bidlab/pareto_optimal.hpp"

#include <cmath>
#include <limits>

namespace bidlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kTaylorDegree = 22;  // exp on [0,1]: truncation below 1e-22
constexpr double kCoeffCap = 1e15;

// The recurrence runs in extended precision: q_k decays by up to an order
// of magnitude per level while absolute roundoff stays at the q_1 scale, so
// plain doubles lose the sign of q_k near level 20 at r = 4.
using LPoly = std::vector<long double>;

long double leval(const LPoly& p, long double s) {
    long double v = 0.0L;
    for (size_t j = p.size(); j-- > 0;) v = v * s + p[j];
    return v;
}

LPoly lantiderivative(const LPoly& p) {
    LPoly out(p.size() + 1, 0.0L);
    for (size_t j = 0; j < p.size(); ++j) out[j + 1] = p[j] / static_cast<long double>(j + 1);
    return out;
}

LPoly lscale(const LPoly& p, long double a) {
    LPoly out = p;
    for (long double& c : out) c *= a;
    return out;
}

Poly to_poly(const LPoly& p) {
    Poly out;
    out.c.resize(p.size());
    for (size_t j = 0; j < p.size(); ++j) out.c[j] = static_cast<double>(p[j]);
    return out;
}

LPoly exp_taylor(long double a) {
    LPoly p(kTaylorDegree + 1);
    long double term = 1.0L;
    for (int j = 0; j <= kTaylorDegree; ++j) {
        p[static_cast<size_t>(j)] = term;
        term *= a / static_cast<long double>(j + 1);
    }
    return p;
}

void check_coeffs(const LPoly& p) {
    for (long double c : p) {
        if (!std::isfinite(static_cast<double>(c)) || std::fabs(static_cast<double>(c)) > kCoeffCap)
            throw Error(ErrorCode::NumericOverflow,
                        "polynomial coefficients exceeded the growth guard");
    }
}

}  // namespace

RegimeParams regime_params(double r, const SolverConfig& cfg) {
    WorkBounds wb = solve_work_bounds(r, cfg);
    RegimeParams rp;
    rp.r = wb.r;  // clamped to e if within tolerance below
    rp.w_hi = wb.w_hi;
    rp.alpha = 1.0 / wb.w_hi;
    rp.small_regime = rp.r < kTwoOverLn2;
    if (!rp.small_regime) {
        rp.mu = rp.r - rp.w_hi;
        rp.y = 0.0;
        rp.flat_len = 1.0;
    } else {
        double a = rp.alpha;
        rp.y = find_root_bracketed([a](double y) { return y + std::log(2.0 - y) - a; }, 0.0,
                                   1.0, cfg);
        rp.flat_len = 1.0 - rp.y / a;
        rp.mu = std::exp(rp.y) / a;
    }
    return rp;
}

PolynomialFamily build_polynomial_family(double r, double tail_tol, int min_depth,
                                         const SolverConfig& cfg) {
    RegimeParams rp = regime_params(r, cfg);
    PolynomialFamily fam;
    fam.r = rp.r;
    fam.x = 1.0 / rp.r;
    fam.small_regime = rp.small_regime;
    fam.split = rp.small_regime ? rp.flat_len : 0.0;

    const long double x = 1.0L / static_cast<long double>(rp.r);
    const bool has_low = fam.split > 0.0;
    const long double split = static_cast<long double>(fam.split);
    const long double high_len = 1.0L - split;
    min_depth = std::max(min_depth, 6);

    // Seed errors in mu decay only at the map's slowest eigenmode (the root
    // of lambda e^{x/lambda} = 1, ~0.70 at r = 4) while q_k itself decays
    // much faster, so double-rounded inputs destroy q_k around level 20.
    // Refine the roots in extended precision before seeding.
    long double w_ld = rp.w_hi;
    for (int it = 0; it < 3; ++it) {
        long double e1w = expl(1.0L / w_ld);
        long double df = e1w * (1.0L - 1.0L / w_ld);
        if (fabsl(df) < 1e-6L) break;
        w_ld -= (w_ld * e1w - static_cast<long double>(rp.r)) / df;
    }
    const long double alpha_ld = 1.0L / w_ld;
    long double mu_ld;
    if (!rp.small_regime) {
        mu_ld = static_cast<long double>(rp.r) - w_ld;
    } else {
        long double y_ld = rp.y;
        for (int it = 0; it < 3; ++it) {
            long double df = 1.0L - 1.0L / (2.0L - y_ld);
            if (fabsl(df) < 1e-6L) break;
            y_ld -= (y_ld + logl(2.0L - y_ld) - alpha_ld) / df;
        }
        mu_ld = expl(y_ld) / alpha_ld;
    }

    // p_0 mirrors the function on [0,1]: flat at 1, then exp(alpha * v).
    std::vector<LPoly> low, high;
    std::vector<long double> q;
    low.push_back(has_low ? LPoly{1.0L} : LPoly{});
    high.push_back(rp.small_regime ? exp_taylor(alpha_ld) : LPoly{1.0L});
    q.push_back(1.0L);

    for (int k = 0;; ++k) {
        LPoly H = lantiderivative(high[static_cast<size_t>(k)]);
        long double total_high = leval(H, high_len);
        // k = 0 seeds the recurrence with mu instead of q_0.
        long double head = (k == 0) ? x * mu_ld : q[static_cast<size_t>(k)];

        LPoly next_high = lscale(H, x);
        next_high[0] += head - x * total_high;

        LPoly next_low;
        if (has_low) {
            LPoly L = lantiderivative(low[static_cast<size_t>(k)]);
            next_low = lscale(L, x);
            next_low[0] += head - x * leval(L, split) - x * total_high;
        }
        check_coeffs(next_high);
        if (has_low) check_coeffs(next_low);

        long double q_next = has_low ? next_low[0] : next_high[0];
        if (!(q_next > 0.0L) || q_next >= q.back())
            throw Error(ErrorCode::NumericOverflow,
                        "q_k failed to stay positive and strictly decreasing");
        low.push_back(std::move(next_low));
        high.push_back(std::move(next_high));
        q.push_back(q_next);

        int built = k + 1;
        if (built >= min_depth && static_cast<double>(q_next) * rp.r <= tail_tol) {
            fam.k_max = built;
            break;
        }
        if (built > 20000)
            throw Error(ErrorCode::NonConvergence, "polynomial family failed to truncate");
    }

    fam.low.reserve(low.size());
    fam.high.reserve(high.size());
    fam.q.reserve(q.size());
    for (size_t i = 0; i < high.size(); ++i) {
        fam.low.push_back(has_low ? to_poly(low[i]) : Poly{});
        fam.high.push_back(to_poly(high[i]));
        fam.q.push_back(static_cast<double>(q[i]));
    }
    return fam;
}

BiddingFunction build_algorithm_a(double r, double tail_tol, int min_depth,
                                  const SolverConfig& cfg) {
    PolynomialFamily fam = build_polynomial_family(r, tail_tol, min_depth, cfg);
    RegimeParams rp = regime_params(r, cfg);

    std::vector<Segment> segs;
    segs.reserve(2 * static_cast<size_t>(fam.k_max) + 2);
    for (int k = fam.k_max; k >= 1; --k) {
        double t0 = -static_cast<double>(k);
        if (fam.split > 0.0) {
            segs.push_back(Segment::polynomial(t0, t0 + fam.split, fam.low[static_cast<size_t>(k)]));
            segs.push_back(
                Segment::polynomial(t0 + fam.split, t0 + 1.0, fam.high[static_cast<size_t>(k)]));
        } else {
            segs.push_back(Segment::polynomial(t0, t0 + 1.0, fam.high[static_cast<size_t>(k)]));
        }
    }
    double flat_len = rp.small_regime ? rp.flat_len : 1.0;
    if (flat_len > 1e-15) segs.push_back(Segment::constant(0.0, flat_len, 1.0));
    segs.push_back(Segment::exponential(flat_len, kInf, 1.0, rp.alpha));

    return BiddingFunction(std::move(segs), rp.r * fam.q[static_cast<size_t>(fam.k_max)]);
}

double verify_delay_ode(const BiddingFunction& fn, double r, double t_lo, int samples_per_unit) {
    double lo = std::max(t_lo, fn.domain_start() + 1.0 + 1e-9);
    double max_rel = 0.0;
    long long n = static_cast<long long>(std::ceil((0.0 - lo) * samples_per_unit));
    for (long long j = 0; j < n; ++j) {
        double t = lo + (static_cast<double>(j) + 0.5) / samples_per_unit;
        if (t >= 0.0) break;
        if (std::fabs(t - std::round(t)) < 1e-9) continue;  // non-integer points only
        double lhs = r * fn.derivative(t);
        double rhs = fn.value(t + 1.0);
        double rel = std::fabs(lhs - rhs) / std::fabs(rhs);
        if (rel > max_rel) max_rel = rel;
    }
    return max_rel;
}

TheoremGuarantees evaluate_theorem_guarantees(double r, const SolverConfig& cfg) {
    RegimeParams rp = regime_params(r, cfg);
    TheoremGuarantees g;
    g.cons_predicted = rp.small_regime ? rp.r / (2.0 - rp.y) : rp.r - rp.w_hi;
    BiddingFunction fn = build_algorithm_a(r, 1e-12, 0, cfg);
    ConsRobResult cr = fn.consistency_robustness();
    g.cons_measured = cr.cons;
    g.rob_measured = cr.rob;
    return g;
}

std::vector<AsymptoticPoint> asymptotic_consistency_curve(const std::vector<double>& eps_list,
                                                          const SolverConfig& cfg) {
    const double coeff = std::pow(2.0, 0.75) * std::pow(kEulerE, 0.75);
    std::vector<AsymptoticPoint> out;
    out.reserve(eps_list.size());
    for (double eps : eps_list) {
        if (!(eps > 0.0 && eps < kTwoOverLn2 - kEulerE))
            throw Error(ErrorCode::RobustnessBelowE,
                        "eps must lie in (0, 2/ln2 - e)");
        AsymptoticPoint p;
        p.eps = eps;
        p.cons = evaluate_theorem_guarantees(kEulerE + eps, cfg).cons_measured;
        p.predicted = kEulerE - coeff * std::pow(eps, 0.25);
        out.push_back(p);
    }
    return out;
}

}  // namespace bidlab
