#include "bidlab/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace bidlab {

namespace detail {

double bisect_impl(double (*f)(double, void*), void* ctx, double lo, double hi,
                   const SolverConfig& cfg) {
    double flo = f(lo, ctx);
    double fhi = f(hi, ctx);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!(flo * fhi <= 0.0) || std::isnan(flo) || std::isnan(fhi)) {
        throw Error(ErrorCode::NoSignChange, "f(lo) and f(hi) must have opposite signs");
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < cfg.max_iter; ++it) {
        double mid = 0.5 * (lo + hi);
        x = mid;
        // Guarded secant step; falls back to the midpoint when the secant
        // point leaves the bracket or the values are not finite.
        if (std::isfinite(flo) && std::isfinite(fhi) && fhi != flo) {
            double xs = (lo * fhi - hi * flo) / (fhi - flo);
            if (xs > lo && xs < hi) x = xs;
        }
        double fx = f(x, ctx);
        if (fx == 0.0) return x;
        if ((flo < 0.0) == (fx < 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        // Bisect every other step to keep worst-case convergence linear.
        mid = 0.5 * (lo + hi);
        double fm = f(mid, ctx);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
        if (hi - lo <= std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

namespace {

double ratio_we(double w, double r) { return w * std::exp(1.0 / w) - r; }

}  // namespace

WorkBounds solve_work_bounds(double r, const SolverConfig& cfg) {
    if (r < kEulerE - cfg.abs_tol) {
        throw Error(ErrorCode::RobustnessBelowE,
                    "w*exp(1/w) = r has no real roots for r < e");
    }
    if (r <= kEulerE) return {kEulerE, 1.0, 1.0};

    // Bisection on z = ln w; the map z -> e^z * exp(e^{-z}) - r changes sign
    // once per branch and never overflows for the brackets below.
    auto g = [r](double z) { return ratio_we(std::exp(z), r); };

    // Low branch: g(ln 1e-8) = +inf (sign +), g(0) = e - r < 0.
    double z_lo = find_root_bracketed(g, std::log(1e-8), 0.0, cfg);
    // High branch: g(0) < 0, g(ln r) = r(e^{1/r} - 1) > 0.
    double z_hi = find_root_bracketed(g, 0.0, std::log(r), cfg);

    WorkBounds wb{r, std::exp(z_lo), std::exp(z_hi)};
    // One Newton polish per root in w-space; the derivative
    // d/dw [w e^{1/w}] = e^{1/w} (1 - 1/w) is nonzero away from w = 1.
    for (double* w : {&wb.w_lo, &wb.w_hi}) {
        double e1w = std::exp(1.0 / *w);
        double deriv = e1w * (1.0 - 1.0 / *w);
        if (std::fabs(deriv) > 1e-6) {
            double step = (*w * e1w - r) / deriv;
            if (std::isfinite(step)) *w -= step;
        }
    }
    if (wb.w_lo > 1.0) wb.w_lo = 1.0;
    if (wb.w_hi < 1.0) wb.w_hi = 1.0;
    return wb;
}

double solve_r0(const SolverConfig& cfg) {
    auto gap = [&cfg](double r) {
        WorkBounds wb = solve_work_bounds(r, cfg);
        return wb.w_hi - wb.w_lo - 1.0;
    };
    // gap(e) = -1, gap(4) ~ +1.33; the gap is monotone increasing in r.
    return find_root_bracketed(gap, kEulerE, 4.0, cfg);
}

}  // namespace bidlab
