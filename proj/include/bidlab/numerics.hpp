#pragma once

#include <cmath>
#include <type_traits>
#include <utility>

#include "bidlab/errors.hpp"

namespace bidlab {

struct SolverConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_iter = 200;
};

/// The two roots of w * exp(1/w) = r for r >= e. w_lo lies in (0,1],
/// w_hi in [1, r); both equal 1 exactly when r = e.
struct WorkBounds {
    double r;
    double w_lo;
    double w_hi;
};

namespace detail {
double bisect_impl(double (*f)(double, void*), void* ctx, double lo, double hi,
                   const SolverConfig& cfg);
}

/// Deterministic bracketed root finding: bisection with a guarded secant
/// step per iteration. Requires f(lo) * f(hi) <= 0, else NO_SIGN_CHANGE.
template <class F>
double find_root_bracketed(F&& f, double lo, double hi, const SolverConfig& cfg = {}) {
    using Fn = std::remove_reference_t<F>;
    auto thunk = +[](double x, void* ctx) -> double { return (*static_cast<Fn*>(ctx))(x); };
    return detail::bisect_impl(thunk, const_cast<void*>(static_cast<const void*>(&f)), lo, hi,
                               cfg);
}

/// Both solutions of w * exp(1/w) = r. Inputs within abs_tol below e are
/// clamped to e; anything lower throws ROBUSTNESS_BELOW_E.
WorkBounds solve_work_bounds(double r, const SolverConfig& cfg = {});

/// The unique r with w_hi(r) - w_lo(r) = 1 (the class-I regime boundary).
double solve_r0(const SolverConfig& cfg = {});

constexpr double kEulerE = 2.718281828459045235360287471352662498;
constexpr double kTwoOverLn2 = 2.885390081777926814769815078779;  // 2/ln 2

/// Adaptive Simpson quadrature. Kept deliberately independent of the
/// closed-form segment integrals so tests can use it as an oracle.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-11, int depth = 48) {
    auto simpson = [&f](double x0, double x1) {
        double xm = 0.5 * (x0 + x1);
        return (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1));
    };
    struct Frame {
        double a, b, whole;
        int depth;
    };
    double total = 0.0;
    Frame stack[2048];
    int top = 0;
    stack[top++] = {a, b, simpson(a, b), depth};
    while (top > 0) {
        Frame fr = stack[--top];
        double m = 0.5 * (fr.a + fr.b);
        double left = simpson(fr.a, m);
        double right = simpson(m, fr.b);
        double err = left + right - fr.whole;
        if (fr.depth <= 0 || std::fabs(err) <= 15.0 * tol) {
            total += left + right + err / 15.0;
        } else {
            stack[top++] = {fr.a, m, left, fr.depth - 1};
            stack[top++] = {m, fr.b, right, fr.depth - 1};
        }
    }
    return total;
}

}  // namespace bidlab
