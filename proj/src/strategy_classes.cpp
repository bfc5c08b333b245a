#include "bidlab/strategy_classes.hpp"

#include <cmath>
#include <limits>

namespace bidlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// exp(-kTailDepth) ~ 1e-12: mass below the represented window is negligible
// relative to values at the window bottom.
constexpr double kTailDepth = 27.631021115928547;  // 12 ln 10
// The window must reach kTailDepth e-folds below the default evaluation
// grid (radius 30), or the missing tail pollutes the mass there.
constexpr double kGridReach = 34.0;

double expm1_over(double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; }

/// (exp(s*l) - 1) / l with the l -> 0 limit s.
double growth_integral(double s, double l) { return l == 0.0 ? s : std::expm1(s * l) / l; }

}  // namespace

const char* tradeoff_source_name(TradeoffSource s) {
    switch (s) {
        case TradeoffSource::ClassE: return "ClassE";
        case TradeoffSource::ClassD: return "ClassD";
        case TradeoffSource::ClassI: return "ClassI";
        case TradeoffSource::AlgorithmA: return "AlgorithmA";
        case TradeoffSource::LowerBound: return "LowerBound";
    }
    return "Unknown";
}

void write_tradeoff_csv(std::ostream& os, const std::vector<TradeoffPoint>& points) {
    os << "r,c,source\n";
    char buf[128];
    for (const TradeoffPoint& p : points) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%s\n", p.r, p.c,
                      tradeoff_source_name(p.source));
        os << buf;
    }
}

BiddingFunction class_e(double w) {
    if (!(w > 0.0)) throw Error(ErrorCode::ParseError, "class E requires w > 0");
    double t0 = -(kGridReach + kTailDepth * w);
    double v0 = std::exp(t0 / w);
    std::vector<Segment> segs{Segment::exponential(t0, kInf, v0, 1.0 / w)};
    return BiddingFunction(std::move(segs), w * v0);
}

BiddingFunction class_d(const ClassDParams& p) {
    if (!(p.ell >= 0.0 && p.h >= 0.0 && p.ell + p.h > 0.0))
        throw Error(ErrorCode::ParseError, "class D requires ell, h >= 0 with ell + h > 0");
    double step = p.ell + p.h;
    // Nearly flat parameters would need ~kTailDepth/step cells; cap the
    // window and let tail_mass_bound report the unrepresented remainder.
    double step_window = std::max(step, 1e-3);
    int i_lo = -static_cast<int>(std::ceil(kGridReach + kTailDepth / step_window));
    int i_hi = static_cast<int>(std::ceil(std::max(60.0 / step_window, kGridReach)));
    std::vector<Segment> segs;
    segs.reserve(static_cast<size_t>(i_hi - i_lo) + 1);
    for (int i = i_lo; i < i_hi; ++i) {
        segs.push_back(Segment::exponential(i, i + 1, std::exp(i * step), p.ell));
    }
    // Exponential continuation beyond the window; exact at integer reference
    // points, an interpolation in between. Queries are expected to stay
    // inside the window.
    segs.push_back(Segment::exponential(i_hi, kInf, std::exp(i_hi * step), step));
    double unit_mass = expm1_over(p.ell);  // value-1 segment mass
    double tail = unit_mass * std::exp(i_lo * step) / (-std::expm1(-step));
    return BiddingFunction(std::move(segs), tail);
}

double class_d_cons(const ClassDParams& p) {
    double g = expm1_over(p.ell);
    double eh = std::exp(p.ell + p.h);
    return g * eh / (eh - 1.0);
}

double class_d_rob(const ClassDParams& p) { return class_d_cons(p) * std::exp(p.h); }

namespace {

// F(c, l) = sum_{i>=0} (3+2i)/(i+2)! l^i - c; strictly increasing in l.
// The series form avoids the catastrophic cancellation of the raw
// expression 1 - c l^2 - l - e^l (1 - 2l) near l = 0.
double class_d_root_series(double c, double l) {
    double sum = 0.0;
    double pow_term = 1.0;  // l^i / (i+2)!  scaled progressively
    double fact = 2.0;      // (i+2)! running
    for (int i = 0;; ++i) {
        double term = (3.0 + 2.0 * i) / fact * pow_term;
        sum += term;
        if (std::fabs(term) < 1e-18 * std::max(1.0, std::fabs(sum)) && i > 4) break;
        if (i > 400) break;
        pow_term *= l;
        fact *= static_cast<double>(i + 3);
    }
    return sum - c;
}

}  // namespace

std::pair<ClassDParams, double> class_d_pareto(double c) {
    if (!(c > 1.0 && c <= kEulerE + 1e-12))
        throw Error(ErrorCode::ConsistencyOutOfRange, "class D tradeoff needs c in (1, e]");
    if (c <= 1.5) {
        double r = c * c / (c - 1.0);
        double h = std::log(c / (c - 1.0));
        return {ClassDParams{0.0, h}, r};
    }
    double ell = find_root_bracketed([c](double l) { return class_d_root_series(c, l); }, 0.0,
                                     6.0, SolverConfig{1e-14, 1e-14, 200});
    double g = expm1_over(ell);
    double eh = c * std::exp(-ell) / (c - g);
    double r = c * eh;
    return {ClassDParams{ell, std::log(eh)}, r};
}

std::pair<ClassDParams, double> class_d_for_robustness(double r) {
    if (r < kEulerE - 1e-12)
        throw Error(ErrorCode::RobustnessBelowE, "class D cannot be robust below e");
    if (r <= kEulerE) return {ClassDParams{1.0, 0.0}, kEulerE};
    double c = find_root_bracketed(
        [r](double cc) { return class_d_pareto(cc).second - r; }, 1.0 + 1e-9, kEulerE,
        SolverConfig{1e-13, 1e-13, 200});
    auto [params, rr] = class_d_pareto(c);
    (void)rr;
    return {params, c};
}

double class_i_work(const SlopeSequence& s, int i) {
    if (!(s.left_slope > 0.0))
        throw Error(ErrorCode::DivergentTail, "left-tail slopes must be positive");
    double w = 1.0 / s.left_slope;  // fixed point of the recurrence on the left tail
    for (int j = s.i_min; j < i; ++j) {
        double l = s.slope(j);
        w = std::exp(-l) * (w + growth_integral(1.0, l));
    }
    return w;
}

double class_i_mass(const SlopeSequence& s, double t) {
    if (!(s.left_slope > 0.0))
        throw Error(ErrorCode::DivergentTail, "left-tail slopes must be positive");
    int i = static_cast<int>(std::floor(t));
    double frac = t - std::floor(t);
    // CR(t) = e^{(1-[t]) l_i} (w_{i+1} + (e^{[t] l_{i+1}} - 1)/l_{i+1})
    double w_next = class_i_work(s, i + 1);
    double l_i = s.slope(i);
    double l_next = s.slope(i + 1);
    return std::exp((1.0 - frac) * l_i) * (w_next + growth_integral(frac, l_next));
}

SlopeSequence class_i_pareto_slopes(double r, const SolverConfig& cfg) {
    WorkBounds wb = solve_work_bounds(r, cfg);
    double ell0;
    // r >= R0 is exactly the condition w_hi - w_lo >= 1; comparing the gap
    // directly keeps the regime switch stable at the boundary.
    if (wb.w_hi - wb.w_lo >= 1.0 - 1e-12) {
        ell0 = 0.0;
    } else {
        // g(w_lo, l) = e^{-l}(w_lo + (e^l - 1)/l) falls from w_lo + 1 > w_hi
        // at l -> 0 to below w_hi by l = 1 (equality only at r = e).
        auto g = [&wb](double l) {
            return std::exp(-l) * (wb.w_lo + growth_integral(1.0, l)) - wb.w_hi;
        };
        ell0 = find_root_bracketed(g, 1e-12, 1.0 + 1e-9, cfg);
    }
    SlopeSequence s;
    s.i_min = 0;
    s.slopes = {ell0};
    s.left_slope = 1.0 / wb.w_lo;
    s.right_slope = 1.0 / wb.w_hi;
    return s;
}

std::pair<BiddingFunction, double> class_i_pareto(double r, const SolverConfig& cfg) {
    WorkBounds wb = solve_work_bounds(r, cfg);
    SlopeSequence s = class_i_pareto_slopes(r, cfg);
    double ell0 = s.slopes[0];
    double cons = wb.w_lo + growth_integral(1.0, ell0);

    double t0 = -(kGridReach + kTailDepth * wb.w_lo);
    std::vector<Segment> segs;
    segs.push_back(Segment::exponential(t0, 0.0, std::exp(t0 / wb.w_lo), 1.0 / wb.w_lo));
    segs.push_back(Segment::exponential(0.0, 1.0, 1.0, ell0));
    segs.push_back(Segment::exponential(1.0, kInf, std::exp(ell0), 1.0 / wb.w_hi));
    BiddingFunction fn(std::move(segs), wb.w_lo * std::exp(t0 / wb.w_lo));

    GridSpec quick{0.0, 8.0, 512};
    ConsRobResult cr = fn.consistency_robustness(quick);
    if (cr.rob > r * (1.0 + 1e-8))
        throw Error(ErrorCode::FeasibilityViolation, "class-I construction exceeded its budget");
    return {std::move(fn), cons};
}

}  // namespace bidlab
