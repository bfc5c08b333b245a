#include "bidlab/bidding_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bidlab/numerics.hpp"
#include "bidlab/rng.hpp"

namespace bidlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_integer(double t) { return t == std::floor(t); }

bool near(double a, double b) { return std::fabs(a - b) <= 1e-9; }

}  // namespace

Segment Segment::exponential(double t0, double t1, double v0, double slope) {
    Segment s;
    s.t_start = t0;
    s.t_end = t1;
    s.kind = SegmentKind::Exponential;
    s.value_at_start = v0;
    s.exponent_slope = slope;
    return s;
}

Segment Segment::constant(double t0, double t1, double v) {
    Segment s;
    s.t_start = t0;
    s.t_end = t1;
    s.kind = SegmentKind::Constant;
    s.value = v;
    return s;
}

Segment Segment::polynomial(double t0, double t1, Poly p) {
    Segment s;
    s.t_start = t0;
    s.t_end = t1;
    s.kind = SegmentKind::Polynomial;
    s.coeffs = std::move(p);
    return s;
}

bool Segment::unbounded() const { return std::isinf(t_end); }

double Segment::value_at(double t) const {
    double s = t - t_start;
    switch (kind) {
        case SegmentKind::Exponential: return value_at_start * std::exp(exponent_slope * s);
        case SegmentKind::Constant: return value;
        case SegmentKind::Polynomial: return coeffs(s);
    }
    return 0.0;
}

double Segment::derivative_at(double t) const {
    double s = t - t_start;
    switch (kind) {
        case SegmentKind::Exponential:
            return exponent_slope * value_at_start * std::exp(exponent_slope * s);
        case SegmentKind::Constant: return 0.0;
        case SegmentKind::Polynomial: return coeffs.derivative_at(s);
    }
    return 0.0;
}

double Segment::partial_mass(double t) const {
    double s = std::min(t, t_end) - t_start;
    if (s <= 0.0) return 0.0;
    switch (kind) {
        case SegmentKind::Exponential:
            if (exponent_slope == 0.0) return value_at_start * s;
            return value_at_start * std::expm1(exponent_slope * s) / exponent_slope;
        case SegmentKind::Constant: return value * s;
        case SegmentKind::Polynomial: return coeffs.integral(0.0, s);
    }
    return 0.0;
}

BiddingFunction::BiddingFunction(std::vector<Segment> segments, double tail_mass_bound)
    : segments_(std::move(segments)), tail_mass_bound_(tail_mass_bound) {
    if (segments_.empty()) throw Error(ErrorCode::ParseError, "bidding function has no segments");
    const Segment& last = segments_.back();
    if (!last.unbounded() || last.kind != SegmentKind::Exponential || last.exponent_slope <= 0.0) {
        throw Error(ErrorCode::ParseError,
                    "final segment must be exponential with positive slope on [t, +inf)");
    }
    for (size_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (!(s.t_start < s.t_end))
            throw Error(ErrorCode::ParseError, "segment endpoints out of order");
        if (i + 1 < segments_.size()) {
            double gap = std::fabs(segments_[i + 1].t_start - s.t_end);
            if (gap > 1e-9 * std::max(1.0, std::fabs(s.t_end)))
                throw Error(ErrorCode::ParseError, "segments must abut");
        }
        if (s.kind == SegmentKind::Exponential &&
            (s.value_at_start <= 0.0 || s.exponent_slope < 0.0))
            throw Error(ErrorCode::ParseError, "exponential segment must be positive, slope >= 0");
        if (s.kind == SegmentKind::Constant && s.value <= 0.0)
            throw Error(ErrorCode::ParseError, "constant segment must be positive");
        if (s.kind == SegmentKind::Polynomial) {
            // dense positivity / monotonicity check
            double len = s.t_end - s.t_start;
            for (int j = 0; j <= 16; ++j) {
                double t = s.t_start + len * j / 16.0;
                double v = s.value_at(t);
                if (!(v > 0.0))
                    throw Error(ErrorCode::ParseError, "polynomial segment must stay positive");
                if (s.derivative_at(t) < -1e-9 * std::max(1.0, v))
                    throw Error(ErrorCode::ParseError, "polynomial segment must be nondecreasing");
            }
        }
    }
    // nondecreasing across breakpoints (both sides)
    for (size_t i = 0; i + 1 < segments_.size(); ++i) {
        double left = segments_[i].value_at(segments_[i].t_end);
        double right = segments_[i + 1].value_at(segments_[i + 1].t_start);
        if (right < left * (1.0 - 1e-9))
            throw Error(ErrorCode::ParseError, "values must be globally nondecreasing");
    }
    build_caches();
}

void BiddingFunction::build_caches() {
    size_t n = segments_.size();
    t_starts_.resize(n);
    start_values_.resize(n);
    mass_prefix_.resize(n);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        t_starts_[i] = segments_[i].t_start;
        start_values_[i] = segments_[i].value_at(segments_[i].t_start);
        mass_prefix_[i] = acc;
        if (!segments_[i].unbounded()) acc += segments_[i].full_mass();
    }

    // Detect integer-aligned unit polynomial cells and build cumulative
    // coefficient tables over maximal runs.
    ladder_of_segment_.assign(n, -1);
    size_t i = 0;
    while (i < n) {
        const Segment& s = segments_[i];
        bool cell1 = s.kind == SegmentKind::Polynomial && is_integer(s.t_start) &&
                     near(s.t_end, s.t_start + 1.0);
        bool cell2 = false;
        double split = 1.0;
        if (!cell1 && s.kind == SegmentKind::Polynomial && is_integer(s.t_start) &&
            i + 1 < n && segments_[i + 1].kind == SegmentKind::Polynomial &&
            near(segments_[i + 1].t_start, s.t_end) &&
            near(segments_[i + 1].t_end, s.t_start + 1.0)) {
            cell2 = true;
            split = s.t_end - s.t_start;
        }
        if (!cell1 && !cell2) {
            ++i;
            continue;
        }
        LadderRun run;
        run.first_segment = i;
        run.first_cell = static_cast<long long>(s.t_start);
        run.segs_per_cell = cell2 ? 2 : 1;
        run.split = split;
        Poly cum_low, cum_high;
        size_t j = i;
        long long cell = run.first_cell;
        while (j < n) {
            const Segment& a = segments_[j];
            bool ok;
            if (run.segs_per_cell == 1) {
                ok = a.kind == SegmentKind::Polynomial &&
                     a.t_start == static_cast<double>(cell) && near(a.t_end, a.t_start + 1.0);
            } else {
                ok = j + 1 < n && a.kind == SegmentKind::Polynomial &&
                     segments_[j + 1].kind == SegmentKind::Polynomial &&
                     a.t_start == static_cast<double>(cell) &&
                     near(a.t_end, a.t_start + run.split) &&
                     near(segments_[j + 1].t_start, a.t_end) &&
                     near(segments_[j + 1].t_end, a.t_start + 1.0);
            }
            if (!ok) break;
            cum_low += a.coeffs;
            run.cum_low.push_back(cum_low);
            if (run.segs_per_cell == 2) {
                cum_high += segments_[j + 1].coeffs;
                run.cum_high.push_back(cum_high);
            }
            j += run.segs_per_cell;
            ++cell;
        }
        run.cells = cell - run.first_cell;
        if (run.cells >= 2) {
            int run_id = static_cast<int>(ladders_.size());
            for (size_t k = run.first_segment; k < j; ++k) ladder_of_segment_[k] = run_id;
            ladders_.push_back(std::move(run));
        }
        i = std::max(j, i + 1);
    }
}

size_t BiddingFunction::segment_index(double t) const {
    // last segment with t_start <= t
    auto it = std::upper_bound(t_starts_.begin(), t_starts_.end(), t);
    if (it == t_starts_.begin()) return 0;
    return static_cast<size_t>(it - t_starts_.begin()) - 1;
}

double BiddingFunction::value(double t) const { return segments_[segment_index(t)].value_at(t); }

double BiddingFunction::value_left(double t) const {
    size_t i = segment_index(t);
    if (i > 0 && t == segments_[i].t_start) return segments_[i - 1].value_at(t);
    return segments_[i].value_at(t);
}

double BiddingFunction::derivative(double t) const {
    return segments_[segment_index(t)].derivative_at(t);
}

double BiddingFunction::cumulative_mass(double t) const {
    if (t <= domain_start()) return 0.0;
    size_t i = segment_index(t);
    return mass_prefix_[i] + segments_[i].partial_mass(t);
}

double BiddingFunction::normalized_mass(double t, bool left) const {
    double b = left ? value_left(t) : value(t);
    return cumulative_mass(t + 1.0) / b;
}

double BiddingFunction::work(double t, bool left) const {
    double b = left ? value_left(t) : value(t);
    return cumulative_mass(t) / b;
}

double BiddingFunction::asymptotic_mass_limit() const {
    double w = 1.0 / segments_.back().exponent_slope;
    return w * std::exp(1.0 / w);
}

double BiddingFunction::inverse(double u) const {
    if (u <= start_values_.front()) return domain_start();
    // The value u is first reached either inside the segment before the
    // first start value >= u, or exactly at that segment's start (a jump).
    auto it = std::lower_bound(start_values_.begin(), start_values_.end(), u);
    size_t j = static_cast<size_t>(it - start_values_.begin());
    const Segment& s = segments_[j - 1];
    switch (s.kind) {
        case SegmentKind::Constant:
            return (s.value >= u) ? s.t_start : s.t_end;
        case SegmentKind::Exponential: {
            if (s.exponent_slope == 0.0) return (s.value_at_start >= u) ? s.t_start : s.t_end;
            double t = s.t_start + std::log(u / s.value_at_start) / s.exponent_slope;
            if (t < s.t_start) return s.t_start;
            if (t > s.t_end) return s.t_end;
            return t;
        }
        case SegmentKind::Polynomial: {
            double len = s.t_end - s.t_start;
            double v_lo = s.coeffs(0.0);
            double v_hi = s.coeffs(len);
            if (v_lo >= u) return s.t_start;
            if (v_hi < u) return s.t_end;
            // log-linear initial guess, then safeguarded Newton
            double x = len * std::log(u / v_lo) / std::log(v_hi / v_lo);
            double lo = 0.0, hi = len;
            for (int iter = 0; iter < 60; ++iter) {
                double f = s.coeffs(x) - u;
                if (f > 0.0)
                    hi = x;
                else
                    lo = x;
                double d = s.coeffs.derivative_at(x);
                double step = (d != 0.0) ? f / d : 0.0;
                double xn = x - step;
                if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
                if (std::fabs(xn - x) <= 1e-15 * len) { x = xn; break; }
                x = xn;
            }
            return s.t_start + x;
        }
    }
    return s.t_end;
}

ConsRobResult BiddingFunction::consistency_robustness(const GridSpec& grid) const {
    double t_lo = std::max(grid.center - grid.radius, domain_start());
    double t_hi = grid.center + grid.radius;
    // Near the represented bottom the missing tail distorts F(t+1); keep the
    // scan where the explicit mass exceeds the tail bound by 10 decades.
    if (tail_mass_bound_ > 0.0) {
        double floor_t = t_lo;
        while (floor_t < t_hi - 1.0 &&
               cumulative_mass(floor_t + 1.0) < 1e10 * tail_mass_bound_) {
            floor_t += 0.25;
        }
        t_lo = std::min(std::max(t_lo, floor_t), grid.center - 1.0);
    }
    ConsRobResult out;
    out.cons = kInf;
    out.rob = -kInf;

    auto consider = [&out](double val, double t) {
        if (val < out.cons) {
            out.cons = val;
            out.argmin_t = t;
        }
        if (val > out.rob) {
            out.rob = val;
            out.argmax_t = t;
        }
    };

    long long steps = static_cast<long long>((t_hi - t_lo) * grid.points_per_unit);
    double h = (t_hi - t_lo) / static_cast<double>(std::max<long long>(steps, 1));
    for (long long i = 0; i <= steps; ++i) consider(normalized_mass(t_lo + i * h), t_lo + i * h);
    for (const Segment& s : segments_) {
        if (s.t_start <= t_lo || s.t_start >= t_hi) continue;
        consider(normalized_mass(s.t_start), s.t_start);
        consider(normalized_mass(s.t_start, /*left=*/true), s.t_start);
    }
    // The final exponential segment drives CR to its class-E limit.
    consider(asymptotic_mass_limit(), t_hi);

    // Local golden-section refinement around grid extrema.
    auto refine = [this, h, t_lo](double t_center, bool minimize) {
        const double phi = 0.6180339887498949;
        double best_t = t_center, best_v = normalized_mass(t_center);
        for (int side = 0; side < 2; ++side) {
            double a = side == 0 ? t_center - h : t_center;
            double b = side == 0 ? t_center : t_center + h;
            if (a < t_lo) a = t_lo;
            double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
            double f1 = normalized_mass(x1), f2 = normalized_mass(x2);
            for (int it = 0; it < 80; ++it) {
                bool keep_left = minimize ? (f1 < f2) : (f1 > f2);
                if (keep_left) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - phi * (b - a);
                    f1 = normalized_mass(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + phi * (b - a);
                    f2 = normalized_mass(x2);
                }
            }
            double t = 0.5 * (a + b), v = normalized_mass(t);
            if ((minimize && v < best_v) || (!minimize && v > best_v)) {
                best_v = v;
                best_t = t;
            }
        }
        return std::make_pair(best_t, best_v);
    };

    auto [tmin, vmin] = refine(out.argmin_t, true);
    if (vmin < out.cons) {
        out.cons_err = out.cons - vmin;
        out.cons = vmin;
        out.argmin_t = tmin;
    }
    auto [tmax, vmax] = refine(out.argmax_t, false);
    if (vmax > out.rob) {
        out.rob_err = vmax - out.rob;
        out.rob = vmax;
        out.argmax_t = tmax;
    }
    out.cons_err += 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(out.cons);
    out.rob_err += 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(out.rob);
    return out;
}

double BiddingFunction::bid_prefix_sum(double lambda, long long i_max) const {
    double total = 0.0;
    double t_cap = static_cast<double>(i_max) + lambda;
    for (size_t si = 0; si < segments_.size();) {
        const Segment& s = segments_[si];
        if (s.t_start > t_cap) break;
        int run_id = ladder_of_segment_[si];
        if (run_id >= 0) {
            const LadderRun& run = ladders_[static_cast<size_t>(run_id)];
            long long cA = run.first_cell;
            long long cB = run.first_cell + run.cells - 1;
            cB = std::min(cB, i_max);  // cell m holds exactly the bid with i = m
            if (cB >= cA) {
                long long jA = cA - run.first_cell;
                long long jB = cB - run.first_cell;
                const std::vector<Poly>& cum =
                    (run.segs_per_cell == 2 && lambda >= run.split) ? run.cum_high : run.cum_low;
                double x = (run.segs_per_cell == 2 && lambda >= run.split) ? lambda - run.split
                                                                           : lambda;
                double hi = cum[static_cast<size_t>(jB)](x);
                double lo = (jA > 0) ? cum[static_cast<size_t>(jA - 1)](x) : 0.0;
                total += hi - lo;
            }
            si = run.first_segment + static_cast<size_t>(run.cells * run.segs_per_cell);
            continue;
        }
        long long iA = static_cast<long long>(std::ceil(s.t_start - lambda));
        if (static_cast<double>(iA) + lambda < s.t_start) ++iA;  // guard fp at exact integers
        long long iB;
        if (s.unbounded()) {
            iB = i_max;
        } else {
            iB = static_cast<long long>(std::ceil(s.t_end - lambda)) - 1;
            if (static_cast<double>(iB) + lambda >= s.t_end) --iB;
            iB = std::min(iB, i_max);
        }
        if (iB >= iA) {
            long long count = iB - iA + 1;
            double first_ref = static_cast<double>(iA) + lambda;
            switch (s.kind) {
                case SegmentKind::Constant:
                    total += s.value * static_cast<double>(count);
                    break;
                case SegmentKind::Exponential: {
                    double v_first = s.value_at(first_ref);
                    if (s.exponent_slope == 0.0) {
                        total += v_first * static_cast<double>(count);
                    } else {
                        total += v_first *
                                 std::expm1(s.exponent_slope * static_cast<double>(count)) /
                                 std::expm1(s.exponent_slope);
                    }
                    break;
                }
                case SegmentKind::Polynomial:
                    for (long long i = iA; i <= iB; ++i)
                        total += s.coeffs(static_cast<double>(i) + lambda - s.t_start);
                    break;
            }
        }
        ++si;
    }
    return total;
}

double BiddingFunction::trial_cost(double lambda, double threshold) const {
    double t_u = inverse(threshold);
    long long i_stop = static_cast<long long>(std::ceil(t_u - lambda));
    if (static_cast<double>(i_stop) + lambda < t_u) ++i_stop;
    // value(i_stop + lambda) >= threshold by right-continuity of B
    return bid_prefix_sum(lambda, i_stop);
}

std::pair<BidSequenceSample, double> BiddingFunction::sample_sequence(uint64_t seed,
                                                                      double threshold,
                                                                      long long window_cap) const {
    double t_u = inverse(threshold);
    if (t_u < domain_start() + 1.0 || t_u > domain_start() + 1e6) {
        throw Error(ErrorCode::ThresholdOutOfRange,
                    "threshold outside the represented value range");
    }
    SplitMix64 rng(seed);
    double lambda = rng.next_uniform();

    long long i_stop = static_cast<long long>(std::ceil(t_u - lambda));
    if (static_cast<double>(i_stop) + lambda < t_u) ++i_stop;
    long long i_min = static_cast<long long>(std::ceil(domain_start() - lambda));
    if (static_cast<double>(i_min) + lambda < domain_start()) ++i_min;
    i_min = std::max(i_min, i_stop - window_cap + 1);

    BidSequenceSample sample;
    sample.lambda = lambda;
    sample.i_min = i_min;
    sample.i_max = i_stop;
    sample.bids.reserve(static_cast<size_t>(i_stop - i_min + 1));
    for (long long i = i_min; i <= i_stop; ++i)
        sample.bids.push_back(value(static_cast<double>(i) + lambda));

    double cost = bid_prefix_sum(lambda, i_stop);
    return {std::move(sample), cost};
}

BiddingFunction BiddingFunction::scaled(double delta) const {
    if (!(delta > 0.0)) throw Error(ErrorCode::ParseError, "scale factor must be positive");
    std::vector<Segment> segs = segments_;
    for (Segment& s : segs) {
        s.value_at_start *= delta;
        s.value *= delta;
        for (double& c : s.coeffs.c) c *= delta;
    }
    return BiddingFunction(std::move(segs), tail_mass_bound_ * delta);
}

BiddingFunction BiddingFunction::shifted(double c) const {
    std::vector<Segment> segs = segments_;
    for (Segment& s : segs) {
        s.t_start -= c;
        if (!s.unbounded()) s.t_end -= c;
    }
    return BiddingFunction(std::move(segs), tail_mass_bound_);
}

nlohmann::json BiddingFunction::to_json() const {
    nlohmann::json segs = nlohmann::json::array();
    for (const Segment& s : segments_) {
        nlohmann::json j;
        j["t_start"] = s.t_start;
        if (s.unbounded())
            j["t_end"] = nullptr;
        else
            j["t_end"] = s.t_end;
        switch (s.kind) {
            case SegmentKind::Exponential:
                j["kind"] = "exponential";
                j["value_at_start"] = s.value_at_start;
                j["exponent_slope"] = s.exponent_slope;
                break;
            case SegmentKind::Constant:
                j["kind"] = "constant";
                j["value"] = s.value;
                break;
            case SegmentKind::Polynomial:
                j["kind"] = "polynomial";
                j["coefficients"] = s.coeffs.c;
                break;
        }
        segs.push_back(std::move(j));
    }
    return nlohmann::json{{"segments", std::move(segs)}, {"tail_mass_bound", tail_mass_bound_}};
}

BiddingFunction BiddingFunction::from_json(const nlohmann::json& j) {
    try {
        std::vector<Segment> segs;
        for (const auto& js : j.at("segments")) {
            double t0 = js.at("t_start").get<double>();
            double t1 = js.at("t_end").is_null() ? kInf : js.at("t_end").get<double>();
            std::string kind = js.at("kind").get<std::string>();
            if (kind == "exponential") {
                segs.push_back(Segment::exponential(t0, t1, js.at("value_at_start").get<double>(),
                                                    js.at("exponent_slope").get<double>()));
            } else if (kind == "constant") {
                segs.push_back(Segment::constant(t0, t1, js.at("value").get<double>()));
            } else if (kind == "polynomial") {
                segs.push_back(Segment::polynomial(
                    t0, t1, Poly(js.at("coefficients").get<std::vector<double>>())));
            } else {
                throw Error(ErrorCode::ParseError, "unknown segment kind: " + kind);
            }
        }
        return BiddingFunction(std::move(segs), j.at("tail_mass_bound").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad bidding-function JSON: ") + e.what());
    }
}

BiddingFunction estimate_function_from_samples(const std::vector<BidSequenceSample>& samples) {
    if (samples.size() < 1000)
        throw Error(ErrorCode::InsufficientSamples,
                    "estimator needs at least 1000 samples");
    std::vector<double> bids;
    for (const auto& s : samples) bids.insert(bids.end(), s.bids.begin(), s.bids.end());
    std::sort(bids.begin(), bids.end());
    if (bids.empty() || bids.front() <= 0.0)
        throw Error(ErrorCode::InsufficientSamples, "samples carry no positive bids");

    double n = static_cast<double>(samples.size());
    size_t rank1 =
        static_cast<size_t>(std::lower_bound(bids.begin(), bids.end(), 1.0) - bids.begin());

    // B(t) = inf { v : F(v) > t } is a step function through the pooled order
    // statistics; equal bids merge into one step.
    std::vector<Segment> segs;
    size_t i = 0;
    while (i < bids.size()) {
        size_t j = i;
        while (j < bids.size() && bids[j] == bids[i]) ++j;
        double t0 = (static_cast<double>(i) - static_cast<double>(rank1)) / n;
        double t1 = (static_cast<double>(j) - static_cast<double>(rank1)) / n;
        segs.push_back(Segment::constant(t0, t1, bids[i]));
        i = j;
    }
    // growth-matched exponential continuation beyond the largest observed bid
    double slope = 1.0;
    if (segs.size() >= 2) {
        double t_span = segs.back().t_end - segs.front().t_start;
        double log_span = std::log(segs.back().value / segs.front().value);
        if (t_span > 0.0 && log_span > 0.0) slope = log_span / t_span;
    }
    double t_last = segs.back().t_end;
    double v_last = segs.back().value;
    segs.push_back(Segment::exponential(t_last, kInf, v_last, slope));
    return BiddingFunction(std::move(segs), bids.front());
}

}  // namespace bidlab
