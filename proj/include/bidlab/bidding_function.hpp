#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bidlab/errors.hpp"
#include "bidlab/polynomial.hpp"

namespace bidlab {

enum class SegmentKind { Exponential, Constant, Polynomial };

/// One piece of a piecewise-analytic bidding function. Values are evaluated
/// in the local variable s = t - t_start; every kind has a closed-form
/// antiderivative, so cumulative masses never involve quadrature.
struct Segment {
    double t_start = 0.0;
    double t_end = 0.0;  // +inf allowed for the final segment
    SegmentKind kind = SegmentKind::Constant;
    double value_at_start = 0.0;  // Exponential
    double exponent_slope = 0.0;  // Exponential, >= 0
    double value = 0.0;           // Constant
    Poly coeffs;                  // Polynomial, in s = t - t_start

    static Segment exponential(double t0, double t1, double v0, double slope);
    static Segment constant(double t0, double t1, double v);
    static Segment polynomial(double t0, double t1, Poly p);

    double value_at(double t) const;
    double derivative_at(double t) const;
    /// Mass of [t_start, t]; t is clamped to [t_start, t_end].
    double partial_mass(double t) const;
    double full_mass() const { return partial_mass(t_end); }
    bool unbounded() const;
};

struct GridSpec {
    double center = 0.0;
    double radius = 30.0;
    int points_per_unit = 4096;
};

struct ConsRobResult {
    double cons = 0.0;
    double rob = 0.0;
    double argmin_t = 0.0;
    double argmax_t = 0.0;
    double cons_err = 0.0;  // estimated discretization error
    double rob_err = 0.0;
};

/// A finite window of an induced randomized sequence: bids[j] = B(i_min+j+λ).
struct BidSequenceSample {
    double lambda = 0.0;
    std::vector<double> bids;
    long long i_min = 0;
    long long i_max = 0;
};

/// Piecewise-analytic nondecreasing positive function B with finite left
/// integrals; induces the randomized sequence (B(i+λ)) with λ ~ U[0,1).
/// Segments cover [domain_start, +inf); the mass of the true function below
/// domain_start is bounded by tail_mass_bound and is not represented, so
/// cumulative masses understate by at most that amount.
///
/// Evaluation is right-continuous: the segment owning t is the one with
/// t in [t_start, t_end). Left limits are available through the `left`
/// flags, which the class-D analysis needs at its jump points.
class BiddingFunction {
public:
    BiddingFunction(std::vector<Segment> segments, double tail_mass_bound);

    const std::vector<Segment>& segments() const { return segments_; }
    double tail_mass_bound() const { return tail_mass_bound_; }
    double domain_start() const { return segments_.front().t_start; }

    double value(double t) const;
    double value_left(double t) const;
    double derivative(double t) const;

    /// F(t) = integral of B over (-inf, t], explicit segments only.
    double cumulative_mass(double t) const;

    /// CR_B(t) = F(t+1) / B(t).
    double normalized_mass(double t, bool left = false) const;

    /// w_B(t) = F(t) / B(t).
    double work(double t, bool left = false) const;

    /// Generalized inverse B^-(u) = inf { t : B(t) >= u }, clamped to the
    /// represented domain on the left.
    double inverse(double u) const;

    /// Normalized-mass limit as t -> +inf, determined by the final slope.
    double asymptotic_mass_limit() const;

    ConsRobResult consistency_robustness(const GridSpec& grid = {}) const;

    /// Cost of one trial: sum of bids B(i+λ) for increasing i up to and
    /// including the first bid >= threshold. Exact per-segment closed forms;
    /// understates by at most the (tiny) unrepresented tail.
    double trial_cost(double lambda, double threshold) const;

    std::pair<BidSequenceSample, double> sample_sequence(uint64_t seed, double threshold,
                                                         long long window_cap = 4096) const;

    BiddingFunction scaled(double delta) const;
    /// Returns t -> B(t + c).
    BiddingFunction shifted(double c) const;

    nlohmann::json to_json() const;
    static BiddingFunction from_json(const nlohmann::json& j);

private:
    size_t segment_index(double t) const;
    double bid_prefix_sum(double lambda, long long i_max) const;
    void build_caches();

    std::vector<Segment> segments_;
    double tail_mass_bound_;

    std::vector<double> t_starts_;
    std::vector<double> start_values_;
    std::vector<double> mass_prefix_;

    // Runs of unit-width polynomial cells aligned to integers (the shape the
    // delay-ODE construction produces). Prefix-cumulative coefficient tables
    // turn a per-trial walk over K cells into two Horner evaluations.
    struct LadderRun {
        size_t first_segment = 0;
        long long first_cell = 0;  // integer t_start of the first cell
        long long cells = 0;
        double split = 1.0;               // low piece on [0,split), high on [split,1)
        int segs_per_cell = 1;            // 1 or 2
        std::vector<Poly> cum_low;        // cum_low[j] = sum of low coeffs, cells 0..j
        std::vector<Poly> cum_high;       // present when segs_per_cell == 2
    };
    std::vector<LadderRun> ladders_;
    std::vector<int> ladder_of_segment_;
};

/// Theorem-3.2-style diagnostic estimator: empirical expected bid count
/// F(v) between 1 and v, generalized-inverted into a step function.
BiddingFunction estimate_function_from_samples(const std::vector<BidSequenceSample>& samples);

}  // namespace bidlab
