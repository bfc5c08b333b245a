#pragma once

#include <ostream>
#include <utility>
#include <vector>

#include "bidlab/bidding_function.hpp"
#include "bidlab/numerics.hpp"

namespace bidlab {

/// Step class: B(t) = exp(floor(t)*(ell+h) + frac(t)*ell); ell tunes the
/// amount of randomness in the induced sequence (ell = 0 is deterministic).
struct ClassDParams {
    double ell = 0.0;
    double h = 0.0;
};

/// Slopes of a continuous piecewise-exponential function, one per unit
/// interval [i, i+1), stored explicitly on [i_min, i_max] with constant
/// asymptotic slopes on both sides.
struct SlopeSequence {
    int i_min = 0;
    std::vector<double> slopes;  // slopes[i - i_min]
    double left_slope = 0.0;     // for i < i_min
    double right_slope = 0.0;    // for i > i_min + slopes.size() - 1

    double slope(int i) const {
        if (i < i_min) return left_slope;
        int j = i - i_min;
        if (j >= static_cast<int>(slopes.size())) return right_slope;
        return slopes[static_cast<size_t>(j)];
    }
};

enum class TradeoffSource { ClassE, ClassD, ClassI, AlgorithmA, LowerBound };

const char* tradeoff_source_name(TradeoffSource s);

struct TradeoffPoint {
    double r = 0.0;
    double c = 0.0;
    TradeoffSource source = TradeoffSource::ClassE;
};

/// CSV with header `r,c,source`, floats at 12 significant digits.
void write_tradeoff_csv(std::ostream& os, const std::vector<TradeoffPoint>& points);

/// B(t) = exp(t/w); constant normalized mass w*exp(1/w).
BiddingFunction class_e(double w);

BiddingFunction class_d(const ClassDParams& p);

double class_d_cons(const ClassDParams& p);
double class_d_rob(const ClassDParams& p);

/// Minimal robustness over class D at consistency budget c in (1, e]:
/// the deterministic branch c^2/(c-1) for c <= 3/2, else the root-equation
/// branch. Returns the achieving parameters and that robustness.
std::pair<ClassDParams, double> class_d_pareto(double c);

/// Inverse of the class-D Pareto map: the best consistency achievable at
/// robustness budget r >= e, with the achieving parameters.
std::pair<ClassDParams, double> class_d_for_robustness(double r);

/// Best class-I function at robustness r >= e and its consistency
/// (w_lo + 1 above the regime boundary R0, the ell* branch below it).
std::pair<BiddingFunction, double> class_i_pareto(double r, const SolverConfig& cfg = {});

SlopeSequence class_i_pareto_slopes(double r, const SolverConfig& cfg = {});

/// Work at integer reference point i from the slope recurrence
/// w_{i+1} = exp(-l_i) * (w_i + (exp(l_i)-1)/l_i).
double class_i_work(const SlopeSequence& s, int i);

/// Closed-form normalized mass of a class-I function at any t.
double class_i_mass(const SlopeSequence& s, double t);

}  // namespace bidlab
