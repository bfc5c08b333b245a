#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "bidlab/bidding_function.hpp"

namespace bidlab {

/// Log-normal threshold noise: u = u_hat * exp(eta), eta ~ N(0, sigma2).
/// The median of u is exactly the prediction u_hat.
struct NoiseModel {
    double u_hat = 1.0;
    double sigma2 = 0.0;
};

enum class Algorithm { D, I, A };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

/// The bidding function each competitor uses at robustness budget r.
/// D is the best class-D choice: the deterministic branch once r >= 4
/// (the doubling function at r = 4), the randomized Pareto branch below.
/// I is the class-I Pareto construction, A the delay-ODE function.
BiddingFunction build_algorithm(Algorithm algo, double r);

/// Closed-form consistency of build_algorithm's output.
double algorithm_consistency(Algorithm algo, double r);

struct EvalResult {
    Algorithm algorithm = Algorithm::A;
    double sigma2 = 0.0;
    double mean_nc = 0.0;
    double std_err = 0.0;
    int64_t n_trials = 0;
    uint64_t seed = 0;
};

/// Monte-Carlo mean of cost(X_B, u)/u over paired (lambda, eta) draws. The
/// function is aligned so its consistency point value plays the role of the
/// prediction; by scale invariance the normalized cost needs no rescaling.
/// Deterministic given the seed, independent of the thread count.
EvalResult simulate_expected_nc(const BiddingFunction& fn, const NoiseModel& noise,
                                int64_t n_trials, uint64_t seed,
                                Algorithm label = Algorithm::A, int threads = 1);

/// One row per (algorithm, sigma2) cell; all algorithms replay the same
/// (lambda, eta) stream per cell (common random numbers).
std::vector<EvalResult> sweep_sigma(const std::vector<Algorithm>& algorithms, double r,
                                    const std::vector<double>& sigma2_grid, int64_t n_trials,
                                    uint64_t seed, int threads = 1);

/// CSV `algorithm,r,sigma2,mean_nc,stderr,n_trials`, 12 significant digits.
void write_sweep_csv(std::ostream& os, double r, const std::vector<EvalResult>& rows);

}  // namespace bidlab
