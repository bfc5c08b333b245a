#include "bidlab/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "bidlab/numerics.hpp"
#include "bidlab/pareto_optimal.hpp"
#include "bidlab/rng.hpp"
#include "bidlab/strategy_classes.hpp"

namespace bidlab {

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::D: return "D";
        case Algorithm::I: return "I";
        case Algorithm::A: return "A";
    }
    return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "D" || name == "d") return Algorithm::D;
    if (name == "I" || name == "i") return Algorithm::I;
    if (name == "A" || name == "a") return Algorithm::A;
    throw Error(ErrorCode::ParseError, "unknown algorithm: " + name);
}

namespace {

ClassDParams class_d_choice(double r, double* cons_out) {
    if (r >= 4.0 - 1e-12) {
        // deterministic branch: rob = c^2/(c-1) solved for the smaller c
        double c = 0.5 * (r - std::sqrt(r * r - 4.0 * r));
        if (cons_out) *cons_out = c;
        return ClassDParams{0.0, std::log(c / (c - 1.0))};
    }
    auto [params, c] = class_d_for_robustness(r);
    if (cons_out) *cons_out = c;
    return params;
}

}  // namespace

BiddingFunction build_algorithm(Algorithm algo, double r) {
    switch (algo) {
        case Algorithm::A: return build_algorithm_a(r);
        case Algorithm::I: return class_i_pareto(r).first;
        case Algorithm::D: return class_d(class_d_choice(r, nullptr));
    }
    throw Error(ErrorCode::ParseError, "bad algorithm");
}

double algorithm_consistency(Algorithm algo, double r) {
    switch (algo) {
        case Algorithm::A: {
            RegimeParams rp = regime_params(r);
            return rp.small_regime ? rp.r / (2.0 - rp.y) : rp.r - rp.w_hi;
        }
        case Algorithm::I: {
            return class_i_pareto(r).second;
        }
        case Algorithm::D: {
            double c = 0.0;
            class_d_choice(r, &c);
            return c;
        }
    }
    throw Error(ErrorCode::ParseError, "bad algorithm");
}

namespace {

constexpr int64_t kChunkTrials = 1 << 14;

struct ChunkSums {
    double sum = 0.0;
    double sumsq = 0.0;
};

/// Pairwise reduction in a fixed order so results do not depend on the
/// thread count.
ChunkSums reduce_pairwise(const std::vector<ChunkSums>& chunks, size_t lo, size_t hi) {
    if (hi - lo == 1) return chunks[lo];
    size_t mid = lo + (hi - lo) / 2;
    ChunkSums a = reduce_pairwise(chunks, lo, mid);
    ChunkSums b = reduce_pairwise(chunks, mid, hi);
    return {a.sum + b.sum, a.sumsq + b.sumsq};
}

}  // namespace

EvalResult simulate_expected_nc(const BiddingFunction& fn, const NoiseModel& noise,
                                int64_t n_trials, uint64_t seed, Algorithm label, int threads) {
    if (n_trials < 1) throw Error(ErrorCode::ParseError, "n_trials must be >= 1");
    ConsRobResult cr = fn.consistency_robustness(GridSpec{0.0, 8.0, 512});
    const double u0 = fn.value(cr.argmin_t);  // consistency point plays the prediction
    const double sigma = std::sqrt(noise.sigma2);

    const size_t n_chunks = static_cast<size_t>((n_trials + kChunkTrials - 1) / kChunkTrials);
    std::vector<ChunkSums> chunks(n_chunks);
    SplitMix64 base(seed);

    auto run_chunk = [&](size_t c) {
        SplitMix64 rng = base.split(c);
        int64_t lo = static_cast<int64_t>(c) * kChunkTrials;
        int64_t hi = std::min(n_trials, lo + kChunkTrials);
        double sum = 0.0, sumsq = 0.0;
        for (int64_t i = lo; i < hi; ++i) {
            double lambda = rng.next_uniform();
            double z = inverse_normal_cdf(rng.next_uniform_open());
            double u = u0 * std::exp(sigma * z);
            double nc = fn.trial_cost(lambda, u) / u;
            sum += nc;
            sumsq += nc * nc;
        }
        chunks[c] = {sum, sumsq};
    };

    if (threads <= 1 || n_chunks == 1) {
        for (size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            for (size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) run_chunk(c);
        };
        std::vector<std::thread> pool;
        int nt = std::min<int>(threads, static_cast<int>(n_chunks));
        pool.reserve(static_cast<size_t>(nt));
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ChunkSums total = reduce_pairwise(chunks, 0, n_chunks);
    double n = static_cast<double>(n_trials);
    double mean = total.sum / n;
    double var = (n > 1) ? std::max(0.0, (total.sumsq - n * mean * mean) / (n - 1.0)) : 0.0;

    EvalResult res;
    res.algorithm = label;
    res.sigma2 = noise.sigma2;
    res.mean_nc = mean;
    res.std_err = std::sqrt(var / n);
    res.n_trials = n_trials;
    res.seed = seed;
    return res;
}

std::vector<EvalResult> sweep_sigma(const std::vector<Algorithm>& algorithms, double r,
                                    const std::vector<double>& sigma2_grid, int64_t n_trials,
                                    uint64_t seed, int threads) {
    std::vector<BiddingFunction> fns;
    fns.reserve(algorithms.size());
    for (Algorithm a : algorithms) fns.push_back(build_algorithm(a, r));

    std::vector<EvalResult> rows;
    rows.reserve(algorithms.size() * sigma2_grid.size());
    SplitMix64 base(seed);
    for (size_t row = 0; row < sigma2_grid.size(); ++row) {
        // one stream per sigma2 cell, replayed by every algorithm
        uint64_t row_seed = base.split(row).next();
        for (size_t ai = 0; ai < algorithms.size(); ++ai) {
            NoiseModel nm{1.0, sigma2_grid[row]};
            rows.push_back(simulate_expected_nc(fns[ai], nm, n_trials, row_seed, algorithms[ai],
                                                threads));
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, double r, const std::vector<EvalResult>& rows) {
    os << "algorithm,r,sigma2,mean_nc,stderr,n_trials\n";
    char buf[200];
    for (const EvalResult& e : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g,%.12g,%lld\n",
                      algorithm_name(e.algorithm), r, e.sigma2, e.mean_nc, e.std_err,
                      static_cast<long long>(e.n_trials));
        os << buf;
    }
}

}  // namespace bidlab
