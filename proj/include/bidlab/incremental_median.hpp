#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <vector>

#include "bidlab/bidding_function.hpp"
#include "bidlab/evaluation.hpp"

namespace bidlab {

/// Connected undirected graph with positive edge weights; directed
/// duplicates merge to the minimum arc weight on ingestion.
struct WeightedGraph {
    struct Edge {
        int u = 0;
        int v = 0;
        double w = 0.0;
    };
    int vertex_count = 0;
    std::vector<Edge> edges;

    // CSR adjacency, built by make_graph/load_graph
    std::vector<int> adj_offset;
    std::vector<std::pair<int, double>> adj;
};

WeightedGraph make_graph(int vertex_count, std::vector<WeightedGraph::Edge> edges);

/// Edge-list CSV `u,v,weight` with a header line.
WeightedGraph load_graph(const std::filesystem::path& path);

/// Deterministic grid-plus-chords graph with dyadic weights; a desk-scale
/// stand-in for a road network.
WeightedGraph make_synthetic_road_graph(int rows, int cols, uint64_t seed);

/// Exact single-source shortest paths (binary-heap label setting).
std::vector<double> shortest_paths_from(const WeightedGraph& g, int source);

/// One row of exact distances per requested source.
std::vector<std::vector<double>> shortest_path_matrix(const WeightedGraph& g,
                                                      const std::vector<int>& sources);

struct MedoidSolution {
    int k = 0;
    std::vector<int> facilities;        // sorted, |facilities| <= k
    double cost = 0.0;                  // sum over vertices of distance to nearest facility
    std::vector<double> cost_history;   // nonincreasing across swap iterations
};

/// Distance-weighted greedy seeding followed by best-swap local search to a
/// local optimum; deterministic given the seed.
MedoidSolution kmedoids(const WeightedGraph& g, int k, uint64_t seed);
MedoidSolution kmedoids_with_matrix(const std::vector<std::vector<double>>& dist, int k,
                                    uint64_t seed);

/// Nested facility prefixes for the constructed levels plus approximation
/// ratios against the baselines (intermediate indices reuse the next
/// smaller constructed set).
struct IncrementalSolution {
    std::map<int, std::vector<int>> prefix_sets;
    std::map<int, double> ratios;
};

/// Indices i of the cost universe hit by at least one bid: some bid lies in
/// [cost_i, cost_{i-1}), reading costs in decreasing order (increasing k).
/// grid_k is ascending; grid_costs are the matching baseline costs. The last
/// grid index (k = n, cost 0) is always included.
std::vector<int> project_bids(const BiddingFunction& fn, double lambda, double scale,
                              const std::vector<int>& grid_k,
                              const std::vector<double>& grid_costs);

/// Top-down nearest-point projection: F_n = V; walking the constructed
/// levels downward, each baseline facility maps to its closest point in the
/// previously built set (ties to the smallest vertex id).
IncrementalSolution build_incremental(const std::vector<std::vector<double>>& dist,
                                      const std::vector<int>& levels_desc,
                                      const std::map<int, MedoidSolution>& baselines);

struct MedianExperimentRow {
    Algorithm algorithm = Algorithm::A;
    int k = 0;
    double mean_ratio = 0.0;
    double std_err = 0.0;
};

struct MedianExperimentResult {
    std::vector<int> k_grid;
    std::map<int, MedoidSolution> baselines;
    std::vector<MedianExperimentRow> rows;
};

/// FNV-1a over the vertex count and edge list; keys the baseline cache.
uint64_t graph_hash(const WeightedGraph& g);

/// Averages ratio(k) over seeded trials per algorithm, with sequences scaled
/// so the consistency point targets the predicted cost at k_hat. Baselines
/// found in `precomputed` are reused; the rest run PAM (one seed per k).
MedianExperimentResult run_experiment(const WeightedGraph& g, double r, int k_hat,
                                      const std::vector<Algorithm>& algorithms, int trials,
                                      uint64_t seed, int threads = 1,
                                      std::vector<int> k_grid = {},
                                      const std::map<int, MedoidSolution>* precomputed = nullptr);

/// CSV `algorithm,k,mean_ratio,stderr`, 12 significant digits.
void write_median_csv(std::ostream& os, const std::vector<MedianExperimentRow>& rows);

}  // namespace bidlab
