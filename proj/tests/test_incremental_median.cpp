#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "bidlab/incremental_median.hpp"
#include "bidlab/rng.hpp"

using namespace bidlab;

namespace {

std::filesystem::path write_graph_csv(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << "u,v,weight\n" << body;
    return path;
}

// Bellman-Ford oracle, deliberately different from the library's Dijkstra
std::vector<double> bellman_ford(const WeightedGraph& g, int src) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<size_t>(g.vertex_count), inf);
    dist[static_cast<size_t>(src)] = 0.0;
    for (int pass = 0; pass < g.vertex_count; ++pass) {
        bool changed = false;
        for (const auto& e : g.edges) {
            if (dist[static_cast<size_t>(e.u)] + e.w < dist[static_cast<size_t>(e.v)]) {
                dist[static_cast<size_t>(e.v)] = dist[static_cast<size_t>(e.u)] + e.w;
                changed = true;
            }
            if (dist[static_cast<size_t>(e.v)] + e.w < dist[static_cast<size_t>(e.u)]) {
                dist[static_cast<size_t>(e.u)] = dist[static_cast<size_t>(e.v)] + e.w;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return dist;
}

double subset_cost(const std::vector<std::vector<double>>& dist, const std::vector<int>& fac) {
    double total = 0.0;
    for (size_t v = 0; v < dist.size(); ++v) {
        double best = std::numeric_limits<double>::infinity();
        for (int f : fac) best = std::min(best, dist[static_cast<size_t>(f)][v]);
        total += best;
    }
    return total;
}

// exhaustive k-median over all k-subsets (tiny instances only)
double brute_force_opt(const std::vector<std::vector<double>>& dist, int k,
                       std::vector<int>* arg = nullptr) {
    int n = static_cast<int>(dist.size());
    std::vector<int> pick(static_cast<size_t>(k));
    std::vector<int> best_pick;
    double best = std::numeric_limits<double>::infinity();
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            double c = subset_cost(dist, pick);
            if (c < best) {
                best = c;
                best_pick = pick;
            }
            return;
        }
        for (int v = start; v < n; ++v) {
            pick[static_cast<size_t>(depth)] = v;
            rec(v + 1, depth + 1);
        }
    };
    rec(0, 0);
    if (arg) *arg = best_pick;
    return best;
}

std::vector<std::vector<double>> full_matrix(const WeightedGraph& g) {
    std::vector<int> sources(static_cast<size_t>(g.vertex_count));
    for (int v = 0; v < g.vertex_count; ++v) sources[static_cast<size_t>(v)] = v;
    return shortest_path_matrix(g, sources);
}

}  // namespace

TEST_CASE("graph loading: paths, merges, and failure modes") {
    auto path = write_graph_csv("bidlab_path.csv", "0,1,1\n1,2,1\n");
    WeightedGraph g = load_graph(path);
    CHECK(g.vertex_count == 3);
    CHECK(shortest_paths_from(g, 0)[2] == 2.0);
    std::filesystem::remove(path);

    // directed duplicates collapse to the minimum arc weight
    auto dup = write_graph_csv("bidlab_dup.csv", "0,1,3\n1,0,1\n1,2,2\n");
    WeightedGraph gd = load_graph(dup);
    CHECK(gd.edges.size() == 2);
    CHECK(shortest_paths_from(gd, 0)[1] == 1.0);
    std::filesystem::remove(dup);

    auto split = write_graph_csv("bidlab_split.csv", "0,1,1\n2,3,1\n");
    CHECK_THROWS_AS(load_graph(split), Error);
    std::filesystem::remove(split);

    auto neg = write_graph_csv("bidlab_neg.csv", "0,1,0\n");
    CHECK_THROWS_AS(load_graph(neg), Error);
    std::filesystem::remove(neg);

    auto bad = write_graph_csv("bidlab_bad.csv", "0,oops,1\n");
    CHECK_THROWS_AS(load_graph(bad), Error);
    std::filesystem::remove(bad);
}

TEST_CASE("shortest paths on hand-checkable graphs") {
    WeightedGraph star = make_graph(5, {{0, 1, 2.0}, {0, 2, 1.0}, {0, 3, 4.0}, {0, 4, 0.5}});
    auto d = shortest_paths_from(star, 1);
    CHECK(d[2] == 3.0);
    CHECK(d[4] == 2.5);

    WeightedGraph tri = make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 5.0}});
    CHECK(shortest_paths_from(tri, 0)[2] == 2.0);
}

TEST_CASE("Dijkstra equals Bellman-Ford exactly on a 100-vertex graph") {
    WeightedGraph g = make_synthetic_road_graph(10, 10, 99);
    for (int src : {0, 17, 55, 99}) {
        auto a = shortest_paths_from(g, src);
        auto b = bellman_ford(g, src);
        for (int v = 0; v < g.vertex_count; ++v) {
            CHECK(a[static_cast<size_t>(v)] == b[static_cast<size_t>(v)]);
        }
    }
}

TEST_CASE("kmedoids on degenerate and tiny instances") {
    WeightedGraph path3 = make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
    MedoidSolution all = kmedoids(path3, 3, 1);
    CHECK(all.cost == 0.0);

    MedoidSolution mid = kmedoids(path3, 1, 7);
    REQUIRE(mid.facilities.size() == 1);
    CHECK(mid.facilities[0] == 1);
    CHECK(mid.cost == 2.0);

    // determinism and nonincreasing swap history
    WeightedGraph g = make_synthetic_road_graph(6, 6, 5);
    MedoidSolution s1 = kmedoids(g, 5, 123);
    MedoidSolution s2 = kmedoids(g, 5, 123);
    CHECK(s1.facilities == s2.facilities);
    for (size_t i = 1; i < s1.cost_history.size(); ++i) {
        CHECK(s1.cost_history[i] <= s1.cost_history[i - 1] + 1e-12);
    }
}

TEST_CASE("PAM lands within 1.2x of brute force on 10-vertex instances") {
    int hits = 0, total = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        WeightedGraph g = make_synthetic_road_graph(2, 5, 1000 + seed);
        auto dist = full_matrix(g);
        for (int k : {1, 2, 3}) {
            double opt = brute_force_opt(dist, k);
            MedoidSolution pam = kmedoids_with_matrix(dist, k, seed);
            CHECK(pam.cost >= opt - 1e-12);
            if (pam.cost <= 1.2 * opt + 1e-12) ++hits;
            ++total;
        }
    }
    CHECK(total == 300);
    CHECK(hits >= static_cast<int>(0.95 * total));
}

TEST_CASE("incremental projection on a trivial universe") {
    WeightedGraph g = make_graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
    auto dist = full_matrix(g);
    std::map<int, MedoidSolution> baselines;
    std::vector<int> onemed;
    double opt1 = brute_force_opt(dist, 1, &onemed);
    baselines[1] = MedoidSolution{1, onemed, opt1, {}};
    baselines[4] = MedoidSolution{4, {0, 1, 2, 3}, 0.0, {}};

    // K = {n}: degenerate, ratio 1 by the zero-cost convention
    IncrementalSolution trivial = build_incremental(dist, {}, baselines);
    CHECK(trivial.ratios.at(4) == 1.0);

    // K = {1, 4}: the 1-medoid projects into V, landing on itself
    IncrementalSolution sol = build_incremental(dist, {1}, baselines);
    CHECK(sol.prefix_sets.at(1) == onemed);
    CHECK(sol.ratios.at(1) == doctest::Approx(1.0).epsilon(1e-12));

    std::map<int, MedoidSolution> missing{{4, baselines[4]}};
    CHECK_THROWS_AS(build_incremental(dist, {1}, missing), Error);
}

TEST_CASE("nestedness, cardinality, and exact-baseline floors") {
    WeightedGraph g = make_synthetic_road_graph(3, 3, 17);
    auto dist = full_matrix(g);
    std::map<int, MedoidSolution> baselines;
    std::vector<int> grid{1, 2, 3, 5, 9};
    for (int k : grid) {
        std::vector<int> arg;
        double opt = brute_force_opt(dist, k, &arg);
        baselines[k] = MedoidSolution{k, arg, opt, {}};
    }

    BiddingFunction fn = build_algorithm(Algorithm::A, 4.0);
    std::vector<double> costs;
    for (int k : grid) costs.push_back(baselines[k].cost);
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        double lambda = rng.next_uniform();
        std::vector<int> hit = project_bids(fn, lambda, baselines[3].cost, grid, costs);
        std::vector<int> levels(hit.rbegin(), hit.rend());
        IncrementalSolution sol = build_incremental(dist, levels, baselines);

        const std::vector<int>* prev = nullptr;
        for (const auto& [k, fac] : sol.prefix_sets) {
            CHECK(static_cast<int>(fac.size()) <= k);
            if (prev) {
                for (int f : *prev) {
                    CHECK(std::find(fac.begin(), fac.end(), f) != fac.end());
                }
            }
            prev = &fac;
        }
        for (const auto& [k, ratio] : sol.ratios) {
            CHECK(ratio >= 1.0 - 1e-12);  // exact baselines: true floors
            CHECK(ratio <= 2.0 * 4.0 + 1e-9);
        }
    }
}

TEST_CASE("run_experiment is deterministic and well-ordered") {
    WeightedGraph g = make_synthetic_road_graph(8, 8, 31);
    MedianExperimentResult res =
        run_experiment(g, 4.0, 32, {Algorithm::A, Algorithm::D}, 6, 404, 2);
    MedianExperimentResult res2 =
        run_experiment(g, 4.0, 32, {Algorithm::A, Algorithm::D}, 6, 404, 4);
    REQUIRE(res.rows.size() == res2.rows.size());
    for (size_t i = 0; i < res.rows.size(); ++i) {
        CHECK(res.rows[i].mean_ratio == res2.rows[i].mean_ratio);
        CHECK(res.rows[i].k == res2.rows[i].k);
    }
    for (const auto& row : res.rows) {
        CHECK(row.mean_ratio >= 1.0 - 1e-9);
        CHECK(std::isfinite(row.std_err));
    }
    // grid covers the prediction point and both ends
    CHECK(std::find(res.k_grid.begin(), res.k_grid.end(), 32) != res.k_grid.end());
    CHECK(res.k_grid.front() == 1);
    CHECK(res.k_grid.back() == g.vertex_count);
}
