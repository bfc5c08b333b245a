#include "bidlab/incremental_median.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <thread>
#include <tuple>

#include "bidlab/rng.hpp"

namespace bidlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    };
    std::vector<std::thread> pool;
    int nt = std::min(threads, count);
    pool.reserve(static_cast<size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

WeightedGraph make_graph(int vertex_count, std::vector<WeightedGraph::Edge> edges) {
    if (vertex_count <= 0) throw Error(ErrorCode::ParseError, "graph needs vertices");
    // undirected merge: keep the minimum arc weight among both orientations
    std::vector<WeightedGraph::Edge> norm;
    norm.reserve(edges.size());
    for (auto e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= vertex_count || e.v >= vertex_count)
            throw Error(ErrorCode::ParseError, "edge endpoint out of range");
        if (!(e.w > 0.0)) throw Error(ErrorCode::NonpositiveWeight, "edge weights must be > 0");
        if (e.u == e.v) continue;
        if (e.u > e.v) std::swap(e.u, e.v);
        norm.push_back(e);
    }
    std::sort(norm.begin(), norm.end(), [](const auto& a, const auto& b) {
        return std::tie(a.u, a.v, a.w) < std::tie(b.u, b.v, b.w);
    });
    WeightedGraph g;
    g.vertex_count = vertex_count;
    for (const auto& e : norm) {
        if (!g.edges.empty() && g.edges.back().u == e.u && g.edges.back().v == e.v) continue;
        g.edges.push_back(e);
    }

    g.adj_offset.assign(static_cast<size_t>(vertex_count) + 1, 0);
    for (const auto& e : g.edges) {
        ++g.adj_offset[static_cast<size_t>(e.u) + 1];
        ++g.adj_offset[static_cast<size_t>(e.v) + 1];
    }
    for (int v = 0; v < vertex_count; ++v)
        g.adj_offset[static_cast<size_t>(v) + 1] += g.adj_offset[static_cast<size_t>(v)];
    g.adj.resize(g.adj_offset.back());
    std::vector<int> cursor(g.adj_offset.begin(), g.adj_offset.end() - 1);
    for (const auto& e : g.edges) {
        g.adj[static_cast<size_t>(cursor[static_cast<size_t>(e.u)]++)] = {e.v, e.w};
        g.adj[static_cast<size_t>(cursor[static_cast<size_t>(e.v)]++)] = {e.u, e.w};
    }

    // connectivity
    std::vector<char> seen(static_cast<size_t>(vertex_count), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int i = g.adj_offset[static_cast<size_t>(v)]; i < g.adj_offset[static_cast<size_t>(v) + 1]; ++i) {
            int w = g.adj[static_cast<size_t>(i)].first;
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    if (reached != vertex_count) throw Error(ErrorCode::Disconnected, "graph is not connected");
    return g;
}

WeightedGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty graph file");
    // header line required: u,v,weight
    std::vector<WeightedGraph::Edge> edges;
    int max_id = -1;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        WeightedGraph::Edge e;
        char extra;
        if (std::sscanf(line.c_str(), "%d,%d,%lf%c", &e.u, &e.v, &e.w, &extra) < 3)
            throw Error(ErrorCode::ParseError,
                        "bad edge row at line " + std::to_string(line_no) + ": " + line);
        max_id = std::max({max_id, e.u, e.v});
        edges.push_back(e);
    }
    if (edges.empty()) throw Error(ErrorCode::ParseError, "graph file has no edges");
    return make_graph(max_id + 1, std::move(edges));
}

WeightedGraph make_synthetic_road_graph(int rows, int cols, uint64_t seed) {
    SplitMix64 rng(seed);
    auto id = [cols](int r, int c) { return r * cols + c; };
    // dyadic weights: exact in double, so alternative shortest-path
    // implementations agree bit-for-bit
    auto jitter = [&rng](double base) {
        return base * (1.0 + static_cast<double>(rng.next() % 64) / 64.0);
    };
    std::vector<WeightedGraph::Edge> edges;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), jitter(1.0)});
            if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), jitter(1.0)});
            // occasional shortcut, like a bypass road
            if (r + 2 < rows && c + 2 < cols && rng.next() % 13 == 0)
                edges.push_back({id(r, c), id(r + 2, c + 2), jitter(2.0)});
        }
    }
    return make_graph(rows * cols, std::move(edges));
}

std::vector<double> shortest_paths_from(const WeightedGraph& g, int source) {
    std::vector<double> dist(static_cast<size_t>(g.vertex_count), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[static_cast<size_t>(source)] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[static_cast<size_t>(v)]) continue;
        for (int i = g.adj_offset[static_cast<size_t>(v)]; i < g.adj_offset[static_cast<size_t>(v) + 1]; ++i) {
            auto [w, len] = g.adj[static_cast<size_t>(i)];
            double nd = d + len;
            if (nd < dist[static_cast<size_t>(w)]) {
                dist[static_cast<size_t>(w)] = nd;
                heap.push({nd, w});
            }
        }
    }
    return dist;
}

std::vector<std::vector<double>> shortest_path_matrix(const WeightedGraph& g,
                                                      const std::vector<int>& sources) {
    if (sources.empty()) throw Error(ErrorCode::ParseError, "need at least one source");
    std::vector<std::vector<double>> table(sources.size());
    for (size_t i = 0; i < sources.size(); ++i) table[i] = shortest_paths_from(g, sources[i]);
    return table;
}

MedoidSolution kmedoids_with_matrix(const std::vector<std::vector<double>>& dist, int k,
                                    uint64_t seed) {
    const int n = static_cast<int>(dist.size());
    if (k < 1 || k > n) throw Error(ErrorCode::ParseError, "kmedoids needs 1 <= k <= n");
    MedoidSolution sol;
    sol.k = k;
    if (k >= n) {
        sol.facilities.resize(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v) sol.facilities[static_cast<size_t>(v)] = v;
        sol.cost = 0.0;
        sol.cost_history = {0.0};
        return sol;
    }

    SplitMix64 rng(seed);
    std::vector<int> fac;
    std::vector<char> in_fac(static_cast<size_t>(n), 0);
    std::vector<double> mind(static_cast<size_t>(n), kInf);

    int first = std::min(n - 1, static_cast<int>(rng.next_uniform() * n));
    fac.push_back(first);
    in_fac[static_cast<size_t>(first)] = 1;
    for (int v = 0; v < n; ++v) mind[static_cast<size_t>(v)] = dist[static_cast<size_t>(first)][static_cast<size_t>(v)];

    while (static_cast<int>(fac.size()) < k) {
        double total = 0.0;
        for (int v = 0; v < n; ++v) total += mind[static_cast<size_t>(v)];
        int pick = -1;
        if (total > 0.0) {
            double x = rng.next_uniform() * total;
            double acc = 0.0;
            for (int v = 0; v < n; ++v) {
                acc += mind[static_cast<size_t>(v)];
                if (acc >= x && !in_fac[static_cast<size_t>(v)]) {
                    pick = v;
                    break;
                }
            }
        }
        if (pick < 0) {
            for (int v = 0; v < n && pick < 0; ++v)
                if (!in_fac[static_cast<size_t>(v)]) pick = v;
        }
        fac.push_back(pick);
        in_fac[static_cast<size_t>(pick)] = 1;
        const auto& row = dist[static_cast<size_t>(pick)];
        for (int v = 0; v < n; ++v) mind[static_cast<size_t>(v)] = std::min(mind[static_cast<size_t>(v)], row[static_cast<size_t>(v)]);
    }

    const int K = k;
    std::vector<int> n1(static_cast<size_t>(n), 0);
    std::vector<double> d1(static_cast<size_t>(n), 0.0), d2(static_cast<size_t>(n), 0.0);
    auto recompute_nearest = [&]() {
        for (int v = 0; v < n; ++v) {
            double b1 = kInf, b2 = kInf;
            int bi = 0;
            for (int mi = 0; mi < K; ++mi) {
                double d = dist[static_cast<size_t>(fac[static_cast<size_t>(mi)])][static_cast<size_t>(v)];
                if (d < b1) {
                    b2 = b1;
                    b1 = d;
                    bi = mi;
                } else if (d < b2) {
                    b2 = d;
                }
            }
            n1[static_cast<size_t>(v)] = bi;
            d1[static_cast<size_t>(v)] = b1;
            d2[static_cast<size_t>(v)] = b2;
        }
    };
    recompute_nearest();
    auto td = [&]() {
        double t = 0.0;
        for (int v = 0; v < n; ++v) t += d1[static_cast<size_t>(v)];
        return t;
    };
    double cur = td();
    sol.cost_history.push_back(cur);

    // best-swap local search; one candidate pass scores all medoids at once
    std::vector<double> acc(static_cast<size_t>(K), 0.0);
    for (int iter = 0; iter < 10000; ++iter) {
        double best_delta = -1e-12 * std::max(1.0, cur);
        int best_mi = -1, best_c = -1;
        for (int c = 0; c < n; ++c) {
            if (in_fac[static_cast<size_t>(c)]) continue;
            const auto& row = dist[static_cast<size_t>(c)];
            std::fill(acc.begin(), acc.end(), 0.0);
            double base = 0.0;
            for (int v = 0; v < n; ++v) {
                double dvc = row[static_cast<size_t>(v)];
                double a1 = std::min(dvc, d1[static_cast<size_t>(v)]);
                base += a1 - d1[static_cast<size_t>(v)];
                acc[static_cast<size_t>(n1[static_cast<size_t>(v)])] += std::min(dvc, d2[static_cast<size_t>(v)]) - a1;
            }
            for (int mi = 0; mi < K; ++mi) {
                double delta = base + acc[static_cast<size_t>(mi)];
                if (delta < best_delta) {
                    best_delta = delta;
                    best_mi = mi;
                    best_c = c;
                }
            }
        }
        if (best_mi < 0) break;
        in_fac[static_cast<size_t>(fac[static_cast<size_t>(best_mi)])] = 0;
        fac[static_cast<size_t>(best_mi)] = best_c;
        in_fac[static_cast<size_t>(best_c)] = 1;
        recompute_nearest();
        cur = td();
        sol.cost_history.push_back(cur);
    }

    sol.facilities = fac;
    std::sort(sol.facilities.begin(), sol.facilities.end());
    sol.cost = cur;
    return sol;
}

MedoidSolution kmedoids(const WeightedGraph& g, int k, uint64_t seed) {
    std::vector<int> sources(static_cast<size_t>(g.vertex_count));
    for (int v = 0; v < g.vertex_count; ++v) sources[static_cast<size_t>(v)] = v;
    return kmedoids_with_matrix(shortest_path_matrix(g, sources), k, seed);
}

std::vector<int> project_bids(const BiddingFunction& fn, double lambda, double scale,
                              const std::vector<int>& grid_k,
                              const std::vector<double>& grid_costs) {
    if (grid_k.size() != grid_costs.size() || grid_k.empty())
        throw Error(ErrorCode::ParseError, "grid and costs must align");
    std::vector<int> hit;
    double upper = kInf;
    for (size_t gi = 0; gi < grid_k.size(); ++gi) {
        double c = grid_costs[gi];
        bool last = gi + 1 == grid_k.size();
        if (last) {
            hit.push_back(grid_k[gi]);  // k = n always constructed
            break;
        }
        if (c < upper) {
            if (c <= 0.0) {
                hit.push_back(grid_k[gi]);
            } else {
                double t_u = fn.inverse(c / scale);
                long long i_first = static_cast<long long>(std::ceil(t_u - lambda));
                if (static_cast<double>(i_first) + lambda < t_u) ++i_first;
                double bid = fn.value(static_cast<double>(i_first) + lambda) * scale;
                if (bid < upper) hit.push_back(grid_k[gi]);
            }
            upper = c;
        }
    }
    return hit;
}

IncrementalSolution build_incremental(const std::vector<std::vector<double>>& dist,
                                      const std::vector<int>& levels_desc,
                                      const std::map<int, MedoidSolution>& baselines) {
    const int n = static_cast<int>(dist.size());
    IncrementalSolution sol;
    std::vector<int> prev(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) prev[static_cast<size_t>(v)] = v;
    sol.prefix_sets[n] = prev;

    for (int k : levels_desc) {
        if (k >= n) continue;
        auto it = baselines.find(k);
        if (it == baselines.end())
            throw Error(ErrorCode::MissingBaseline,
                        "no baseline for k = " + std::to_string(k));
        std::vector<int> projected;
        projected.reserve(it->second.facilities.size());
        for (int p : it->second.facilities) {
            int best = prev.front();
            double best_d = dist[static_cast<size_t>(p)][static_cast<size_t>(best)];
            for (int q : prev) {
                double d = dist[static_cast<size_t>(p)][static_cast<size_t>(q)];
                if (d < best_d || (d == best_d && q < best)) {
                    best = q;
                    best_d = d;
                }
            }
            projected.push_back(best);
        }
        std::sort(projected.begin(), projected.end());
        projected.erase(std::unique(projected.begin(), projected.end()), projected.end());
        sol.prefix_sets[k] = projected;
        prev = std::move(projected);
    }

    // ratios for every baseline k, filling gaps with the next smaller
    // constructed set; costs accumulate incrementally over the nested sets
    std::vector<double> mind(static_cast<size_t>(n), kInf);
    auto level_it = sol.prefix_sets.begin();
    size_t covered = 0;
    for (const auto& [k, base] : baselines) {
        if (k < sol.prefix_sets.begin()->first) continue;  // below the smallest constructed set
        while (level_it != sol.prefix_sets.end() && level_it->first <= k) {
            for (int f : level_it->second) {
                const auto& row = dist[static_cast<size_t>(f)];
                for (int v = 0; v < n; ++v)
                    mind[static_cast<size_t>(v)] = std::min(mind[static_cast<size_t>(v)], row[static_cast<size_t>(v)]);
            }
            ++level_it;
            ++covered;
        }
        if (covered == 0) continue;
        double cost = 0.0;
        for (int v = 0; v < n; ++v) cost += mind[static_cast<size_t>(v)];
        double ratio = (base.cost <= 0.0 && cost <= 1e-12) ? 1.0 : cost / base.cost;
        sol.ratios[k] = ratio;
    }
    return sol;
}

uint64_t graph_hash(const WeightedGraph& g) {
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    mix(static_cast<uint64_t>(g.vertex_count));
    for (const auto& e : g.edges) {
        mix(static_cast<uint64_t>(e.u));
        mix(static_cast<uint64_t>(e.v));
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(e.w));
        std::memcpy(&bits, &e.w, sizeof(bits));
        mix(bits);
    }
    return h;
}

MedianExperimentResult run_experiment(const WeightedGraph& g, double r, int k_hat,
                                      const std::vector<Algorithm>& algorithms, int trials,
                                      uint64_t seed, int threads, std::vector<int> k_grid,
                                      const std::map<int, MedoidSolution>* precomputed) {
    const int n = g.vertex_count;
    if (k_hat < 1 || k_hat > n)
        throw Error(ErrorCode::ParseError, "k_hat must lie in [1, vertex_count]");
    if (trials < 1) throw Error(ErrorCode::ParseError, "trials must be >= 1");

    // distance matrix, one Dijkstra per vertex
    std::vector<std::vector<double>> dist(static_cast<size_t>(n));
    parallel_for(n, threads, [&](int v) { dist[static_cast<size_t>(v)] = shortest_paths_from(g, v); });

    MedianExperimentResult result;
    if (k_grid.empty()) {
        // geometric coverage of [1, n] plus the prediction point
        const int points = 160;
        std::vector<int> grid;
        for (int i = 0; i < points; ++i) {
            double k = std::exp(std::log(static_cast<double>(n)) * i / (points - 1));
            grid.push_back(std::max(1, std::min(n, static_cast<int>(std::lround(k)))));
        }
        grid.push_back(k_hat);
        grid.push_back(n);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        k_grid = std::move(grid);
    } else {
        std::sort(k_grid.begin(), k_grid.end());
        k_grid.erase(std::unique(k_grid.begin(), k_grid.end()), k_grid.end());
        if (k_grid.front() < 1 || k_grid.back() > n)
            throw Error(ErrorCode::ParseError, "k grid out of range");
        if (k_grid.back() != n) k_grid.push_back(n);
    }
    result.k_grid = k_grid;

    SplitMix64 base(seed);
    std::vector<uint64_t> baseline_seeds(k_grid.size());
    for (size_t i = 0; i < k_grid.size(); ++i)
        baseline_seeds[i] = base.split(0xBA5E0000ULL + static_cast<uint64_t>(k_grid[i])).next();
    std::vector<MedoidSolution> baseline_vec(k_grid.size());
    std::vector<char> have(k_grid.size(), 0);
    if (precomputed) {
        for (size_t i = 0; i < k_grid.size(); ++i) {
            auto it = precomputed->find(k_grid[i]);
            if (it != precomputed->end()) {
                baseline_vec[i] = it->second;
                have[i] = 1;
            }
        }
    }
    parallel_for(static_cast<int>(k_grid.size()), threads, [&](int i) {
        if (have[static_cast<size_t>(i)]) return;
        baseline_vec[static_cast<size_t>(i)] =
            kmedoids_with_matrix(dist, k_grid[static_cast<size_t>(i)], baseline_seeds[static_cast<size_t>(i)]);
    });
    for (size_t i = 0; i < k_grid.size(); ++i)
        result.baselines[k_grid[i]] = std::move(baseline_vec[i]);

    std::vector<double> grid_costs(k_grid.size());
    for (size_t i = 0; i < k_grid.size(); ++i) grid_costs[i] = result.baselines[k_grid[i]].cost;
    auto it_khat = result.baselines.find(k_hat);
    const double scale = it_khat->second.cost;
    if (!(scale > 0.0))
        throw Error(ErrorCode::ParseError, "predicted cost at k_hat vanishes; pick k_hat < n");

    std::vector<BiddingFunction> fns;
    fns.reserve(algorithms.size());
    for (Algorithm a : algorithms) fns.push_back(build_algorithm(a, r));

    // ratios[trial][algo][grid index]; filled in parallel, reduced in order
    const size_t A = algorithms.size(), G = k_grid.size();
    std::vector<double> ratios(static_cast<size_t>(trials) * A * G, 0.0);
    std::vector<uint64_t> trial_seeds(static_cast<size_t>(trials));
    for (int t = 0; t < trials; ++t) trial_seeds[static_cast<size_t>(t)] = base.split(0x7100ULL + static_cast<uint64_t>(t)).next();

    parallel_for(trials, threads, [&](int t) {
        SplitMix64 rng(trial_seeds[static_cast<size_t>(t)]);
        double lambda = rng.next_uniform();  // common across algorithms
        for (size_t ai = 0; ai < A; ++ai) {
            std::vector<int> hit = project_bids(fns[ai], lambda, scale, k_grid, grid_costs);
            std::vector<int> levels_desc(hit.rbegin(), hit.rend());
            IncrementalSolution sol = build_incremental(dist, levels_desc, result.baselines);
            for (size_t gi = 0; gi < G; ++gi) {
                auto itr = sol.ratios.find(k_grid[gi]);
                ratios[(static_cast<size_t>(t) * A + ai) * G + gi] =
                    (itr != sol.ratios.end()) ? itr->second : 1.0;
            }
        }
    });

    for (size_t ai = 0; ai < A; ++ai) {
        for (size_t gi = 0; gi < G; ++gi) {
            double sum = 0.0, sumsq = 0.0;
            for (int t = 0; t < trials; ++t) {
                double v = ratios[(static_cast<size_t>(t) * A + ai) * G + gi];
                sum += v;
                sumsq += v * v;
            }
            double nt = static_cast<double>(trials);
            double mean = sum / nt;
            double var = (trials > 1) ? std::max(0.0, (sumsq - nt * mean * mean) / (nt - 1.0)) : 0.0;
            MedianExperimentRow row;
            row.algorithm = algorithms[ai];
            row.k = k_grid[gi];
            row.mean_ratio = mean;
            row.std_err = std::sqrt(var / nt);
            result.rows.push_back(row);
        }
    }
    return result;
}

void write_median_csv(std::ostream& os, const std::vector<MedianExperimentRow>& rows) {
    os << "algorithm,k,mean_ratio,stderr\n";
    char buf[160];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.12g,%.12g\n", algorithm_name(row.algorithm),
                      row.k, row.mean_ratio, row.std_err);
        os << buf;
    }
}

}  // namespace bidlab
