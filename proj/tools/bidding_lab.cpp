// bidding-lab: command-line front end for the randomized online-bidding
// toolkit. Every subcommand is deterministic given its flags; the parsed
// configuration is logged as JSON next to each output file so runs can be
// reproduced exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bidlab/evaluation.hpp"
#include "bidlab/incremental_median.hpp"
#include "bidlab/lower_bound.hpp"
#include "bidlab/numerics.hpp"
#include "bidlab/pareto_optimal.hpp"
#include "bidlab/strategy_classes.hpp"

namespace {

constexpr const char* kVersion = "bidding-lab 1.0.0";

void write_run_config(const std::string& out_path, const nlohmann::json& config) {
    if (out_path.empty()) return;
    std::ofstream log(out_path + ".runconfig.json");
    log << config.dump(2) << "\n";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw bidlab::Error(bidlab::ErrorCode::IoError, "cannot open " + path);
    return out;
}

std::vector<bidlab::Algorithm> parse_algos(const std::string& csv) {
    std::vector<bidlab::Algorithm> out;
    std::string token;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!token.empty()) out.push_back(bidlab::algorithm_from_name(token));
            token.clear();
        } else {
            token += c;
        }
    }
    if (out.empty()) throw bidlab::Error(bidlab::ErrorCode::ParseError, "no algorithms given");
    return out;
}

// "lo:hi:step" or a comma-separated list
std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo = 0.0, hi = 0.0, step = 0.0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0)
            throw bidlab::Error(bidlab::ErrorCode::ParseError, "bad range spec: " + spec);
        for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
        return out;
    }
    std::string token;
    for (char c : spec + ",") {
        if (c == ',') {
            if (!token.empty()) out.push_back(std::stod(token));
            token.clear();
        } else {
            token += c;
        }
    }
    if (out.empty()) throw bidlab::Error(bidlab::ErrorCode::ParseError, "empty grid: " + spec);
    return out;
}

bidlab::BiddingFunction load_function(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bidlab::Error(bidlab::ErrorCode::IoError, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw bidlab::Error(bidlab::ErrorCode::ParseError, e.what());
    }
    return bidlab::BiddingFunction::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace bidlab;
    CLI::App app{"randomized learning-augmented online bidding toolkit"};
    app.set_version_flag("--version", kVersion);
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    app.add_option("--threads", threads, "worker thread cap");
    app.require_subcommand(1);

    // tradeoff
    auto* tradeoff = app.add_subcommand("tradeoff", "consistency-robustness curves (CSV r,c,source)");
    double tr_rmin = kTwoOverLn2, tr_rmax = 8.0;
    int tr_steps = 20, tr_a = 25, tr_n = 1000;
    std::string tr_out = "tradeoff.csv";
    tradeoff->add_option("--r-min", tr_rmin);
    tradeoff->add_option("--r-max", tr_rmax);
    tradeoff->add_option("--steps", tr_steps);
    tradeoff->add_option("--lb-a", tr_a, "mesh granularity of the certificate");
    tradeoff->add_option("--lb-n", tr_n, "certificate depth");
    tradeoff->add_option("--out", tr_out);

    // pareto
    auto* pareto = app.add_subcommand("pareto", "build the Pareto-optimal bidding function");
    double pa_r = 4.0, pa_tail = 1e-12;
    std::string pa_emit, pa_emit_qk;
    pareto->add_option("--r", pa_r)->required();
    pareto->add_option("--tail-tol", pa_tail);
    pareto->add_option("--emit", pa_emit, "bidding-function JSON path");
    pareto->add_option("--emit-qk", pa_emit_qk, "CSV k,q_k path");

    // mass
    auto* mass = app.add_subcommand("mass", "tabulate B, CR and work (CSV t,B,CR,work)");
    std::string ma_fn, ma_out = "mass.csv";
    double ma_tmin = -5.0, ma_tmax = 5.0, ma_step = 0.125;
    mass->add_option("--function", ma_fn)->required();
    mass->add_option("--t-min", ma_tmin);
    mass->add_option("--t-max", ma_tmax);
    mass->add_option("--step", ma_step);
    mass->add_option("--out", ma_out);

    // sample
    auto* sample = app.add_subcommand("sample", "draw one induced bid sequence");
    std::string sa_fn, sa_algo, sa_out = "sample.json";
    double sa_r = 4.0, sa_threshold = 0.0;
    uint64_t sa_seed = 0;
    sample->add_option("--function", sa_fn);
    sample->add_option("--algo", sa_algo, "A, I or D (with --r)");
    sample->add_option("--r", sa_r);
    sample->add_option("--threshold", sa_threshold)->required();
    sample->add_option("--seed", sa_seed);
    sample->add_option("--out", sa_out);

    // lower-bound
    auto* lower = app.add_subcommand("lower-bound", "dual certificate or certified curve");
    double lb_r = 4.0;
    int lb_a = 50, lb_n = 2000;
    std::string lb_rlist, lb_out = "certificate.json";
    lower->add_option("--r", lb_r);
    lower->add_option("--a", lb_a);
    lower->add_option("--n", lb_n);
    lower->add_option("--r-list", lb_rlist, "emit CSV r,lambda,a,n instead");
    lower->add_option("--out", lb_out);

    // export-lp
    auto* exportlp = app.add_subcommand("export-lp", "write the primal LP in LP text format");
    double xl_r = 4.0;
    int xl_a = 10, xl_n = 200, xl_m = 9;
    std::string xl_out = "primal.lp";
    exportlp->add_option("--r", xl_r);
    exportlp->add_option("--a", xl_a);
    exportlp->add_option("--n", xl_n);
    exportlp->add_option("--m", xl_m);
    exportlp->add_option("--out", xl_out);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "prediction-error sweep (CSV)");
    double si_r = 4.0;
    std::string si_sigma = "0:4:0.1", si_algos = "A,I,D", si_out = "sweep.csv";
    int64_t si_trials = 1000000;
    uint64_t si_seed = 42;
    simulate->add_option("--r", si_r);
    simulate->add_option("--sigma2", si_sigma, "lo:hi:step or comma list");
    simulate->add_option("--trials", si_trials);
    simulate->add_option("--seed", si_seed);
    simulate->add_option("--algos", si_algos);
    simulate->add_option("--out", si_out);

    // median
    auto* median = app.add_subcommand("median", "incremental-median experiment (CSV)");
    std::string me_graph, me_algos = "A,I,D", me_out = "ratios.csv", me_cache;
    double me_r = 4.0;
    int me_khat = 2500, me_trials = 50;
    uint64_t me_seed = 7;
    median->add_option("--graph", me_graph)->required();
    median->add_option("--r", me_r);
    median->add_option("--k-hat", me_khat);
    median->add_option("--algos", me_algos);
    median->add_option("--trials", me_trials);
    median->add_option("--seed", me_seed);
    median->add_option("--out", me_out);
    median->add_option("--baseline-cache", me_cache, "JSON sidecar keyed by (graph hash, k, seed)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*tradeoff) {
            if (!(tr_rmin >= kEulerE - 1e-12 && tr_rmin < tr_rmax) || tr_steps < 1)
                throw Error(ErrorCode::ParseError, "need e <= r-min < r-max and steps >= 1");
            std::vector<TradeoffPoint> points;
            for (int i = 0; i <= tr_steps; ++i) {
                double r = tr_rmin + (tr_rmax - tr_rmin) * i / tr_steps;
                RegimeParams rp = regime_params(r);
                points.push_back({r, rp.small_regime ? rp.r / (2.0 - rp.y) : rp.r - rp.w_hi,
                                  TradeoffSource::AlgorithmA});
                points.push_back({r, class_i_pareto(r).second, TradeoffSource::ClassI});
                points.push_back({r, class_d_for_robustness(r).second, TradeoffSource::ClassD});
                points.push_back(
                    {r, build_dual_certificate(tr_a, tr_n, r).lambda, TradeoffSource::LowerBound});
            }
            auto out = open_out(tr_out);
            write_tradeoff_csv(out, points);
            write_run_config(tr_out, {{"subcommand", "tradeoff"},
                                      {"r_min", tr_rmin},
                                      {"r_max", tr_rmax},
                                      {"steps", tr_steps},
                                      {"lb_a", tr_a},
                                      {"lb_n", tr_n},
                                      {"out", tr_out}});
        } else if (*pareto) {
            PolynomialFamily fam = build_polynomial_family(pa_r, pa_tail);
            BiddingFunction fn = build_algorithm_a(pa_r, pa_tail);
            if (!pa_emit.empty()) {
                auto out = open_out(pa_emit);
                out << fn.to_json().dump(2) << "\n";
                write_run_config(pa_emit, {{"subcommand", "pareto"},
                                           {"r", pa_r},
                                           {"tail_tol", pa_tail},
                                           {"emit", pa_emit}});
            }
            if (!pa_emit_qk.empty()) {
                auto out = open_out(pa_emit_qk);
                out << "k,q_k\n";
                char buf[64];
                for (int k = 0; k <= fam.k_max; ++k) {
                    std::snprintf(buf, sizeof(buf), "%d,%.12g\n", k, fam.q[static_cast<size_t>(k)]);
                    out << buf;
                }
                write_run_config(pa_emit_qk, {{"subcommand", "pareto"},
                                              {"r", pa_r},
                                              {"tail_tol", pa_tail},
                                              {"emit_qk", pa_emit_qk}});
            }
            ConsRobResult cr = fn.consistency_robustness();
            std::printf("r=%.12g cons=%.12g rob=%.12g segments=%zu\n", pa_r, cr.cons, cr.rob,
                        fn.segments().size());
        } else if (*mass) {
            BiddingFunction fn = load_function(ma_fn);
            auto out = open_out(ma_out);
            out << "t,B,CR,work\n";
            char buf[160];
            for (double t = ma_tmin; t <= ma_tmax + 1e-12; t += ma_step) {
                std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", t, fn.value(t),
                              fn.normalized_mass(t), fn.work(t));
                out << buf;
            }
            write_run_config(ma_out, {{"subcommand", "mass"},
                                      {"function", ma_fn},
                                      {"t_min", ma_tmin},
                                      {"t_max", ma_tmax},
                                      {"step", ma_step},
                                      {"out", ma_out}});
        } else if (*sample) {
            BiddingFunction fn = sa_fn.empty()
                                     ? build_algorithm(algorithm_from_name(sa_algo), sa_r)
                                     : load_function(sa_fn);
            auto [s, cost] = fn.sample_sequence(sa_seed, sa_threshold);
            nlohmann::json j{{"lambda", s.lambda}, {"i_min", s.i_min},   {"i_max", s.i_max},
                             {"bids", s.bids},     {"cost", cost},       {"threshold", sa_threshold},
                             {"nc", cost / sa_threshold}};
            auto out = open_out(sa_out);
            out << j.dump(2) << "\n";
            write_run_config(sa_out, {{"subcommand", "sample"},
                                      {"function", sa_fn},
                                      {"algo", sa_algo},
                                      {"r", sa_r},
                                      {"threshold", sa_threshold},
                                      {"seed", sa_seed},
                                      {"out", sa_out}});
        } else if (*lower) {
            if (lb_rlist.empty()) {
                DualCertificate cert = build_dual_certificate(lb_a, lb_n, lb_r);
                auto out = open_out(lb_out);
                out << certificate_to_json(cert).dump(2) << "\n";
                std::printf("lambda=%.12g max_violation=%.3g\n", cert.lambda,
                            cert.max_violation);
            } else {
                std::vector<double> rs = parse_grid(lb_rlist);
                auto points = lower_bound_curve(rs, lb_a, lb_n);
                auto out = open_out(lb_out);
                out << "r,lambda,a,n\n";
                char buf[120];
                for (const auto& p : points) {
                    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d,%d\n", p.r, p.c, lb_a, lb_n);
                    out << buf;
                }
            }
            write_run_config(lb_out, {{"subcommand", "lower-bound"},
                                      {"r", lb_r},
                                      {"a", lb_a},
                                      {"n", lb_n},
                                      {"r_list", lb_rlist},
                                      {"out", lb_out}});
        } else if (*exportlp) {
            PrimalLP lp = build_primal(xl_r, xl_a, xl_n, xl_m);
            export_lp_text(lp, xl_out);
            write_run_config(xl_out, {{"subcommand", "export-lp"},
                                      {"r", xl_r},
                                      {"a", xl_a},
                                      {"n", xl_n},
                                      {"m", xl_m},
                                      {"out", xl_out}});
        } else if (*simulate) {
            std::vector<double> grid = parse_grid(si_sigma);
            std::vector<Algorithm> algos = parse_algos(si_algos);
            std::vector<EvalResult> rows = sweep_sigma(algos, si_r, grid, si_trials, si_seed,
                                                       threads);
            auto out = open_out(si_out);
            write_sweep_csv(out, si_r, rows);
            write_run_config(si_out, {{"subcommand", "simulate"},
                                      {"r", si_r},
                                      {"sigma2", si_sigma},
                                      {"trials", si_trials},
                                      {"seed", si_seed},
                                      {"algos", si_algos},
                                      {"threads", threads},
                                      {"out", si_out}});
        } else if (*median) {
            WeightedGraph g = load_graph(me_graph);
            uint64_t ghash = graph_hash(g);
            std::map<int, MedoidSolution> cached;
            if (!me_cache.empty() && std::filesystem::exists(me_cache)) {
                std::ifstream in(me_cache);
                nlohmann::json j;
                in >> j;
                if (j.value("graph_hash", std::string()) == std::to_string(ghash) &&
                    j.value("seed", uint64_t{0}) == me_seed) {
                    for (const auto& b : j["baselines"]) {
                        MedoidSolution sol;
                        sol.k = b.at("k").get<int>();
                        sol.facilities = b.at("facilities").get<std::vector<int>>();
                        sol.cost = b.at("cost").get<double>();
                        cached[sol.k] = std::move(sol);
                    }
                }
            }
            MedianExperimentResult res =
                run_experiment(g, me_r, me_khat, parse_algos(me_algos), me_trials, me_seed,
                               threads, {}, cached.empty() ? nullptr : &cached);
            auto out = open_out(me_out);
            write_median_csv(out, res.rows);
            if (!me_cache.empty()) {
                nlohmann::json jb = nlohmann::json::array();
                for (const auto& [k, sol] : res.baselines) {
                    jb.push_back({{"k", k}, {"facilities", sol.facilities}, {"cost", sol.cost}});
                }
                auto cache_out = open_out(me_cache);
                cache_out << nlohmann::json{{"graph_hash", std::to_string(ghash)},
                                            {"seed", me_seed},
                                            {"baselines", jb}}
                                 .dump(2)
                          << "\n";
            }
            write_run_config(me_out, {{"subcommand", "median"},
                                      {"graph", me_graph},
                                      {"r", me_r},
                                      {"k_hat", me_khat},
                                      {"algos", me_algos},
                                      {"trials", me_trials},
                                      {"seed", me_seed},
                                      {"threads", threads},
                                      {"out", me_out}});
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: INTERNAL: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
