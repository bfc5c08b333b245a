#include "bidlab/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "bidlab/numerics.hpp"

namespace bidlab {

std::string PrimalLP::var_name(int idx) const {
    if (idx == c_index()) return "C";
    int k = idx - n;
    if (k < 0) return "x_m" + std::to_string(-k);
    return "x_" + std::to_string(k);
}

PrimalLP build_primal(double r, int a, int n, int m) {
    if (a < 1 || n < 1 || m < 0)
        throw Error(ErrorCode::ParseError, "build_primal needs a >= 1, n >= 1, m >= 0");
    if (r < kEulerE - 1e-9)
        throw Error(ErrorCode::RobustnessBelowE, "primal LP needs r >= e");
    PrimalLP lp;
    lp.a = a;
    lp.n = n;
    lp.m = m;
    lp.r = r;
    const double inv_a = 1.0 / a;

    PrimalLP::Row lam;
    lam.name = "lam";
    lam.coeffs = {{lp.var_index(0), 1.0}};
    lam.rel = '>';
    lam.rhs = 1.0;
    lp.rows.push_back(std::move(lam));

    for (int k = -n; k <= m - 1; ++k) {
        PrimalLP::Row row;
        row.name = (k < 0 ? "gam_m" + std::to_string(-k) : "gam_" + std::to_string(k));
        row.coeffs = {{lp.var_index(k), 1.0}, {lp.var_index(k + 1), -1.0}};
        row.rel = '<';
        row.rhs = 0.0;
        lp.rows.push_back(std::move(row));
    }

    for (int k = -n; k <= m; ++k) {
        PrimalLP::Row row;
        row.name = (k < 0 ? "bet_m" + std::to_string(-k) : "bet_" + std::to_string(k));
        int j_hi = std::min(m, k + a - 1);
        for (int j = -n; j <= j_hi; ++j) {
            double c = inv_a;
            if (j == k) c -= r;
            row.coeffs.emplace_back(lp.var_index(j), c);
        }
        if (k > j_hi) row.coeffs.emplace_back(lp.var_index(k), -r);
        row.rel = '<';
        row.rhs = 0.0;
        lp.rows.push_back(std::move(row));
    }

    PrimalLP::Row theta;
    theta.name = "theta";
    for (int j = -n; j <= std::min(m, a - 1); ++j) theta.coeffs.emplace_back(lp.var_index(j), inv_a);
    theta.coeffs.emplace_back(lp.c_index(), -1.0);
    theta.rel = '<';
    theta.rhs = 0.0;
    lp.rows.push_back(std::move(theta));
    return lp;
}

void export_lp_text(const PrimalLP& lp, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "\\ discretized robust-bidding LP: a=" << lp.a << " N=" << lp.n << " M=" << lp.m
        << " R=" << num(lp.r) << "\n";
    out << "Minimize\n obj: C\nSubject To\n";
    for (const auto& row : lp.rows) {
        out << " " << row.name << ":";
        bool first = true;
        for (const auto& [idx, c] : row.coeffs) {
            if (first) {
                out << " " << (c < 0 ? "- " : "") << num(std::fabs(c));
                first = false;
            } else {
                out << (c < 0 ? " - " : " + ") << num(std::fabs(c));
            }
            out << " " << lp.var_name(idx);
        }
        out << (row.rel == '<' ? " <= " : " >= ") << num(row.rhs) << "\n";
    }
    out << "Bounds\n";
    for (int idx = 0; idx < lp.num_vars(); ++idx) out << " " << lp.var_name(idx) << " >= 0\n";
    out << "End\n";
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

double rho_root(int a, double r) {
    if (a < 1) throw Error(ErrorCode::ParseError, "rho_root needs a >= 1");
    if (r < kEulerE - 1e-9) throw Error(ErrorCode::RobustnessBelowE, "rho_root needs r >= e");
    double da = static_cast<double>(a);
    // f(1) = 1 > 0 and f(1 + 1/a) = (1+1/a)^a - r <= e - r < 0.
    auto f = [da, r](double x) { return std::pow(x, da) - da * r * (x - 1.0); };
    return find_root_bracketed(f, 1.0, 1.0 + 1.0 / da, SolverConfig{1e-15, 1e-15, 200});
}

std::vector<double> fixed_point_b(int a, int n_cap, double r, double tol, long long sweep_cap) {
    if (n_cap < 1) throw Error(ErrorCode::ParseError, "fixed_point_b needs n_cap >= 1");
    const double inv_ar = 1.0 / (static_cast<double>(a) * r);
    std::vector<double> b(static_cast<size_t>(n_cap), 0.0);
    std::vector<double> prefix(static_cast<size_t>(n_cap) + 1, 0.0);
    std::vector<double> nb(static_cast<size_t>(n_cap), 0.0);
    for (long long sweep = 0; sweep < sweep_cap; ++sweep) {
        for (int i = 0; i < n_cap; ++i) prefix[static_cast<size_t>(i) + 1] = prefix[static_cast<size_t>(i)] + b[static_cast<size_t>(i)];
        bool done = true;
        for (int idx = 1; idx <= n_cap; ++idx) {
            int hi = std::min(n_cap, idx + a - 1);
            double v = (1.0 + prefix[static_cast<size_t>(hi)]) * inv_ar;
            if (v > 1e300)
                throw Error(ErrorCode::NumericOverflow, "fixed-point iterates overflowed");
            double& cur = nb[static_cast<size_t>(idx - 1)];
            cur = v;
            if (v - b[static_cast<size_t>(idx - 1)] > tol * std::max(1.0, v)) done = false;
        }
        b.swap(nb);
        if (done) return b;
    }
    throw Error(ErrorCode::NonConvergence, "fixed-point iteration hit the sweep cap");
}

namespace {

double dual_row_lhs_rhs(const DualCertificate& cert, int k, const std::vector<double>& beta_prefix,
                        double* lhs_out) {
    const double inv_a = 1.0 / cert.a;
    // sum_{j = max(k+1-a, -n)}^{m} beta_j ; beta vanishes for j >= 0,
    // so the sum collapses to b_1..b_{min(n, a-1-k)}.
    int cnt = std::min(cert.n, std::max(0, cert.a - 1 - k));
    double s = beta_prefix[static_cast<size_t>(cnt)];
    double lhs = (k <= cert.a - 1 ? inv_a : 0.0) + inv_a * s + cert.gamma_at(k) -
                 cert.gamma_at(k - 1);
    double rhs = (k == 0 ? cert.lambda : 0.0) + cert.r * cert.beta_at(k);
    if (lhs_out) *lhs_out = lhs;
    return rhs;
}

std::vector<double> beta_prefix_sums(const DualCertificate& cert) {
    // prefix[t] = b_1 + ... + b_t with b_j = beta_{-j}
    std::vector<double> prefix(static_cast<size_t>(cert.n) + 1, 0.0);
    for (int j = 1; j <= cert.n; ++j)
        prefix[static_cast<size_t>(j)] = prefix[static_cast<size_t>(j - 1)] + cert.beta_at(-j);
    return prefix;
}

}  // namespace

double dual_row_residual(const DualCertificate& cert, int k) {
    auto prefix = beta_prefix_sums(cert);
    double lhs = 0.0;
    double rhs = dual_row_lhs_rhs(cert, k, prefix, &lhs);
    double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
    return (lhs - rhs) / scale;
}

double dual_max_violation(const DualCertificate& cert) {
    auto prefix = beta_prefix_sums(cert);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = -cert.n; k <= cert.m; ++k) {
        double lhs = 0.0;
        double rhs = dual_row_lhs_rhs(cert, k, prefix, &lhs);
        double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        worst = std::max(worst, (rhs - lhs) / scale);
    }
    return worst;
}

DualCertificate build_dual_certificate(int a, int n, double r, double tol) {
    if (a < 1 || n < 1)
        throw Error(ErrorCode::ParseError, "build_dual_certificate needs a, n >= 1");
    DualCertificate cert;
    cert.a = a;
    cert.n = n;
    cert.m = a - 1;  // the analytic construction fixes M = a-1
    cert.r = r;

    std::vector<double> b = fixed_point_b(a, n, r, tol);

    cert.beta.assign(static_cast<size_t>(n + cert.m + 1), 0.0);
    for (int j = 1; j <= n; ++j) cert.beta[static_cast<size_t>(n - j)] = b[static_cast<size_t>(j - 1)];

    cert.gamma.assign(static_cast<size_t>(n + cert.m + 2), 0.0);
    // prefix[t] = b_1 + ... + b_t
    std::vector<double> prefix(static_cast<size_t>(a), 0.0);
    for (int t = 1; t <= a - 1; ++t)
        prefix[static_cast<size_t>(t)] =
            prefix[static_cast<size_t>(t - 1)] + (t <= n ? b[static_cast<size_t>(t - 1)] : 0.0);
    // gamma_i = (1/a) * sum_{mm=i+1}^{a-1} (1 + sum_{j=1}^{a-1-mm} b_j), 0 <= i <= a-2
    double suffix = 0.0;
    for (int i = a - 2; i >= 0; --i) {
        suffix += 1.0 + prefix[static_cast<size_t>(a - 1 - (i + 1))];
        cert.gamma[static_cast<size_t>(i + n + 1)] = suffix / a;
    }

    double lam = 1.0;
    for (int mm = 1; mm <= std::min(a - 1, n); ++mm)
        lam += (static_cast<double>(a - mm) / a) * b[static_cast<size_t>(mm - 1)];
    cert.lambda = lam;

    cert.max_violation = dual_max_violation(cert);
    if (cert.max_violation > 1e-9)
        throw Error(ErrorCode::FeasibilityViolation,
                    "dual certificate violated a constraint beyond tolerance");
    return cert;
}

std::vector<TradeoffPoint> lower_bound_curve(const std::vector<double>& r_list, int a, int n) {
    std::vector<TradeoffPoint> out;
    out.reserve(r_list.size());
    for (double r : r_list) {
        DualCertificate cert = build_dual_certificate(a, n, r);
        out.push_back({r, cert.lambda, TradeoffSource::LowerBound});
    }
    return out;
}

nlohmann::json certificate_to_json(const DualCertificate& cert) {
    return nlohmann::json{{"a", cert.a},         {"n", cert.n},
                          {"r", cert.r},         {"lambda", cert.lambda},
                          {"beta", cert.beta},   {"gamma", cert.gamma},
                          {"max_violation", cert.max_violation}};
}

std::vector<double> discretize_bidding_function(const BiddingFunction& fn, int a, int n, int m) {
    std::vector<double> x(static_cast<size_t>(n + m + 1), 0.0);
    for (int k = -n; k <= m; ++k) {
        double lo = static_cast<double>(k) / a;
        double hi = static_cast<double>(k + 1) / a;
        x[static_cast<size_t>(k + n)] = a * (fn.cumulative_mass(hi) - fn.cumulative_mass(lo));
    }
    double x0 = x[static_cast<size_t>(n)];
    for (double& v : x) v /= x0;
    return x;
}

std::pair<double, double> primal_feasibility(const PrimalLP& lp, const std::vector<double>& x) {
    // C is set to the tightest value allowed by the theta row.
    double c_val = 0.0;
    for (int j = -lp.n; j <= std::min(lp.m, lp.a - 1); ++j)
        c_val += x[static_cast<size_t>(lp.var_index(j))] / lp.a;

    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& row : lp.rows) {
        double lhs = 0.0;
        for (const auto& [idx, c] : row.coeffs)
            lhs += c * (idx == lp.c_index() ? c_val : x[static_cast<size_t>(idx)]);
        double slack = (row.rel == '<') ? row.rhs - lhs : lhs - row.rhs;
        min_slack = std::min(min_slack, slack);
    }
    for (double v : x) min_slack = std::min(min_slack, v);
    return {min_slack, c_val};
}

}  // namespace bidlab
