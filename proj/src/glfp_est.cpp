#include "lsebu/glfp_est.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "lsebu/simplex.hpp"

namespace lsebu {

namespace {

// Constraints of the fixed-v feasibility system:
//   +-(l_i'x - y_i) - v * (zeta . s . x) <= v      for every row i
//   -s_j x_j <= 0                                  for every state j
// The denominator zeta' D_s x + 1 is automatically >= 1 on the cone
// D_s x >= 0 with zeta in {0,1}, so no explicit positivity row is needed.
void build_feasibility_lp(const GlfpProblem& problem, const std::vector<int>& s, double v,
                          Matrix& a, Vector& b) {
    const std::size_t n = problem.p.rows(), d = problem.dim();
    a = Matrix(2 * n + d, d);
    b.assign(2 * n + d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double denom_term = v * problem.zeta[j] * s[j];
            a(2 * i, j) = problem.p(i, j) - denom_term;
            a(2 * i + 1, j) = -problem.p(i, j) - denom_term;
        }
        b[2 * i] = v + problem.y[i];
        b[2 * i + 1] = v - problem.y[i];
    }
    for (std::size_t j = 0; j < d; ++j) {
        a(2 * n + j, j) = -static_cast<double>(s[j]);
        b[2 * n + j] = 0.0;
    }
}

std::optional<Vector> feasible_at(const GlfpProblem& problem, const std::vector<int>& s, double v) {
    Matrix a;
    Vector b;
    build_feasibility_lp(problem, s, v, a, b);
    return lp_feasible_point(a, b);
}

std::vector<int> gray_signs(std::size_t code, std::size_t d) {
    const std::size_t gray = code ^ (code >> 1);
    std::vector<int> s(d, 1);
    for (std::size_t j = 0; j < d; ++j)
        if (gray & (std::size_t{1} << j)) s[j] = -1;
    return s;
}

}  // namespace

GlfpProblem make_glfp_problem(const Matrix& p, std::span<const double> y) {
    if (p.rows() != y.size()) throw UsageError("glfp: dimension mismatch");
    GlfpProblem problem;
    problem.p = p;
    problem.y.assign(y.begin(), y.end());
    problem.zeta.assign(p.cols(), 1);
    return problem;
}

SignedSubproblem solve_signed(const GlfpProblem& problem, const std::vector<int>& s, double v_lo,
                              double v_hi, double tol) {
    if (s.size() != problem.dim()) throw UsageError("glfp: sign vector length mismatch");
    if (!(v_lo < v_hi)) throw UsageError("glfp: need v_lo < v_hi");
    if (!(tol > 0.0)) throw UsageError("glfp: tol must be positive");

    SignedSubproblem sub;
    sub.s = s;

    auto hi_witness = feasible_at(problem, s, v_hi);
    if (!hi_witness) return sub;  // v_s = +inf

    // Already feasible at the lower end: cannot do better in this orthant.
    if (auto lo_witness = feasible_at(problem, s, v_lo)) {
        sub.v_s = v_lo;
        sub.x_s = std::move(*lo_witness);
        return sub;
    }

    double lo = v_lo, hi = v_hi;
    Vector witness = std::move(*hi_witness);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (auto w = feasible_at(problem, s, mid)) {
            hi = mid;
            witness = std::move(*w);
        } else {
            lo = mid;
        }
    }
    sub.v_s = hi;
    sub.x_s = std::move(witness);
    return sub;
}

GlfpSolution solve_glfp(const GlfpProblem& problem, const GlfpOptions& opt) {
    const std::size_t d = problem.dim();
    if (d == 0 || problem.p.rows() == 0) throw UsageError("glfp: empty problem");
    if (d > opt.max_dim)
        throw ValidationError("glfp enumeration guard: state dimension " + std::to_string(d) +
                              " exceeds limit " + std::to_string(opt.max_dim));
    const auto t0 = std::chrono::steady_clock::now();

    const std::size_t total = std::size_t{1} << d;

    // Seed the incumbent from the first orthant that admits a finite value,
    // growing its upper bracket geometrically.
    double incumbent = std::numeric_limits<double>::infinity();
    Vector best_x;
    std::vector<int> best_s;
    std::size_t evaluated = 0, pruned = 0;
    std::size_t start = 0;
    for (; start < total; ++start) {
        const std::vector<int> s = gray_signs(start, d);
        double v_hi = 1.0;
        bool found = false;
        while (v_hi <= 1e6) {
            if (feasible_at(problem, s, v_hi)) {
                found = true;
                break;
            }
            v_hi *= 4.0;
        }
        ++evaluated;
        if (!found) continue;
        SignedSubproblem sub = solve_signed(problem, s, 0.0, v_hi, opt.tol);
        if (sub.feasible()) {
            incumbent = sub.v_s;
            best_x = sub.x_s;
            best_s = sub.s;
            ++start;
            break;
        }
    }
    if (!std::isfinite(incumbent))
        throw NumericError("glfp: every sign vector is infeasible (degenerate input)");

    std::mutex mtx;
    std::atomic<std::size_t> next{start};
    // Shared monotone bound; stale reads only cost pruning efficiency.
    std::atomic<double> shared_incumbent{incumbent};

    auto worker = [&] {
        for (;;) {
            const std::size_t code = next.fetch_add(1);
            if (code >= total) return;
            const std::vector<int> s = gray_signs(code, d);
            const double cut = shared_incumbent.load();
            // Nothing can land below zero, and feasibility exactly at the
            // incumbent decides whether this orthant can improve on it.
            if (cut <= opt.tol || !feasible_at(problem, s, cut)) {
                std::lock_guard<std::mutex> lock(mtx);
                ++pruned;
                continue;
            }
            SignedSubproblem sub = solve_signed(problem, s, 0.0, cut, opt.tol);
            std::lock_guard<std::mutex> lock(mtx);
            ++evaluated;
            if (sub.feasible() && sub.v_s < incumbent) {
                incumbent = sub.v_s;
                best_x = sub.x_s;
                best_s = sub.s;
                double cur = shared_incumbent.load();
                while (sub.v_s < cur && !shared_incumbent.compare_exchange_weak(cur, sub.v_s)) {
                }
            }
        }
    };

    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    GlfpSolution sol;
    sol.xi_hat = incumbent;
    sol.x_star = best_x;
    sol.s_star = best_s;
    sol.evaluated_signs = evaluated;
    sol.pruned_signs = pruned;
    sol.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
}

std::string glfp_solution_json(const GlfpSolution& sol) {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "{\"xi_hat\": " << num(sol.xi_hat) << ", \"x_star\": [";
    for (std::size_t i = 0; i < sol.x_star.size(); ++i) {
        if (i) out << ", ";
        out << num(sol.x_star[i]);
    }
    out << "], \"evaluated_signs\": " << sol.evaluated_signs
        << ", \"pruned_signs\": " << sol.pruned_signs
        << ", \"runtime_seconds\": " << num(sol.runtime_seconds) << "}";
    return out.str();
}

}  // namespace lsebu
