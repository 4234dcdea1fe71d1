// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Runs entirely on the bundled data with pinned seeds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lsebu/bench.hpp"
#include "lsebu/caseio.hpp"
#include "lsebu/glfp_est.hpp"
#include "lsebu/rng.hpp"

using namespace lsebu;

namespace {

int g_failed = 0;

std::string data_path(const char* name) { return std::string(LSEBU_DATA_DIR) + "/" + name; }

class Criterion {
public:
    Criterion(int number, std::string title, double budget_seconds = 0.0)
        : number_(number),
          title_(std::move(title)),
          budget_(budget_seconds),
          start_(std::chrono::steady_clock::now()) {}

    void check(bool ok, const std::string& detail) {
        if (!ok) {
            failures_.push_back(detail);
        }
    }

    void note(const std::string& text) { notes_.push_back(text); }

    ~Criterion() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (budget_ > 0.0 && secs > budget_)
            failures_.push_back("runtime " + std::to_string(secs) + "s over the " +
                                std::to_string(budget_) + "s budget");
        if (failures_.empty()) {
            std::printf("[PASS] criterion %d: %s (%.2f s)\n", number_, title_.c_str(), secs);
        } else {
            ++g_failed;
            std::printf("[FAIL] criterion %d: %s (%.2f s)\n", number_, title_.c_str(), secs);
            for (const std::string& f : failures_) std::printf("       - %s\n", f.c_str());
        }
        for (const std::string& n : notes_) std::printf("       note: %s\n", n.c_str());
        std::fflush(stdout);
    }

private:
    int number_;
    std::string title_;
    double budget_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

struct LoadedCase {
    NetworkCase net;
    PmuPlacement placement;
};

LoadedCase load(const char* case_file, const char* placement_file) {
    LoadedCase lc;
    lc.net = load_case_file(data_path(case_file));
    lc.placement = placement_file ? load_placement_file(data_path(placement_file))
                                  : all_bus_placement(lc.net);
    return lc;
}

const TrialResult* find_result(const TrialRecord& rec, Method m) {
    for (const auto& [mm, r] : rec.results)
        if (mm == m) return &r;
    return nullptr;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// --- criterion bodies -------------------------------------------------------

void criterion_1() {
    Criterion c(1, "zero-uncertainty oracle (dev 0, tve 0)", 1.0);
    for (const auto& [case_file, placement_file] :
         std::vector<std::pair<const char*, const char*>>{
             {"case5.m", nullptr}, {"case14.m", "placements/p14.txt"},
             {"case30.m", "placements/p30.txt"}}) {
        const LoadedCase lc = load(case_file, placement_file);
        ExperimentConfig cfg;
        cfg.max_rel_dev = 0.0;
        cfg.tve_bound = 0.0;
        cfg.seed = 5;
        cfg.trials = 1;
        const ExperimentReport rep = run_experiment(lc.net, lc.placement, cfg);
        const TrialResult* interval = find_result(rep.trials[0], Method::Interval);
        const TrialResult* convex = find_result(rep.trials[0], Method::Convex);
        c.check(interval && interval->ok, std::string(case_file) + ": interval failed");
        c.check(convex && convex->ok, std::string(case_file) + ": convex failed");
        if (convex && convex->ok)
            c.check(*convex->rmse_pu <= 1e-8,
                    std::string(case_file) + ": convex rmse " + fmt(*convex->rmse_pu) + " > 1e-8");
        if (interval && interval->ok) {
            c.check(*interval->mean_bound_width <= 1e-8,
                    std::string(case_file) + ": width " + fmt(*interval->mean_bound_width) +
                        " > 1e-8");
            c.check(*interval->containment_rate == 1.0,
                    std::string(case_file) + ": containment " + fmt(*interval->containment_rate) +
                        " < 1");
        }
    }
}

void criterion_2() {
    Criterion c(2, "interval containment on case5, 50 trials at +-30% / 1% TVE", 30.0);
    const LoadedCase lc = load("case5.m", nullptr);
    ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.trials = 50;
    cfg.methods = {Method::Interval};
    const ExperimentReport rep = run_experiment(lc.net, lc.placement, cfg);

    int perfect = 0, failed = 0;
    double partial_sum = 0.0;
    int partial_count = 0;
    for (const TrialRecord& rec : rep.trials) {
        const TrialResult* r = find_result(rec, Method::Interval);
        if (!r || !r->ok) {
            ++failed;
            continue;
        }
        if (*r->containment_rate == 1.0) {
            ++perfect;
        } else {
            partial_sum += *r->containment_rate;
            ++partial_count;
        }
    }
    c.check(failed == 0, std::to_string(failed) + " trials failed outright");
    c.check(perfect >= 45, "containment 1.0 in only " + std::to_string(perfect) + "/50 trials");
    if (partial_count > 0)
        c.check(partial_sum / partial_count >= 0.95,
                "mean containment of imperfect trials " + fmt(partial_sum / partial_count) +
                    " < 0.95");
    c.note("perfect containment in " + std::to_string(perfect) + "/50 trials");
}

struct BenchOutcome {
    std::string name;
    ExperimentReport report;
};

std::vector<BenchOutcome> run_table_benches() {
    std::vector<BenchOutcome> out;
    for (const auto& [case_file, placement_file] :
         std::vector<std::pair<const char*, const char*>>{
             {"case14.m", "placements/p14.txt"},
             {"case30.m", "placements/p30.txt"},
             {"case57.m", "placements/p57.txt"},
             {"case118.m", "placements/p118.txt"}}) {
        const LoadedCase lc = load(case_file, placement_file);
        ExperimentConfig cfg;
        cfg.seed = 1;
        cfg.trials = 10;
        const ExperimentReport rep = run_experiment(lc.net, lc.placement, cfg);
        out.push_back({case_file, rep});
    }
    return out;
}

void criterion_3_and_4(const std::vector<BenchOutcome>& benches, double bench_seconds) {
    {
        Criterion c(3, "convex RMSE medians inside the order-of-magnitude brackets");
        c.check(bench_seconds < 120.0,
                "bench runs took " + std::to_string(bench_seconds) + "s, budget 120s");
        for (const BenchOutcome& b : benches) {
            const bool small = b.name == "case14.m" || b.name == "case30.m";
            const double lo = small ? 5e-4 : 2e-3;
            const double hi = small ? 5e-2 : 2e-1;
            double median = -1.0;
            for (const auto& [m, s] : b.report.summary)
                if (m == Method::Convex && s.rmse_median) median = *s.rmse_median;
            c.check(median >= lo && median <= hi,
                    b.name + ": median rmse " + fmt(median) + " outside [" + fmt(lo) + ", " +
                        fmt(hi) + "]");
            c.note(b.name + " median rmse " + fmt(median));
        }
    }
    {
        Criterion c(4, "interval runs faster than convex in every trial");
        for (const BenchOutcome& b : benches) {
            for (const TrialRecord& rec : b.report.trials) {
                const TrialResult* iv = find_result(rec, Method::Interval);
                const TrialResult* cx = find_result(rec, Method::Convex);
                const bool ok = iv && cx && iv->ok && cx->ok && iv->runtime_s < cx->runtime_s;
                if (!ok)
                    c.check(false, b.name + " trial " + std::to_string(rec.trial) + ": interval " +
                                       fmt(iv && iv->ok ? iv->runtime_s : -1.0) + "s vs convex " +
                                       fmt(cx && cx->ok ? cx->runtime_s : -1.0) + "s");
            }
        }
    }
}

void criterion_5(const std::vector<BenchOutcome>& benches) {
    Criterion c(5, "secular-equation residual within 1e-8 everywhere", 10.0);
    Rng rng(1234);
    int checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t rows = 10 + rep % 21, cols = 3 + rep % 8;
        Matrix p(rows, cols);
        for (double& v : p.data()) v = rng.normal();
        Vector y(rows);
        for (double& v : y) v = rng.normal();
        BduConfig cfg;
        cfg.chi_p = 0.02 + 0.3 * rng.uniform();
        const BduSolution sol = solve_bdu(p, y, cfg);
        const double lhs = std::abs(sol.theta * norm2_vec(sol.x_hat) - cfg.chi_p * sol.residual_norm);
        if (lhs > 1e-8 * (1.0 + sol.residual_norm))
            c.check(false, "random instance " + std::to_string(rep) + ": residual " + fmt(lhs));
        ++checked;
    }
    for (const BenchOutcome& b : benches) {
        for (const TrialRecord& rec : b.report.trials) {
            const TrialResult* cx = find_result(rec, Method::Convex);
            if (!cx || !cx->ok) continue;
            ++checked;
            if (*cx->secular_residual > 1e-8 * (1.0 + *cx->residual_norm))
                c.check(false, b.name + " trial " + std::to_string(rec.trial) + ": residual " +
                                   fmt(*cx->secular_residual));
        }
    }
    c.note(std::to_string(checked) + " solves checked");
}

double glfp_ratio_objective(const GlfpProblem& problem, const Vector& x) {
    double denom = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (problem.zeta[j]) denom += std::abs(x[j]);
    double worst = 0.0;
    for (std::size_t i = 0; i < problem.p.rows(); ++i) {
        double lx = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) lx += problem.p(i, j) * x[j];
        worst = std::max(worst, std::abs(lx - problem.y[i]) / denom);
    }
    return worst;
}

// Brute-force 2-D minimization: coarse grid, then refinement around each
// quadrant's best cell (the objective is fractional per orthant, so local
// refinement must not cross sign boundaries blindly).
double glfp_grid_min(const GlfpProblem& problem, double radius) {
    Vector x(2);
    const int n = 400;
    double best_v[4] = {1e300, 1e300, 1e300, 1e300};
    double best_x[4] = {0, 0, 0, 0}, best_y[4] = {0, 0, 0, 0};
    for (int a = 0; a <= n; ++a) {
        x[0] = -radius + 2.0 * radius * a / n;
        for (int b = 0; b <= n; ++b) {
            x[1] = -radius + 2.0 * radius * b / n;
            const double v = glfp_ratio_objective(problem, x);
            const int q = (x[0] >= 0 ? 1 : 0) + (x[1] >= 0 ? 2 : 0);
            if (v < best_v[q]) {
                best_v[q] = v;
                best_x[q] = x[0];
                best_y[q] = x[1];
            }
        }
    }
    double best = 1e300;
    for (int q = 0; q < 4; ++q) {
        if (best_v[q] >= 1e300) continue;
        double h = 2.0 * radius / n, bx = best_x[q], by = best_y[q], local = best_v[q];
        for (int level = 0; level < 3; ++level) {
            const double cx = bx, cy = by;
            for (int a = -40; a <= 40; ++a) {
                x[0] = cx + h * a / 20.0;
                for (int b = -40; b <= 40; ++b) {
                    x[1] = cy + h * b / 20.0;
                    const double v = glfp_ratio_objective(problem, x);
                    if (v < local) {
                        local = v;
                        bx = x[0];
                        by = x[1];
                    }
                }
            }
            h /= 20.0;
        }
        best = std::min(best, local);
    }
    return best;
}

void criterion_6() {
    Criterion c(6, "GLFP matches the 2-D grid oracle and recovers consistent data", 60.0);
    Rng rng(77);
    for (int rep = 0; rep < 25; ++rep) {
        Matrix p(4 + rep % 3, 2);
        for (double& v : p.data()) v = rng.normal();
        Vector x0{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
        Vector y = matvec(p, x0);
        for (double& v : y) v += 0.1 * (2.0 * rng.uniform() - 1.0);
        const GlfpProblem problem = make_glfp_problem(p, y);
        const GlfpSolution sol = solve_glfp(problem);
        const double oracle = glfp_grid_min(problem, 4.0);
        if (std::abs(sol.xi_hat - oracle) > 1e-3 * std::max(1.0, oracle))
            c.check(false, "instance " + std::to_string(rep) + ": xi " + fmt(sol.xi_hat) +
                               " vs oracle " + fmt(oracle));
    }
    for (int rep = 0; rep < 5; ++rep) {
        Matrix p(7, 2);
        for (double& v : p.data()) v = rng.normal();
        const Vector x_true{0.6 + rng.uniform(), -0.4 - rng.uniform()};
        const Vector y = matvec(p, x_true);
        const GlfpSolution sol = solve_glfp(make_glfp_problem(p, y));
        c.check(sol.xi_hat <= 1e-6, "consistent instance: xi " + fmt(sol.xi_hat));
        c.check(std::abs(sol.x_star[0] - x_true[0]) <= 1e-6 &&
                    std::abs(sol.x_star[1] - x_true[1]) <= 1e-6,
                "consistent instance: state error too large");
    }
}

void criterion_7() {
    Criterion c(7, "GLFP completes the case5 protocol single-threaded");
    const LoadedCase lc = load("case5.m", nullptr);
    ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.trials = 1;
    cfg.methods = {Method::Interval, Method::Glfp};
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport rep = run_experiment(lc.net, lc.placement, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const TrialResult* glfp = find_result(rep.trials[0], Method::Glfp);
    c.check(glfp && glfp->ok, "glfp trial failed");
    c.check(secs < 600.0, "protocol took " + fmt(secs) + "s > 600s");
    if (glfp && glfp->ok) {
        c.check(std::isfinite(*glfp->rmse_pu), "rmse not finite");
        c.note("glfp rmse " + fmt(*glfp->rmse_pu) + " p.u. (expected order 1e-1), xi_hat " +
               fmt(*glfp->xi_hat) + ", runtime " + fmt(glfp->runtime_s) + "s");
        // Fig-1-style observation, recorded as data: components of the GLFP
        // estimate falling outside the interval band.
        const FigureData& f = rep.figure;
        if (f.glfp_estimate && f.lower && f.upper) {
            int outside = 0;
            for (std::size_t j = 0; j < f.glfp_estimate->size(); ++j)
                if ((*f.glfp_estimate)[j] < (*f.lower)[j] || (*f.glfp_estimate)[j] > (*f.upper)[j])
                    ++outside;
            c.note(std::to_string(outside) + "/" + std::to_string(f.glfp_estimate->size()) +
                   " glfp components outside the interval bounds");
        }
    }
}

void criterion_8() {
    Criterion c(8, "power flow converges on every bundled case", 5.0);
    for (const char* name : {"case5.m", "case14.m", "case30.m", "case57.m", "case118.m"}) {
        const NetworkCase net = load_case_file(data_path(name));
        PowerFlowOptions opt;
        opt.max_iter = 15;
        try {
            const PowerFlowSolution sol = solve_power_flow(net, opt);
            c.check(sol.max_mismatch < 1e-8, std::string(name) + ": mismatch " +
                                                 fmt(sol.max_mismatch));
            c.check(sol.iterations <= 15, std::string(name) + ": iterations " +
                                              std::to_string(sol.iterations));

            // Complex power balance: generation = load + losses.
            const AdmittanceModel model = build_admittance(net);
            const std::vector<Complex> inj = bus_injections(model, sol.v);
            Complex balance(0.0, 0.0);
            for (std::size_t i = 0; i < net.buses.size(); ++i) balance += inj[i];
            const BranchCurrents cur = branch_currents(model, sol.v);
            Complex losses(0.0, 0.0);
            for (std::size_t k = 0; k < model.branches.size(); ++k) {
                const BranchAdmittance& ba = model.branches[k];
                losses += sol.v[ba.from] * std::conj(cur.from[k]) +
                          sol.v[ba.to] * std::conj(cur.to[k]);
            }
            for (std::size_t i = 0; i < net.buses.size(); ++i)
                losses += std::norm(sol.v[i]) * std::conj(model.bus_shunt[i]);
            c.check(std::abs(balance - losses) < 1e-6,
                    std::string(name) + ": power imbalance " + fmt(std::abs(balance - losses)));
        } catch (const Error& e) {
            c.check(false, std::string(name) + ": " + e.what());
        }
    }
}

void criterion_9() {
    Criterion c(9, "affine expansion reproduces the exact perturbed P", 5.0);
    Rng rng(99);
    for (const auto& [case_file, placement_file] :
         std::vector<std::pair<const char*, const char*>>{
             {"case5.m", nullptr},
             {"case14.m", "placements/p14.txt"},
             {"case30.m", "placements/p30.txt"},
             {"case57.m", "placements/p57.txt"},
             {"case118.m", "placements/p118.txt"}}) {
        const LoadedCase lc = load(case_file, placement_file);
        const MeasurementModel model = build_measurement_matrix(lc.net, lc.placement);
        const SimulatedData sim = simulate_with_truth(lc.net, lc.placement, 0.0, 1);
        const UncertaintySpec spec =
            build_uncertainty_spec(lc.net, lc.placement, 0.3, 0.0, sim.meas);

        double worst = 0.0;
        Vector eps(spec.n_params());
        for (int draw = 0; draw < 100; ++draw) {
            for (double& e : eps) e = 2.0 * rng.uniform() - 1.0;
            const Matrix exact = measurement_matrix_at(lc.net, lc.placement, spec, eps);
            Matrix affine = model.p0m;
            for (std::size_t k = 0; k < spec.n_params(); ++k)
                for (const auto& t : spec.p_k[k].entries)
                    affine(t.i, t.j) += spec.delta_p[k] * t.v * eps[k];
            for (std::size_t i = 0; i < exact.data().size(); ++i)
                worst = std::max(worst, std::abs(exact.data()[i] - affine.data()[i]));
        }
        c.check(worst <= 1e-12, std::string(case_file) + ": worst deviation " + fmt(worst));
    }
}

void criterion_10() {
    Criterion c(10, "parser round-trips and survives 10^4 fuzzed inputs", 60.0);
    for (const char* name : {"case5.m", "case14.m", "case30.m", "case57.m", "case118.m"}) {
        const NetworkCase a = load_case_file(data_path(name));
        const NetworkCase b = parse_case(write_case(a));
        bool same = a.buses.size() == b.buses.size() && a.branches.size() == b.branches.size() &&
                    a.generators.size() == b.generators.size();
        for (std::size_t i = 0; same && i < a.branches.size(); ++i) {
            const auto close = [](double x, double y) {
                return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
            };
            same = a.branches[i].from_bus == b.branches[i].from_bus &&
                   close(a.branches[i].r, b.branches[i].r) && close(a.branches[i].x, b.branches[i].x);
        }
        c.check(same, std::string(name) + ": round trip mismatch");
    }

    std::string base = write_case(load_case_file(data_path("case14.m")));
    Rng rng(4242);
    int survived = 0;
    for (int iter = 0; iter < 10000; ++iter) {
        std::string mutated = base;
        const int edits = 1 + static_cast<int>(rng.uniform() * 6);
        for (int e = 0; e < edits && !mutated.empty(); ++e) {
            const std::size_t pos = static_cast<std::size_t>(rng.uniform() * mutated.size());
            switch (static_cast<int>(rng.uniform() * 4)) {
                case 0: mutated[pos] = static_cast<char>(rng.next_u64() & 0xff); break;
                case 1: mutated.erase(pos, 1 + static_cast<std::size_t>(rng.uniform() * 60)); break;
                case 2: mutated.insert(pos, 1, static_cast<char>(rng.next_u64() & 0xff)); break;
                default: mutated.resize(pos); break;
            }
        }
        try {
            (void)parse_case(mutated);
        } catch (const Error&) {
        }
        ++survived;
    }
    c.check(survived == 10000, "fuzz loop aborted early");
    c.note("10000 mutated inputs parsed or rejected without a crash");
}

}  // namespace

int main() {
    std::printf("acceptance suite: bundled data at %s\n", LSEBU_DATA_DIR);
    criterion_1();
    criterion_2();
    const auto bench_start = std::chrono::steady_clock::now();
    const std::vector<BenchOutcome> benches = run_table_benches();
    const double bench_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - bench_start).count();
    std::printf("shared bench runs for criteria 3-5 (case14..case118, 10 trials each): %.2f s\n",
                bench_seconds);
    criterion_3_and_4(benches, bench_seconds);
    criterion_5(benches);
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();

    if (g_failed == 0) {
        std::printf("acceptance suite: all criteria passed\n");
    } else {
        std::printf("acceptance suite: %d criteria FAILED\n", g_failed);
    }
    return g_failed;
}
