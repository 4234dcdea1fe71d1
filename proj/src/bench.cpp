#include "lsebu/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "lsebu/rng.hpp"

namespace lsebu {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::Interval: return "interval";
        case Method::Convex: return "convex";
        case Method::Glfp: return "glfp";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "interval") return Method::Interval;
    if (name == "convex") return Method::Convex;
    if (name == "glfp") return Method::Glfp;
    throw UsageError("unknown method '" + name + "' (expected interval, convex, or glfp)");
}

double rmse(std::span<const double> x_hat, std::span<const double> x_true) {
    if (x_hat.size() != x_true.size() || x_hat.empty())
        throw UsageError("rmse: vectors must have equal nonzero length");
    double acc = 0.0;
    for (std::size_t i = 0; i < x_hat.size(); ++i) {
        const double d = x_hat[i] - x_true[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(x_hat.size()));
}

Containment containment(const StateBounds& bounds, std::span<const double> x_true) {
    if (bounds.lower.size() != x_true.size())
        throw UsageError("containment: length mismatch");
    Containment c;
    c.inside.resize(x_true.size());
    std::size_t hits = 0;
    for (std::size_t j = 0; j < x_true.size(); ++j) {
        // Cushion absorbs solver round-off when the band degenerates to a point.
        const double eps = 1e-9 * std::max(1.0, std::abs(x_true[j]));
        const bool in = bounds.lower[j] - eps <= x_true[j] && x_true[j] <= bounds.upper[j] + eps;
        c.inside[j] = in ? 1 : 0;
        if (in) ++hits;
    }
    c.rate = static_cast<double>(hits) / static_cast<double>(x_true.size());
    return c;
}

ExperimentReport run_experiment(const NetworkCase& net, const PmuPlacement& placement,
                                const ExperimentConfig& config) {
    if (config.trials < 1) throw UsageError("bench: need at least one trial");
    for (Method m : config.methods) {
        if (m == Method::Glfp && 2 * net.buses.size() > config.glfp_max_dim)
            throw ValidationError("glfp enumeration guard: state dimension " +
                                  std::to_string(2 * net.buses.size()) + " exceeds limit " +
                                  std::to_string(config.glfp_max_dim));
    }

    const MeasurementModel model = build_measurement_matrix(net, placement);

    ExperimentReport report;
    report.case_name = net.name;
    report.n_bus = net.buses.size();
    report.n_meas = model.n_meas;
    report.config = config;
    report.trials.resize(config.trials);

    auto run_trial = [&](int trial) {
        TrialRecord rec;
        rec.trial = trial;
        rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));

        NetworkCase perturbed;
        SimulatedData sim;
        UncertaintySpec spec;
        try {
            perturbed = perturb_parameters(net, config.max_rel_dev, rec.seed);
            sim = simulate_with_truth(perturbed, placement, config.tve_bound, rec.seed);
            spec = build_uncertainty_spec(net, placement, config.max_rel_dev, config.tve_bound,
                                          sim.meas, &perturbed);
        } catch (const Error& e) {
            // Data generation failed; every requested method fails for this trial.
            for (Method m : config.methods) {
                TrialResult r;
                r.error = e.what();
                rec.results.emplace_back(m, r);
            }
            report.trials[trial] = std::move(rec);
            return;
        }
        const Matrix w = build_weights(sim.meas.sigma);
        const double chi_p =
            config.chi_p_mode == ChiPMode::MatrixNorm ? spec.chi_p : spec.chi_p_max_param;
        if (trial == 0) {
            report.chi_p_used = chi_p;
            report.chi_y_used = spec.chi_y;
        }

        for (Method m : config.methods) {
            TrialResult r;
            try {
                if (m == Method::Interval) {
                    // The parametric model (A_0m^-1, C_k) depends on the
                    // network and the uncertainty structure, not on the
                    // measurement scan; the timed estimation is the enclosure
                    // computed from it.
                    const AugmentedSystem sys = build_augmented(model, w, spec, sim.meas.y);
                    StopWatch timer;
                    const IntervalVector radius = iterate_radius(sys, spec.delta_y);
                    const StateBounds bounds = state_bounds(sys, radius);
                    r.runtime_s = timer.seconds();
                    r.sweep_iterations = radius.iterations;
                    const Containment c = containment(bounds, sim.x_true);
                    r.containment_rate = c.rate;
                    double width = 0.0;
                    for (std::size_t j = 0; j < bounds.lower.size(); ++j)
                        width += bounds.upper[j] - bounds.lower[j];
                    r.mean_bound_width = width / static_cast<double>(bounds.lower.size());
                    if (trial == 0) {
                        report.figure.lower = bounds.lower;
                        report.figure.upper = bounds.upper;
                    }
                } else if (m == Method::Convex) {
                    BduConfig cfg;
                    cfg.chi_p = chi_p;
                    cfg.chi_y = spec.chi_y;
                    StopWatch timer;
                    const BduSolution sol = solve_bdu(model.p0m, sim.meas.y, cfg);
                    r.runtime_s = timer.seconds();
                    r.rmse_pu = rmse(sol.x_hat, sim.x_true);
                    r.theta = sol.theta;
                    r.secular_residual = sol.secular_residual;
                    r.residual_norm = sol.residual_norm;
                    r.root_iterations = sol.root_iterations;
                    if (trial == 0) report.figure.convex_estimate = sol.x_hat;
                } else {
                    GlfpOptions gopt;
                    gopt.tol = config.glfp_tol;
                    gopt.max_dim = config.glfp_max_dim;
                    gopt.jobs = config.jobs;
                    const GlfpProblem problem = make_glfp_problem(model.p0m, sim.meas.y);
                    StopWatch timer;
                    const GlfpSolution sol = solve_glfp(problem, gopt);
                    r.runtime_s = timer.seconds();
                    r.rmse_pu = rmse(sol.x_star, sim.x_true);
                    r.xi_hat = sol.xi_hat;
                    if (trial == 0) {
                        report.figure.glfp_estimate = sol.x_star;
                        report.glfp_solution_json = glfp_solution_json(sol);
                    }
                }
                r.ok = true;
            } catch (const Error& e) {
                r.ok = false;
                r.error = e.what();
            }
            rec.results.emplace_back(m, r);
        }

        if (trial == 0) {
            report.figure.x_true = sim.x_true;
            report.figure.bus_ids.resize(2 * net.buses.size());
            for (std::size_t i = 0; i < net.buses.size(); ++i) {
                report.figure.bus_ids[i] = net.buses[i].id;
                report.figure.bus_ids[net.buses.size() + i] = net.buses[i].id;
            }
        }
        report.trials[trial] = std::move(rec);
    };

    // Untimed warm-up on the first trial's data so first-touch allocation and
    // code paging do not pollute the timed runs.
    {
        TrialRecord scratch = report.trials[0];
        run_trial(0);
        report.figure = FigureData{};
        report.glfp_solution_json.reset();
        report.trials[0] = std::move(scratch);
    }

    if (config.jobs > 1 && config.trials > 1) {
        std::atomic<int> next{0};
        auto pump = [&] {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= config.trials) return;
                run_trial(t);
            }
        };
        std::vector<std::thread> pool;
        const int nt = std::min(config.jobs, config.trials);
        pool.reserve(nt);
        for (int t = 0; t < nt; ++t) pool.emplace_back(pump);
        for (auto& th : pool) th.join();
    } else {
        for (int t = 0; t < config.trials; ++t) run_trial(t);
    }

    for (Method m : config.methods) {
        MethodSummary s;
        std::vector<double> runtimes, rmses, rates, widths, thetas, residuals, roots, sweeps, xis;
        double secular_max = -1.0;
        for (const TrialRecord& rec : report.trials) {
            for (const auto& [mm, r] : rec.results) {
                if (mm != m) continue;
                if (!r.ok) {
                    ++s.failed_trials;
                    continue;
                }
                ++s.ok_trials;
                runtimes.push_back(r.runtime_s);
                if (r.rmse_pu) rmses.push_back(*r.rmse_pu);
                if (r.containment_rate) rates.push_back(*r.containment_rate);
                if (r.mean_bound_width) widths.push_back(*r.mean_bound_width);
                if (r.theta) thetas.push_back(*r.theta);
                if (r.residual_norm) residuals.push_back(*r.residual_norm);
                if (r.secular_residual) secular_max = std::max(secular_max, *r.secular_residual);
                if (r.root_iterations) roots.push_back(*r.root_iterations);
                if (r.sweep_iterations) sweeps.push_back(*r.sweep_iterations);
                if (r.xi_hat) xis.push_back(*r.xi_hat);
            }
        }
        s.runtime_median = median(runtimes);
        if (!rmses.empty()) s.rmse_median = median(rmses);
        if (!rates.empty()) {
            double acc = 0.0, mn = 1.0;
            for (double v : rates) {
                acc += v;
                mn = std::min(mn, v);
            }
            s.containment_mean = acc / static_cast<double>(rates.size());
            s.containment_min = mn;
        }
        if (!widths.empty()) s.width_median = median(widths);
        if (!thetas.empty()) s.theta_median = median(thetas);
        if (!residuals.empty()) s.residual_norm_median = median(residuals);
        if (secular_max >= 0.0) s.secular_residual_max = secular_max;
        if (!roots.empty()) s.root_iterations_median = median(roots);
        if (!sweeps.empty()) s.sweep_iterations_median = median(sweeps);
        if (!xis.empty()) s.xi_hat_median = median(xis);
        report.summary.emplace_back(m, s);
    }
    return report;
}

void write_trials_csv(const std::string& path, const ExperimentReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "trial,method,runtime_s,rmse_pu,containment_rate,mean_bound_width\n";
    for (const TrialRecord& rec : report.trials) {
        for (const auto& [m, r] : rec.results) {
            out << rec.trial << ',' << method_name(m) << ',';
            if (r.ok) out << fmt(r.runtime_s);
            out << ',';
            if (r.rmse_pu) out << fmt(*r.rmse_pu);
            out << ',';
            if (r.containment_rate) out << fmt(*r.containment_rate);
            out << ',';
            if (r.mean_bound_width) out << fmt(*r.mean_bound_width);
            out << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_figure_csv(const std::string& path, const ExperimentReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    const FigureData& f = report.figure;
    out << "component_index,part,bus_id,true,convex_estimate,glfp_estimate,lower,upper\n";
    const std::size_t nb = f.bus_ids.size() / 2;
    for (std::size_t j = 0; j < f.x_true.size(); ++j) {
        out << j << ',' << (j < nb ? "real" : "imag") << ',' << f.bus_ids[j] << ','
            << fmt(f.x_true[j]) << ',';
        if (f.convex_estimate) out << fmt((*f.convex_estimate)[j]);
        out << ',';
        if (f.glfp_estimate) out << fmt((*f.glfp_estimate)[j]);
        out << ',';
        if (f.lower) out << fmt((*f.lower)[j]);
        out << ',';
        if (f.upper) out << fmt((*f.upper)[j]);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::string report_summary_json(const ExperimentReport& report) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"case\": \"" << report.case_name << "\",\n";
    out << "  \"buses\": " << report.n_bus << ",\n";
    out << "  \"measurements\": " << report.n_meas << ",\n";
    out << "  \"trials\": " << report.config.trials << ",\n";
    out << "  \"seed\": " << report.config.seed << ",\n";
    out << "  \"max_rel_dev\": " << fmt(report.config.max_rel_dev) << ",\n";
    out << "  \"tve_bound\": " << fmt(report.config.tve_bound) << ",\n";
    out << "  \"chi_p_mode\": \""
        << (report.config.chi_p_mode == ChiPMode::MatrixNorm ? "matrix" : "paper") << "\",\n";
    out << "  \"chi_p\": " << fmt(report.chi_p_used) << ",\n";
    out << "  \"chi_y\": " << fmt(report.chi_y_used) << ",\n";
    out << "  \"methods\": {\n";
    for (std::size_t i = 0; i < report.summary.size(); ++i) {
        const auto& [m, s] = report.summary[i];
        out << "    \"" << method_name(m) << "\": {";
        out << "\"ok_trials\": " << s.ok_trials << ", \"failed_trials\": " << s.failed_trials;
        out << ", \"runtime_seconds_median\": " << fmt(s.runtime_median);
        if (s.rmse_median) out << ", \"rmse_pu_median\": " << fmt(*s.rmse_median);
        if (s.containment_mean) out << ", \"containment_rate_mean\": " << fmt(*s.containment_mean);
        if (s.containment_min) out << ", \"containment_rate_min\": " << fmt(*s.containment_min);
        if (s.width_median) out << ", \"mean_bound_width_median\": " << fmt(*s.width_median);
        if (s.theta_median) out << ", \"theta\": " << fmt(*s.theta_median);
        if (s.residual_norm_median) out << ", \"residual_norm\": " << fmt(*s.residual_norm_median);
        if (s.secular_residual_max) out << ", \"secular_residual\": " << fmt(*s.secular_residual_max);
        if (s.root_iterations_median) out << ", \"root_iterations\": " << fmt(*s.root_iterations_median);
        if (s.sweep_iterations_median) out << ", \"sweep_iterations\": " << fmt(*s.sweep_iterations_median);
        if (s.xi_hat_median) out << ", \"xi_hat\": " << fmt(*s.xi_hat_median);
        out << "}" << (i + 1 < report.summary.size() ? "," : "") << "\n";
    }
    out << "  }";
    if (report.glfp_solution_json) out << ",\n  \"glfp_solution\": " << *report.glfp_solution_json;
    out << "\n}\n";
    return out.str();
}

void write_report_json(const std::string& path, const ExperimentReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << report_summary_json(report);
    if (!out) throw IoError("write failed: " + path);
}

void write_estimates_csv(const std::string& path, const NetworkCase& net,
                         std::span<const double> estimate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "component_index,part,bus_id,estimate\n";
    const std::size_t nb = net.buses.size();
    for (std::size_t j = 0; j < estimate.size(); ++j) {
        const bool re = j < nb;
        out << j << ',' << (re ? "real" : "imag") << ',' << net.buses[re ? j : j - nb].id << ','
            << fmt(estimate[j]) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace lsebu
