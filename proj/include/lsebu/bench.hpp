#ifndef LSEBU_BENCH_HPP
#define LSEBU_BENCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsebu/bdu_est.hpp"
#include "lsebu/glfp_est.hpp"
#include "lsebu/interval_est.hpp"
#include "lsebu/measmodel.hpp"

namespace lsebu {

enum class Method { Interval, Convex, Glfp };

const char* method_name(Method m);
Method method_from_name(const std::string& name);  // "interval" | "convex" | "glfp"

struct ExperimentConfig {
    double max_rel_dev = 0.3;
    double tve_bound = 0.01;
    std::uint64_t seed = 0;
    int trials = 10;
    std::vector<Method> methods{Method::Interval, Method::Convex};
    ChiPMode chi_p_mode = ChiPMode::MaxParam;
    int jobs = 1;
    std::size_t glfp_max_dim = 24;
    double glfp_tol = 1e-8;
};

// Everything recorded about one method in one trial. Runtime covers the
// estimation call only; data generation is excluded.
struct TrialResult {
    bool ok = false;
    std::string error;
    double runtime_s = 0.0;
    std::optional<double> rmse_pu;            // convex, glfp
    std::optional<double> containment_rate;   // interval
    std::optional<double> mean_bound_width;   // interval
    std::optional<double> theta;              // convex
    std::optional<double> secular_residual;   // convex
    std::optional<double> residual_norm;      // convex
    std::optional<int> root_iterations;       // convex
    std::optional<int> sweep_iterations;      // interval
    std::optional<double> xi_hat;             // glfp
};

struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<Method, TrialResult>> results;
};

// Full per-component data of one trial, enough to regenerate the figures.
struct FigureData {
    std::vector<int> bus_ids;  // length 2B, bus per component
    Vector x_true;
    std::optional<Vector> convex_estimate;
    std::optional<Vector> glfp_estimate;
    std::optional<Vector> lower;
    std::optional<Vector> upper;
};

struct MethodSummary {
    int ok_trials = 0;
    int failed_trials = 0;
    double runtime_median = 0.0;
    std::optional<double> rmse_median;
    std::optional<double> containment_mean;
    std::optional<double> containment_min;
    std::optional<double> width_median;
    std::optional<double> theta_median;             // convex
    std::optional<double> residual_norm_median;     // convex
    std::optional<double> secular_residual_max;     // convex
    std::optional<double> root_iterations_median;   // convex
    std::optional<double> sweep_iterations_median;  // interval
    std::optional<double> xi_hat_median;            // glfp
};

struct ExperimentReport {
    std::string case_name;
    std::optional<std::string> glfp_solution_json;  // trial 0, when glfp ran
    std::size_t n_bus = 0;
    std::size_t n_meas = 0;
    ExperimentConfig config;
    std::vector<TrialRecord> trials;
    std::vector<std::pair<Method, MethodSummary>> summary;
    FigureData figure;  // from the first trial
    double chi_p_used = 0.0;
    double chi_y_used = 0.0;
};

// The full protocol: per trial, perturb the parameters with a fresh sub-seed,
// solve the perturbed power flow, add bounded noise, build the nominal-model
// estimators, and score each method against the perturbed-system truth.
// Estimator failures are recorded per trial without aborting the batch.
ExperimentReport run_experiment(const NetworkCase& net, const PmuPlacement& placement,
                                const ExperimentConfig& config);

double rmse(std::span<const double> x_hat, std::span<const double> x_true);

struct Containment {
    double rate = 0.0;
    std::vector<char> inside;
};

Containment containment(const StateBounds& bounds, std::span<const double> x_true);

void write_trials_csv(const std::string& path, const ExperimentReport& report);
void write_figure_csv(const std::string& path, const ExperimentReport& report);
void write_report_json(const std::string& path, const ExperimentReport& report);
std::string report_summary_json(const ExperimentReport& report);
void write_estimates_csv(const std::string& path, const NetworkCase& net,
                         std::span<const double> estimate);

}  // namespace lsebu

#endif
