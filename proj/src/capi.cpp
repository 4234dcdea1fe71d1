#include "lsebu.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "lsebu/bench.hpp"
#include "lsebu/caseio.hpp"
#include "lsebu/measmodel.hpp"
#include "lsebu/svgplot.hpp"

using namespace lsebu;

struct lsebu_case_s {
    NetworkCase net;
};

struct lsebu_placement_s {
    PmuPlacement placement;
};

struct lsebu_run_s {
    ExperimentReport report;
    std::string summary_json;
};

namespace {

thread_local std::string g_last_error;

lsebu_status status_from(const Error& e) {
    g_last_error = e.what();
    switch (e.kind()) {
        case ErrorKind::Io: return LSEBU_ERR_IO;
        case ErrorKind::Parse: return LSEBU_ERR_PARSE;
        case ErrorKind::Validation: return LSEBU_ERR_VALIDATE;
        case ErrorKind::Numeric: return LSEBU_ERR_NUMERIC;
        case ErrorKind::Usage: return LSEBU_ERR_USAGE;
    }
    return LSEBU_ERR_USAGE;
}

template <typename Fn>
lsebu_status guarded(Fn&& fn) {
    try {
        fn();
        return LSEBU_OK;
    } catch (const Error& e) {
        return status_from(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LSEBU_ERR_NUMERIC;
    }
}

lsebu_status require(bool cond, const char* message) {
    if (cond) return LSEBU_OK;
    g_last_error = message;
    return LSEBU_ERR_USAGE;
}

ExperimentConfig config_from(const lsebu_options* opt) {
    ExperimentConfig cfg;
    if (!opt) return cfg;
    cfg.max_rel_dev = opt->max_rel_dev;
    cfg.tve_bound = opt->tve_bound;
    cfg.seed = opt->seed;
    cfg.trials = opt->trials > 0 ? opt->trials : 1;
    cfg.chi_p_mode = opt->chi_p_matrix_norm ? ChiPMode::MatrixNorm : ChiPMode::MaxParam;
    cfg.jobs = opt->jobs > 0 ? opt->jobs : 1;
    if (opt->methods && *opt->methods) {
        cfg.methods.clear();
        std::string spec(opt->methods);
        std::size_t pos = 0;
        while (pos != std::string::npos) {
            const std::size_t comma = spec.find(',', pos);
            std::string name = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
            if (!name.empty()) cfg.methods.push_back(method_from_name(name));
            pos = comma == std::string::npos ? comma : comma + 1;
        }
        if (cfg.methods.empty()) throw UsageError("no methods requested");
    }
    return cfg;
}

}  // namespace

extern "C" {

const char* lsebu_version(void) { return "1.0.0"; }

const char* lsebu_last_error(void) { return g_last_error.c_str(); }

lsebu_status lsebu_case_parse_file(const char* path, lsebu_case** out) {
    if (lsebu_status s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new lsebu_case_s{load_case_file(path)}; });
}

lsebu_status lsebu_case_parse_text(const char* text, lsebu_case** out) {
    if (lsebu_status s = require(text && out, "null argument")) return s;
    return guarded([&] { *out = new lsebu_case_s{parse_case(text)}; });
}

lsebu_status lsebu_case_write_file(const lsebu_case* c, const char* path) {
    if (lsebu_status s = require(c && path, "null argument")) return s;
    return guarded([&] { save_case_file(c->net, path); });
}

void lsebu_case_free(lsebu_case* c) { delete c; }

int lsebu_case_bus_count(const lsebu_case* c) { return c ? static_cast<int>(c->net.buses.size()) : 0; }
int lsebu_case_branch_count(const lsebu_case* c) {
    return c ? static_cast<int>(c->net.branches.size()) : 0;
}
int lsebu_case_gen_count(const lsebu_case* c) {
    return c ? static_cast<int>(c->net.generators.size()) : 0;
}
double lsebu_case_base_mva(const lsebu_case* c) { return c ? c->net.base_mva : 0.0; }

lsebu_status lsebu_placement_load_file(const char* path, lsebu_placement** out) {
    if (lsebu_status s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new lsebu_placement_s{load_placement_file(path)}; });
}

lsebu_status lsebu_placement_all_buses(const lsebu_case* c, lsebu_placement** out) {
    if (lsebu_status s = require(c && out, "null argument")) return s;
    return guarded([&] { *out = new lsebu_placement_s{all_bus_placement(c->net)}; });
}

void lsebu_placement_free(lsebu_placement* p) { delete p; }

int lsebu_placement_size(const lsebu_placement* p) {
    return p ? static_cast<int>(p->placement.buses.size()) : 0;
}

lsebu_status lsebu_validate(const lsebu_case* c, const lsebu_placement* p,
                            lsebu_observability* out) {
    if (lsebu_status s = require(c && p && out, "null argument")) return s;
    return guarded([&] {
        out->buses = static_cast<int>(c->net.buses.size());
        out->states = 2 * out->buses;
        out->connected = is_connected(c->net) ? 1 : 0;
        for (int bus : p->placement.buses) c->net.index_of(bus);  // reject unknown ids
        const std::size_t rank = measurement_rank(c->net, p->placement);

        std::size_t n_channels = 0;
        for (int bus : p->placement.buses) {
            ++n_channels;
            for (const Branch& br : c->net.branches)
                if (br.status == BranchStatus::InService &&
                    (br.from_bus == bus || br.to_bus == bus))
                    ++n_channels;
        }
        out->measurements = static_cast<int>(2 * n_channels);
        out->rank = static_cast<int>(rank);
        out->observable = out->rank == out->states ? 1 : 0;
    });
}

void lsebu_options_init(lsebu_options* opt) {
    if (!opt) return;
    opt->methods = nullptr;
    opt->max_rel_dev = 0.3;
    opt->tve_bound = 0.01;
    opt->seed = 0;
    opt->trials = 1;
    opt->chi_p_matrix_norm = 0;
    opt->jobs = 1;
}

lsebu_status lsebu_generate(const lsebu_case* c, const lsebu_placement* p,
                            const lsebu_options* opt, const char* out_dir) {
    if (lsebu_status s = require(c && p && opt && out_dir, "null argument")) return s;
    return guarded([&] {
        const ExperimentConfig cfg = config_from(opt);
        std::filesystem::create_directories(out_dir);
        const NetworkCase perturbed =
            perturb_parameters(c->net, cfg.max_rel_dev, cfg.seed);
        const SimulatedData sim =
            simulate_with_truth(perturbed, p->placement, cfg.tve_bound, cfg.seed);
        const MeasurementModel model = build_measurement_matrix(c->net, p->placement);
        const std::filesystem::path dir(out_dir);
        save_case_file(perturbed, (dir / "case_perturbed.m").string());
        write_measurement_csv((dir / "measurements.csv").string(), model, sim.meas);
    });
}

lsebu_status lsebu_run_experiment(const lsebu_case* c, const lsebu_placement* p,
                                  const lsebu_options* opt, const char* out_dir, lsebu_run** out) {
    if (lsebu_status s = require(c && p && opt && out, "null argument")) return s;
    return guarded([&] {
        const ExperimentConfig cfg = config_from(opt);
        auto run = std::make_unique<lsebu_run_s>();
        run->report = run_experiment(c->net, p->placement, cfg);
        run->summary_json = report_summary_json(run->report);

        if (out_dir && *out_dir) {
            const std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            write_report_json((dir / "report.json").string(), run->report);
            write_trials_csv((dir / "trials.csv").string(), run->report);
            write_figure_csv((dir / "figure.csv").string(), run->report);
            const FigureData& fig = run->report.figure;
            if (fig.convex_estimate)
                write_estimates_csv((dir / "estimates.csv").string(), c->net, *fig.convex_estimate);
            else if (fig.glfp_estimate)
                write_estimates_csv((dir / "estimates.csv").string(), c->net, *fig.glfp_estimate);
            if (fig.lower && fig.upper) {
                StateBounds bounds;
                bounds.lower = *fig.lower;
                bounds.upper = *fig.upper;
                bounds.converged = true;
                Vector center(bounds.lower.size());
                for (std::size_t j = 0; j < center.size(); ++j)
                    center[j] = 0.5 * (bounds.lower[j] + bounds.upper[j]);
                write_bounds_csv((dir / "bounds.csv").string(), c->net, bounds, center);
            }
        }
        *out = run.release();
    });
}

const char* lsebu_run_summary_json(const lsebu_run* run) {
    return run ? run->summary_json.c_str() : "";
}

void lsebu_run_free(lsebu_run* run) { delete run; }

lsebu_status lsebu_plot_bounds(const char* figure_csv_path, const char* out_svg_path) {
    if (lsebu_status s = require(figure_csv_path && out_svg_path, "null argument")) return s;
    return guarded([&] { plot_bounds(figure_csv_path, out_svg_path); });
}

}  // extern "C"
