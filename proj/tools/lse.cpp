// Batch frontend for the lsebu estimation library. Every run is fully
// reproducible from its flag set; stochastic subcommands require --seed.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "lsebu.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(lsebu_status s) {
    switch (s) {
        case LSEBU_OK: return kExitOk;
        case LSEBU_ERR_USAGE: return kExitUsage;
        case LSEBU_ERR_IO:
        case LSEBU_ERR_PARSE:
        case LSEBU_ERR_VALIDATE: return kExitData;
        case LSEBU_ERR_NUMERIC: return kExitNumeric;
    }
    return kExitNumeric;
}

const char* category_for(lsebu_status s) {
    switch (s) {
        case LSEBU_OK: return "ok";
        case LSEBU_ERR_USAGE: return "usage";
        case LSEBU_ERR_IO: return "io";
        case LSEBU_ERR_PARSE: return "parse";
        case LSEBU_ERR_VALIDATE: return "validation";
        case LSEBU_ERR_NUMERIC: return "numeric";
    }
    return "numeric";
}

[[nodiscard]] int fail(lsebu_status s) {
    std::fprintf(stderr, "lse: error: [%s] %s\n", category_for(s), lsebu_last_error());
    return exit_code_for(s);
}

struct CaseHandle {
    lsebu_case* ptr = nullptr;
    ~CaseHandle() { lsebu_case_free(ptr); }
};

struct PlacementHandle {
    lsebu_placement* ptr = nullptr;
    ~PlacementHandle() { lsebu_placement_free(ptr); }
};

struct RunHandle {
    lsebu_run* ptr = nullptr;
    ~RunHandle() { lsebu_run_free(ptr); }
};

int load_inputs(const std::string& case_path, const std::string& placement_path, CaseHandle& c,
                PlacementHandle& p) {
    if (lsebu_status s = lsebu_case_parse_file(case_path.c_str(), &c.ptr)) return fail(s);
    if (placement_path.empty()) {
        if (lsebu_status s = lsebu_placement_all_buses(c.ptr, &p.ptr)) return fail(s);
    } else {
        if (lsebu_status s = lsebu_placement_load_file(placement_path.c_str(), &p.ptr))
            return fail(s);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear state estimation under bounded parameter and measurement uncertainty"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::simple);

    std::string case_path, placement_path, out_dir = "out", method = "convex";
    std::string chi_p = "paper", format = "csv", methods_csv, figure_csv;
    double dev = 0.3, tve = 0.01;
    std::uint64_t seed = 0;
    int trials = 10, jobs = 1;

    auto add_common = [&](CLI::App* sub, bool needs_seed) {
        sub->add_option("--case", case_path, "case file (.m)")->required();
        sub->add_option("--placement", placement_path,
                        "PMU placement file; omit to place a PMU on every bus");
        sub->add_option("--dev", dev, "max relative line-parameter deviation (default 0.3)");
        sub->add_option("--tve", tve, "total vector error bound on PMU noise (default 0.01)");
        auto* s = sub->add_option("--seed", seed, "random seed");
        if (needs_seed) s->required();
        return sub;
    };

    auto* validate = app.add_subcommand("validate", "parse a case and report observability");
    validate->add_option("--case", case_path, "case file (.m)")->required();
    validate->add_option("--placement", placement_path,
                         "PMU placement file; omit to place a PMU on every bus");
    validate->add_option("--format", format, "summary format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* generate = add_common(
        app.add_subcommand("generate", "perturb parameters, solve the power flow, emit noisy "
                                       "measurements"),
        true);
    generate->add_option("--out", out_dir, "output directory (default: out)");

    auto* estimate = add_common(app.add_subcommand("estimate", "run one estimation method"), true);
    estimate->add_option("--method", method, "interval, convex, or glfp")
        ->check(CLI::IsMember({"interval", "convex", "glfp"}));
    estimate->add_option("--out", out_dir, "output directory (default: out)");
    estimate->add_option("--chi-p", chi_p, "chi_P recipe: matrix or paper")
        ->check(CLI::IsMember({"matrix", "paper"}));
    estimate->add_option("--jobs", jobs, "worker threads");
    estimate->add_option("--format", format, "summary format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* bench = add_common(app.add_subcommand("bench", "run the full method comparison"), true);
    bench->add_option("--method", methods_csv,
                      "comma-separated methods (default: interval,convex)");
    bench->add_option("--trials", trials, "number of seeded trials (default 10)");
    bench->add_option("--out", out_dir, "output directory (default: out)");
    bench->add_option("--chi-p", chi_p, "chi_P recipe: matrix or paper")
        ->check(CLI::IsMember({"matrix", "paper"}));
    bench->add_option("--jobs", jobs, "worker threads");
    bench->add_option("--format", format, "summary format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* plot = app.add_subcommand("plot", "render a figure CSV as an SVG");
    plot->add_option("figure_csv", figure_csv, "figure.csv from a bench or estimate run")
        ->required();
    plot->add_option("--out", out_dir, "output directory (default: alongside the CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (validate->parsed()) {
        CaseHandle c;
        PlacementHandle p;
        if (int rc = load_inputs(case_path, placement_path, c, p)) return rc;
        lsebu_observability obs{};
        if (lsebu_status s = lsebu_validate(c.ptr, p.ptr, &obs)) return fail(s);
        if (format == "json") {
            std::printf("{\"buses\": %d, \"states\": %d, \"measurements\": %d, \"rank\": %d, "
                        "\"observable\": %s, \"connected\": %s}\n",
                        obs.buses, obs.states, obs.measurements, obs.rank,
                        obs.observable ? "true" : "false", obs.connected ? "true" : "false");
        } else {
            std::printf("buses,states,measurements,rank,observable,connected\n");
            std::printf("%d,%d,%d,%d,%d,%d\n", obs.buses, obs.states, obs.measurements, obs.rank,
                        obs.observable, obs.connected);
        }
        return obs.observable && obs.connected ? kExitOk : kExitData;
    }

    if (plot->parsed()) {
        std::filesystem::path svg_path;
        if (plot->count("--out")) {
            std::filesystem::create_directories(out_dir);
            svg_path = std::filesystem::path(out_dir) / "figure.svg";
        } else {
            svg_path = std::filesystem::path(figure_csv).replace_filename("figure.svg");
        }
        if (lsebu_status s = lsebu_plot_bounds(figure_csv.c_str(), svg_path.string().c_str()))
            return fail(s);
        std::printf("wrote %s\n", svg_path.string().c_str());
        return kExitOk;
    }

    CaseHandle c;
    PlacementHandle p;
    if (int rc = load_inputs(case_path, placement_path, c, p)) return rc;

    lsebu_options opt;
    lsebu_options_init(&opt);
    opt.max_rel_dev = dev;
    opt.tve_bound = tve;
    opt.seed = seed;
    opt.chi_p_matrix_norm = chi_p == "matrix" ? 1 : 0;
    opt.jobs = jobs;

    if (generate->parsed()) {
        if (lsebu_status s = lsebu_generate(c.ptr, p.ptr, &opt, out_dir.c_str())) return fail(s);
        std::printf("wrote %s/case_perturbed.m and %s/measurements.csv\n", out_dir.c_str(),
                    out_dir.c_str());
        return kExitOk;
    }

    std::string methods = estimate->parsed() ? method : methods_csv;
    if (methods.empty()) methods = "interval,convex";
    opt.methods = methods.c_str();
    opt.trials = estimate->parsed() ? 1 : trials;

    RunHandle run;
    if (lsebu_status s = lsebu_run_experiment(c.ptr, p.ptr, &opt, out_dir.c_str(), &run.ptr))
        return fail(s);

    if (format == "json") {
        std::printf("%s", lsebu_run_summary_json(run.ptr));
    } else {
        // Compact per-method summary; the full records live in the out dir.
        std::printf("see %s/report.json, trials.csv, figure.csv\n", out_dir.c_str());
        std::printf("%s", lsebu_run_summary_json(run.ptr));
    }
    return kExitOk;
}
