// Exercises the shared-library C interface end to end: handles, error
// reporting, experiment runs, and the files they leave behind.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lsebu.h"

namespace {

int g_failures = 0;

#define CHECK(cond)                                                              \
    do {                                                                         \
        if (!(cond)) {                                                           \
            std::fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
            ++g_failures;                                                        \
        }                                                                        \
    } while (0)

std::string data_path(const char* name) { return std::string(LSEBU_DATA_DIR) + "/" + name; }

bool file_contains(const std::filesystem::path& p, const char* needle) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str().find(needle) != std::string::npos;
}

}  // namespace

int main() {
    CHECK(std::strlen(lsebu_version()) > 0);

    // Error path: missing file reports an IO error with a message.
    lsebu_case* missing = nullptr;
    CHECK(lsebu_case_parse_file("/nonexistent/case.m", &missing) == LSEBU_ERR_IO);
    CHECK(missing == nullptr);
    CHECK(std::strlen(lsebu_last_error()) > 0);

    // Error path: malformed text.
    lsebu_case* bad = nullptr;
    CHECK(lsebu_case_parse_text("mpc.baseMVA = banana;", &bad) == LSEBU_ERR_PARSE);
    CHECK(lsebu_case_parse_text("mpc.baseMVA = 100;", &bad) == LSEBU_ERR_PARSE);

    // Happy path: bundled case5.
    lsebu_case* c5 = nullptr;
    CHECK(lsebu_case_parse_file(data_path("case5.m").c_str(), &c5) == LSEBU_OK);
    CHECK(lsebu_case_bus_count(c5) == 5);
    CHECK(lsebu_case_branch_count(c5) == 6);
    CHECK(lsebu_case_gen_count(c5) == 5);
    CHECK(lsebu_case_base_mva(c5) == 100.0);

    // Round trip through the writer.
    const std::filesystem::path tmp = std::filesystem::temp_directory_path() / "lsebu_capi";
    std::filesystem::create_directories(tmp);
    const std::string rewritten = (tmp / "case5_rt.m").string();
    CHECK(lsebu_case_write_file(c5, rewritten.c_str()) == LSEBU_OK);
    lsebu_case* c5rt = nullptr;
    CHECK(lsebu_case_parse_file(rewritten.c_str(), &c5rt) == LSEBU_OK);
    CHECK(lsebu_case_bus_count(c5rt) == 5);
    lsebu_case_free(c5rt);

    // Placements.
    lsebu_placement* all = nullptr;
    CHECK(lsebu_placement_all_buses(c5, &all) == LSEBU_OK);
    CHECK(lsebu_placement_size(all) == 5);

    lsebu_case* c14 = nullptr;
    CHECK(lsebu_case_parse_file(data_path("case14.m").c_str(), &c14) == LSEBU_OK);
    lsebu_placement* p14 = nullptr;
    CHECK(lsebu_placement_load_file(data_path("placements/p14.txt").c_str(), &p14) == LSEBU_OK);
    CHECK(lsebu_placement_size(p14) == 4);

    // Observability report.
    lsebu_observability obs{};
    CHECK(lsebu_validate(c14, p14, &obs) == LSEBU_OK);
    CHECK(obs.buses == 14);
    CHECK(obs.states == 28);
    CHECK(obs.rank == 28);
    CHECK(obs.observable == 1);
    CHECK(obs.connected == 1);
    CHECK(obs.measurements == 38);

    // Data generation drops the documented files.
    lsebu_options opt;
    lsebu_options_init(&opt);
    opt.seed = 7;
    const std::filesystem::path gen_dir = tmp / "gen";
    CHECK(lsebu_generate(c14, p14, &opt, gen_dir.string().c_str()) == LSEBU_OK);
    CHECK(std::filesystem::exists(gen_dir / "case_perturbed.m"));
    CHECK(std::filesystem::exists(gen_dir / "measurements.csv"));
    CHECK(file_contains(gen_dir / "measurements.csv", "channel_id,kind,bus"));

    // Full experiment run with both fast methods.
    opt.methods = "interval,convex";
    opt.trials = 2;
    const std::filesystem::path run_dir = tmp / "run";
    lsebu_run* run = nullptr;
    CHECK(lsebu_run_experiment(c14, p14, &opt, run_dir.string().c_str(), &run) == LSEBU_OK);
    const char* json = lsebu_run_summary_json(run);
    CHECK(json && std::strstr(json, "\"convex\"") != nullptr);
    CHECK(std::strstr(json, "\"interval\"") != nullptr);
    CHECK(std::filesystem::exists(run_dir / "report.json"));
    CHECK(std::filesystem::exists(run_dir / "trials.csv"));
    CHECK(std::filesystem::exists(run_dir / "figure.csv"));
    CHECK(std::filesystem::exists(run_dir / "estimates.csv"));
    CHECK(std::filesystem::exists(run_dir / "bounds.csv"));

    // Figure -> SVG.
    const std::string svg = (tmp / "figure.svg").string();
    CHECK(lsebu_plot_bounds((run_dir / "figure.csv").string().c_str(), svg.c_str()) == LSEBU_OK);
    CHECK(file_contains(svg, "<svg"));
    lsebu_run_free(run);

    // The GLFP guard propagates as a validation error.
    opt.methods = "glfp";
    lsebu_run* guarded = nullptr;
    CHECK(lsebu_run_experiment(c14, p14, &opt, nullptr, &guarded) == LSEBU_ERR_VALIDATE);
    CHECK(guarded == nullptr);
    CHECK(std::strstr(lsebu_last_error(), "guard") != nullptr);

    // Unknown method names are usage errors.
    opt.methods = "telepathy";
    CHECK(lsebu_run_experiment(c14, p14, &opt, nullptr, &guarded) == LSEBU_ERR_USAGE);

    // Null arguments are rejected, not dereferenced.
    CHECK(lsebu_case_parse_file(nullptr, &missing) == LSEBU_ERR_USAGE);
    CHECK(lsebu_validate(nullptr, p14, &obs) == LSEBU_ERR_USAGE);

    lsebu_placement_free(all);
    lsebu_placement_free(p14);
    lsebu_case_free(c14);
    lsebu_case_free(c5);

    if (g_failures == 0) std::printf("capi_tests: all checks passed\n");
    return g_failures == 0 ? 0 : 1;
}
