/* C interface to the lsebu estimation library.
 *
 * All functions return LSEBU_OK (0) on success or a nonzero status code; the
 * message for the most recent failure on the calling thread is available via
 * lsebu_last_error(). Objects are opaque handles released with the matching
 * *_free function.
 */
#ifndef LSEBU_H
#define LSEBU_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsebu_status {
    LSEBU_OK = 0,
    LSEBU_ERR_USAGE = 1,    /* bad arguments */
    LSEBU_ERR_IO = 2,       /* file system failure */
    LSEBU_ERR_PARSE = 3,    /* malformed input text */
    LSEBU_ERR_VALIDATE = 4, /* input violates a model invariant */
    LSEBU_ERR_NUMERIC = 5   /* singularity, divergence, non-convergence */
} lsebu_status;

typedef struct lsebu_case_s lsebu_case;
typedef struct lsebu_placement_s lsebu_placement;
typedef struct lsebu_run_s lsebu_run;

const char* lsebu_version(void);

/* Thread-local message describing the most recent error. */
const char* lsebu_last_error(void);

/* ---- case files ---- */

lsebu_status lsebu_case_parse_file(const char* path, lsebu_case** out);
lsebu_status lsebu_case_parse_text(const char* text, lsebu_case** out);
lsebu_status lsebu_case_write_file(const lsebu_case* c, const char* path);
void lsebu_case_free(lsebu_case* c);

int lsebu_case_bus_count(const lsebu_case* c);
int lsebu_case_branch_count(const lsebu_case* c);
int lsebu_case_gen_count(const lsebu_case* c);
double lsebu_case_base_mva(const lsebu_case* c);

/* ---- PMU placements ---- */

lsebu_status lsebu_placement_load_file(const char* path, lsebu_placement** out);
lsebu_status lsebu_placement_all_buses(const lsebu_case* c, lsebu_placement** out);
void lsebu_placement_free(lsebu_placement* p);
int lsebu_placement_size(const lsebu_placement* p);

/* ---- observability ---- */

typedef struct lsebu_observability {
    int buses;
    int states;       /* 2B */
    int measurements; /* matrix rows */
    int rank;
    int observable;   /* rank == states */
    int connected;
} lsebu_observability;

lsebu_status lsebu_validate(const lsebu_case* c, const lsebu_placement* p,
                            lsebu_observability* out);

/* ---- experiment runs ---- */

typedef struct lsebu_options {
    const char* methods;   /* comma-separated: "interval,convex,glfp" */
    double max_rel_dev;    /* parameter deviation bound, default 0.3 */
    double tve_bound;      /* measurement noise bound, default 0.01 */
    uint64_t seed;
    int trials;            /* default 1 */
    int chi_p_matrix_norm; /* 0: max line-parameter difference (default), 1: 2-norm bound */
    int jobs;              /* worker threads for trials / sign vectors */
} lsebu_options;

void lsebu_options_init(lsebu_options* opt);

/* Writes case_perturbed.m and measurements.csv into out_dir. */
lsebu_status lsebu_generate(const lsebu_case* c, const lsebu_placement* p,
                            const lsebu_options* opt, const char* out_dir);

/* Runs the configured methods and writes report.json, trials.csv, figure.csv,
 * plus estimates.csv / bounds.csv when the relevant methods ran. out_dir may
 * be NULL to skip file output. */
lsebu_status lsebu_run_experiment(const lsebu_case* c, const lsebu_placement* p,
                                  const lsebu_options* opt, const char* out_dir, lsebu_run** out);

/* Summary JSON (owned by the run handle). */
const char* lsebu_run_summary_json(const lsebu_run* run);
void lsebu_run_free(lsebu_run* run);

/* ---- figures ---- */

lsebu_status lsebu_plot_bounds(const char* figure_csv_path, const char* out_svg_path);

#ifdef __cplusplus
}
#endif

#endif /* LSEBU_H */
