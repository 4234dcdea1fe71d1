#ifndef LSEBU_MEASMODEL_HPP
#define LSEBU_MEASMODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lsebu/caseio.hpp"
#include "lsebu/linalg.hpp"
#include "lsebu/powerflow.hpp"

namespace lsebu {

// Buses carrying a PMU. Each PMU measures its bus voltage phasor and the
// current phasors of every in-service branch incident to that bus.
struct PmuPlacement {
    std::vector<int> buses;
};

PmuPlacement load_placement_file(const std::string& path);
PmuPlacement parse_placement(std::string_view text);
PmuPlacement all_bus_placement(const NetworkCase& net);

// One complex measurement channel; it expands to two matrix rows
// (real part, then imaginary part).
struct Channel {
    enum class Kind { Voltage, Current };
    Kind kind = Kind::Voltage;
    int bus = 0;                    // PMU bus
    std::size_t bus_idx = 0;        // dense index of the measured bus
    int branch_from = 0, branch_to = 0;
    std::size_t branch_index = 0;   // into NetworkCase::branches (currents only)
    bool at_from_end = false;       // which end of the branch the PMU sits on
};

// Row-level metadata for CSV dumps and error messages.
enum class RowPart { Real, Imag };

struct MeasurementModel {
    Matrix p0m;                      // n x 2B nominal measurement matrix
    std::vector<Channel> channels;   // n/2 complex channels
    std::size_t n_bus = 0;           // B
    std::size_t n_meas = 0;          // n = 2 * channels
};

// State ordering: all real parts of the bus voltages, then all imaginary
// parts (x in R^{2B}). Throws ValidationError when the placement leaves the
// system unobservable (column rank below 2B).
MeasurementModel build_measurement_matrix(const NetworkCase& net, const PmuPlacement& placement);

std::size_t measurement_rank(const NetworkCase& net, const PmuPlacement& placement);

// Multiply each branch r and x by (1 + d), d zero-mean Gaussian scaled to
// max_rel_dev/3 and redrawn until |d| <= max_rel_dev.
NetworkCase perturb_parameters(const NetworkCase& net, double max_rel_dev, std::uint64_t seed);

struct MeasurementVector {
    Vector y;        // noisy, length n
    Vector true_y;   // noise-free
    Vector sigma;    // per-row noise standard deviation
};

// Measurements plus the ground truth they were generated from.
struct SimulatedData {
    MeasurementVector meas;
    ComplexVoltageProfile profile;
    Vector x_true;  // stacked [Re V; Im V] of the generating system
};

SimulatedData simulate_with_truth(const NetworkCase& net_perturbed, const PmuPlacement& placement,
                                  double tve_bound, std::uint64_t seed);

// Gaussian channel noise with per-axis sigma tve_bound*|phasor|/3, resampled
// until the total vector error stays within tve_bound.
MeasurementVector simulate_measurements(const NetworkCase& net_perturbed,
                                        const PmuPlacement& placement, double tve_bound,
                                        std::uint64_t seed);

// Per-row sigma estimated from repeated noisy draws instead of the known
// channel sigma.
Vector empirical_sigmas(const NetworkCase& net_perturbed, const PmuPlacement& placement,
                        double tve_bound, std::uint64_t seed, std::size_t samples);

// How chi_P is condensed from the perturbation structure. The max-parameter
// recipe tracks the experiment protocol (largest |difference| between the
// perturbed and nominal line parameters) and keeps the estimator close to
// least squares; the induced-norm bound is far more conservative and shrinks
// the estimate hard.
enum class ChiPMode {
    MaxParam,    // largest line-parameter difference (default)
    MatrixNorm,  // 2-norm bound on delta P
};

// Sensitivity matrices have a handful of nonzeros each; triplet storage keeps
// hundreds of them cheap.
struct SparseTriplets {
    struct Entry {
        std::size_t i, j;
        double v;
    };
    std::size_t rows = 0, cols = 0;
    std::vector<Entry> entries;

    Matrix to_dense() const;
};

struct UncertaintySpec {
    // Uncertain parameters: for every branch touched by a current channel,
    // the real and imaginary part of its series-plus-half-charging
    // admittance. P is exactly affine in these.
    std::vector<std::size_t> uncertain_branches;  // into NetworkCase::branches
    std::vector<double> delta_p;                  // per parameter k = 1..2*n_p
    std::vector<SparseTriplets> p_k;              // sensitivity of P w.r.t. parameter k
    Vector delta_y;                               // per-row measurement deviation bound
    double chi_p = 0.0;                           // 2-norm bound on delta P (MatrixNorm mode)
    double chi_p_max_param = 0.0;                 // largest |line-parameter difference| (r, x)
    double chi_y = 0.0;                           // 2-norm bound on delta y
    double xi = 0.0;                              // largest elementwise bound on delta P

    std::size_t n_params() const { return delta_p.size(); }
};

// Per-parameter deviation bounds delta_p come in two flavors:
//  - corner bounds: the worst admittance deviation over the (r, x) corner box
//    spanned by max_rel_dev, with a sampled-grid guard for interior extrema.
//    A-priori and distribution-free, but so wide at +-30% that the interval
//    sweep stops contracting on meshed systems.
//  - realized bounds: the admittance deviation of one concrete perturbed
//    case (pass it as net_perturbed). This is how the experiments condense
//    the perturbed-vs-nominal difference into scalar bounds.
UncertaintySpec build_uncertainty_spec(const NetworkCase& net_nominal, const PmuPlacement& placement,
                                       double max_rel_dev, double tve_bound,
                                       const MeasurementVector& y_true,
                                       const NetworkCase* net_perturbed = nullptr);

// Rebuild the exact measurement matrix from explicitly given admittance
// parameters (nominal + delta_p .* eps). Used to validate the affine
// expansion and by tests.
Matrix measurement_matrix_at(const NetworkCase& net_nominal, const PmuPlacement& placement,
                             const UncertaintySpec& spec, std::span<const double> eps);

// Diagonal W with W_ii = max(sigma_i^2, 1e-8); Eq-style weighting divides by
// these variances.
Matrix build_weights(std::span<const double> sigmas);

// Assembles the stacked [Re V; Im V] state vector.
Vector stack_state(const ComplexVoltageProfile& v);

void write_measurement_csv(const std::string& path, const MeasurementModel& model,
                           const MeasurementVector& meas);

}  // namespace lsebu

#endif
