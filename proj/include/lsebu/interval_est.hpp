#ifndef LSEBU_INTERVAL_EST_HPP
#define LSEBU_INTERVAL_EST_HPP

#include <cstddef>
#include <vector>

#include "lsebu/linalg.hpp"
#include "lsebu/measmodel.hpp"

namespace lsebu {

// Augmented WLS system
//   A_0m = [ P_0m   -I  ]      b_z = [ y ]
//          [ 0    P'W^-1 ]            [ 0 ]
// together with the per-parameter terms C_k = A_0m^-1 A_k dp_k. The A_k are
// sparse (a handful of nonzero columns each), so C_k is kept as a set of
// dense columns.
struct SparseCols {
    std::vector<std::size_t> col_index;
    std::vector<Vector> columns;  // each of length n + 2B
};

struct AugmentedSystem {
    std::size_t n = 0;    // measurement rows
    std::size_t nx = 0;   // 2B state components
    Matrix a0m;           // (n+2B) x (n+2B)
    Matrix a0m_inv;
    Vector b_z;
    Vector f_0m;          // A_0m^-1 b_z; first 2B entries are the WLS estimate
    std::vector<SparseCols> c_k;  // one per uncertain parameter

    std::size_t dim() const { return n + nx; }

    // Sum_k |C_k| as a dense matrix.
    Matrix abs_c_sum() const;
    // Sum_k |C_k f_0m| elementwise.
    Vector abs_c_f0m_sum() const;
};

AugmentedSystem build_augmented(const MeasurementModel& model, const Matrix& w,
                                const UncertaintySpec& spec, std::span<const double> y);

// center + radius * [-1, 1] elementwise.
struct IntervalVector {
    Vector center;
    Vector radius;
    int iterations = 0;
    bool converged = false;
};

// Fixed-point sweep u <- mag(w) + sum_k |C_k| u, u(0) = 0, where mag(w)
// collects the measurement-deviation and parameter terms. Fails when the
// spectral radius of sum |C_k| reaches 1.
IntervalVector iterate_radius(const AugmentedSystem& sys, std::span<const double> delta_y,
                              double tol = 1e-10, int max_iter = 1000);

// Outer enclosure of the per-component optima over the uncertainty box; it
// is guaranteed to contain them but may be wider than the exact hull.
struct StateBounds {
    Vector lower;  // length 2B
    Vector upper;
    int iterations = 0;
    bool converged = false;
};

// First 2B components of f_0m -/+ u; the dummy block is dropped.
StateBounds state_bounds(const AugmentedSystem& sys, const IntervalVector& radius);

void write_bounds_csv(const std::string& path, const NetworkCase& net, const StateBounds& bounds,
                      std::span<const double> center);

}  // namespace lsebu

#endif
