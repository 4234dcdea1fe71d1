#ifndef LSEBU_SIMPLEX_HPP
#define LSEBU_SIMPLEX_HPP

#include <cstddef>
#include <optional>

#include "lsebu/linalg.hpp"

namespace lsebu {

// Phase-1 simplex feasibility test for { x free : A x <= b }.
// Free variables are split into positive parts; rows with negative right-hand
// sides receive artificial variables whose sum is minimized. Dantzig pricing
// with a permanent switch to Bland's rule after a run of non-improving pivots
// guards against cycling.
//
// Returns a feasible witness, or nullopt when the system is infeasible.
std::optional<Vector> lp_feasible_point(const Matrix& a, std::span<const double> b,
                                        double tol = 1e-9);

}  // namespace lsebu

#endif
