#ifndef LSEBU_GLFP_EST_HPP
#define LSEBU_GLFP_EST_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lsebu/linalg.hpp"

namespace lsebu {

// Joint state and elementwise-uncertainty-bound estimation: per sign vector s
// minimize the largest ratio |l_i'x - y_i| / (zeta' D_s x + 1) over the
// closed cone D_s x >= 0, then take the best sign vector.
struct GlfpProblem {
    Matrix p;            // n x d rows l_i'
    Vector y;            // length n
    std::vector<int> zeta;  // 0/1 per state column; 1 marks an uncertain regressor

    std::size_t dim() const { return p.cols(); }
};

GlfpProblem make_glfp_problem(const Matrix& p, std::span<const double> y);  // all columns uncertain

struct SignedSubproblem {
    std::vector<int> s;  // +1/-1 per state
    double v_s = std::numeric_limits<double>::infinity();
    Vector x_s;          // feasible witness when v_s is finite

    bool feasible() const { return v_s != std::numeric_limits<double>::infinity(); }
};

// Bisection over LP feasibility on [v_lo, v_hi]. Infeasible at v_hi yields
// v_s = +infinity (not an error).
SignedSubproblem solve_signed(const GlfpProblem& problem, const std::vector<int>& s, double v_lo,
                              double v_hi, double tol = 1e-8);

struct GlfpSolution {
    double xi_hat = 0.0;
    Vector x_star;
    std::vector<int> s_star;
    std::size_t evaluated_signs = 0;
    std::size_t pruned_signs = 0;
    double runtime_seconds = 0.0;
};

struct GlfpOptions {
    double tol = 1e-8;
    std::size_t max_dim = 24;  // enumeration guard on the state dimension
    int jobs = 1;              // sign-vector fan-out
};

// Enumerates all 2^d orthants in Gray-code order, pruning against a shared
// monotone incumbent bound.
GlfpSolution solve_glfp(const GlfpProblem& problem, const GlfpOptions& opt = {});

std::string glfp_solution_json(const GlfpSolution& sol);

}  // namespace lsebu

#endif
