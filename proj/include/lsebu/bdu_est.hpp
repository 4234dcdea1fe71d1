#ifndef LSEBU_BDU_EST_HPP
#define LSEBU_BDU_EST_HPP

#include <cstddef>

#include "lsebu/linalg.hpp"

namespace lsebu {

struct BduConfig {
    double chi_p = 0.0;         // induced-2-norm bound on the matrix perturbation
    double chi_y = 0.0;         // 2-norm bound on the measurement perturbation
    double theta_tol = 1e-10;   // secular-equation residual tolerance
    int max_root_iter = 200;
};

struct BduSolution {
    Vector x_hat;
    double theta = 0.0;
    double residual_norm = 0.0;     // ||P x_hat - y||
    double secular_residual = 0.0;  // |theta ||x|| - chi_p ||r|||
    int root_iterations = 0;
    double worst_case_objective = 0.0;  // ||r|| + chi_p ||x|| + chi_y
};

// Min-max estimate under norm-bounded perturbations of P and y, through the
// regularized form x(theta) = (P'P + theta I)^-1 P'y with theta the
// nonnegative root of theta ||x|| = chi_p ||P x - y||. chi_y shifts the
// worst-case objective but never the minimizer.
BduSolution solve_bdu(const Matrix& p, std::span<const double> y, const BduConfig& config);

// ||P x - y|| + chi_p ||x|| + chi_y.
double bdu_objective(const Matrix& p, std::span<const double> y, std::span<const double> x,
                     const BduConfig& config);

}  // namespace lsebu

#endif
