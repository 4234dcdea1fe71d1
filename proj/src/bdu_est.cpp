#include "lsebu/bdu_est.hpp"

#include <cmath>

namespace lsebu {

namespace {

struct Evaluation {
    Vector x;
    double x_norm = 0.0;
    double r_norm = 0.0;
    double g = 0.0;  // theta ||x|| - chi_p ||r||
};

class RegularizedSolver {
public:
    RegularizedSolver(const Matrix& p, std::span<const double> y, double chi_p)
        : p_(p), y_(y.begin(), y.end()), chi_p_(chi_p), pt_(transpose(p)) {
        ptp_ = matmul(pt_, p_);
        pty_ = matvec(pt_, y_);
    }

    Evaluation at(double theta) const {
        Matrix m = ptp_;
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += theta;
        Evaluation e;
        try {
            e.x = lu_solve(m, pty_);
        } catch (const NumericError&) {
            throw NumericError("regularized normal matrix is singular: P is rank deficient");
        }
        e.x_norm = norm2_vec(e.x);
        Vector r = matvec(p_, e.x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y_[i];
        e.r_norm = norm2_vec(r);
        e.g = theta * e.x_norm - chi_p_ * e.r_norm;
        return e;
    }

private:
    const Matrix& p_;
    Vector y_;
    double chi_p_;
    Matrix pt_;
    Matrix ptp_;
    Vector pty_;
};

}  // namespace

BduSolution solve_bdu(const Matrix& p, std::span<const double> y, const BduConfig& config) {
    if (p.rows() != y.size()) throw UsageError("solve_bdu: dimension mismatch");
    if (p.rows() < p.cols()) throw UsageError("solve_bdu: P must have at least as many rows as columns");
    if (config.chi_p < 0.0 || config.chi_y < 0.0 || !std::isfinite(config.chi_p) ||
        !std::isfinite(config.chi_y))
        throw UsageError("solve_bdu: chi bounds must be finite and nonnegative");

    BduSolution sol;
    if (norm2_vec(y) == 0.0) {
        // 0/0 in the secular equation; the zero vector minimizes the objective exactly.
        sol.x_hat.assign(p.cols(), 0.0);
        sol.worst_case_objective = config.chi_y;
        return sol;
    }

    RegularizedSolver solver(p, y, config.chi_p);

    // Rank check up front so a deficient P is reported as such rather than as
    // a spurious root-finding failure.
    if (qr_rank(p) < p.cols()) throw NumericError("solve_bdu: P is rank deficient");

    Evaluation ls = solver.at(0.0);
    if (config.chi_p == 0.0 || ls.g >= -config.theta_tol * (1.0 + ls.r_norm)) {
        // Consistent data or no matrix uncertainty: ordinary least squares.
        sol.x_hat = std::move(ls.x);
        sol.theta = 0.0;
        sol.residual_norm = ls.r_norm;
        sol.secular_residual = std::abs(ls.g);
        sol.worst_case_objective = ls.r_norm + config.chi_p * ls.x_norm + config.chi_y;
        return sol;
    }

    // g(0) < 0 and g grows toward ||P'y|| - chi_p ||y|| as theta -> inf.
    // Expand the bracket geometrically, then bisect.
    int iterations = 0;
    double lo = 0.0;
    double hi = std::max(1.0, config.chi_p * ls.r_norm / std::max(ls.x_norm, 1e-300));
    Evaluation at_hi = solver.at(hi);
    ++iterations;
    while (at_hi.g <= 0.0) {
        if (iterations >= config.max_root_iter)
            throw NumericError("solve_bdu: no positive secular root found (chi_p too large "
                               "relative to the data)");
        lo = hi;
        hi *= 2.0;
        at_hi = solver.at(hi);
        ++iterations;
    }

    Evaluation best = at_hi;
    double theta = hi;
    while (iterations < config.max_root_iter) {
        const double mid = 0.5 * (lo + hi);
        Evaluation e = solver.at(mid);
        ++iterations;
        if (std::abs(e.g) <= config.theta_tol * (1.0 + e.r_norm)) {
            best = std::move(e);
            theta = mid;
            break;
        }
        if (e.g > 0.0) {
            hi = mid;
            best = std::move(e);
            theta = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
    }

    sol.secular_residual = std::abs(best.g);
    if (sol.secular_residual > config.theta_tol * (1.0 + best.r_norm))
        throw NumericError("solve_bdu: secular equation not solved to tolerance within " +
                           std::to_string(config.max_root_iter) + " evaluations");

    sol.x_hat = std::move(best.x);
    sol.theta = theta;
    sol.residual_norm = best.r_norm;
    sol.root_iterations = iterations;
    sol.worst_case_objective = best.r_norm + config.chi_p * best.x_norm + config.chi_y;
    return sol;
}

double bdu_objective(const Matrix& p, std::span<const double> y, std::span<const double> x,
                     const BduConfig& config) {
    if (p.rows() != y.size() || p.cols() != x.size())
        throw UsageError("bdu_objective: dimension mismatch");
    Vector r = matvec(p, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    return norm2_vec(r) + config.chi_p * norm2_vec(x) + config.chi_y;
}

}  // namespace lsebu
