#include "lsebu/simplex.hpp"

#include <cmath>
#include <limits>

namespace lsebu {

std::optional<Vector> lp_feasible_point(const Matrix& a, std::span<const double> b, double tol) {
    const std::size_t m = a.rows(), d = a.cols();
    if (b.size() != m) throw UsageError("lp_feasible_point: rhs length mismatch");
    if (!a.all_finite()) throw NumericError("lp_feasible_point: non-finite constraint matrix");

    std::size_t n_art = 0;
    for (double bi : b)
        if (bi < 0.0) ++n_art;

    // Columns: u (d), w (d), slacks (m), artificials (n_art).
    const std::size_t n_cols = 2 * d + m + n_art;
    Matrix t(m, n_cols + 1);  // last column is the rhs
    std::vector<std::size_t> basis(m);
    Vector cost(n_cols, 0.0);

    std::size_t art = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double sign = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            t(i, j) = sign * a(i, j);
            t(i, d + j) = -sign * a(i, j);
        }
        t(i, 2 * d + i) = sign;  // slack
        t(i, n_cols) = sign * b[i];
        if (b[i] < 0.0) {
            const std::size_t aj = 2 * d + m + art;
            t(i, aj) = 1.0;
            cost[aj] = 1.0;
            basis[i] = aj;
            ++art;
        } else {
            basis[i] = 2 * d + i;
        }
    }

    // Price row: z_j - c_j for the phase-1 objective.
    Vector price(n_cols + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (cost[basis[i]] == 0.0) continue;
        for (std::size_t j = 0; j <= n_cols; ++j) price[j] += t(i, j);
    }
    for (std::size_t j = 0; j < n_cols; ++j) price[j] -= cost[j];

    const std::size_t max_pivots = 2000 + 200 * (m + n_cols);
    bool bland = false;
    int stall = 0;
    double last_obj = price[n_cols];
    // Artificials that left the basis stay out; columns whose pivot candidates
    // degenerate are retired the same way.
    std::vector<char> blocked(n_cols, 0);

    for (std::size_t pivot = 0; pivot < max_pivots; ++pivot) {
        // Entering column.
        std::size_t enter = n_cols;
        if (bland) {
            for (std::size_t j = 0; j < n_cols; ++j) {
                if (!blocked[j] && price[j] > tol) {
                    enter = j;
                    break;
                }
            }
        } else {
            double best = tol;
            for (std::size_t j = 0; j < n_cols; ++j) {
                if (!blocked[j] && price[j] > best) {
                    best = price[j];
                    enter = j;
                }
            }
        }
        if (enter == n_cols) break;  // optimal

        // Leaving row by minimum ratio, ties to the smallest basis index.
        std::size_t leave = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double aij = t(i, enter);
            if (aij <= tol) continue;
            const double ratio = t(i, n_cols) / aij;
            if (ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 && (leave == m || basis[i] < basis[leave]))) {
                best_ratio = ratio;
                leave = i;
            }
        }
        if (leave == m) {
            // The phase-1 objective is bounded below by zero, so this column
            // cannot actually improve it; retire it and move on.
            blocked[enter] = 1;
            continue;
        }

        const double piv = t(leave, enter);
        for (std::size_t j = 0; j <= n_cols; ++j) t(leave, j) /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == leave) continue;
            const double f = t(i, enter);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_cols; ++j) t(i, j) -= f * t(leave, j);
        }
        {
            const double f = price[enter];
            if (f != 0.0)
                for (std::size_t j = 0; j <= n_cols; ++j) price[j] -= f * t(leave, j);
        }
        if (basis[leave] >= 2 * d + m) blocked[basis[leave]] = 1;  // departing artificial
        basis[leave] = enter;

        if (!bland) {
            const double obj = price[n_cols];
            stall = obj < last_obj - 1e-12 ? 0 : stall + 1;
            last_obj = obj;
            if (stall > 64) bland = true;
        }
    }

    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (cost[basis[i]] != 0.0) infeasibility += t(i, n_cols);
    if (infeasibility > tol) return std::nullopt;

    Vector x(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = basis[i];
        if (j < d) x[j] += t(i, n_cols);
        else if (j < 2 * d) x[j - d] -= t(i, n_cols);
    }
    return x;
}

}  // namespace lsebu
