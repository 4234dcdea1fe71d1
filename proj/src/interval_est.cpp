#include "lsebu/interval_est.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <algorithm>
#include <limits>

namespace lsebu {

namespace {

// A_0m^-1 through the block structure: solving
//   [ P  -I ] [x]   [a]
//   [ 0  P'W^-1 ] [d] = [b]
// reduces to the 2B x 2B normal matrix N = P'W^-1 P:
//   x = N^-1 (b + P'W^-1 a),  d = P x - a.
// The explicit inverse assembles these block formulas, which is much cheaper
// than factoring the full (n+2B) system.
Matrix block_inverse(const Matrix& p, const Matrix& w) {
    const std::size_t n = p.rows(), nx = p.cols();

    Matrix ptw(nx, n);  // P' W^-1
    for (std::size_t j = 0; j < n; ++j) {
        const double winv = 1.0 / w(j, j);
        for (std::size_t i = 0; i < nx; ++i) ptw(i, j) = p(j, i) * winv;
    }
    const Matrix normal = matmul(ptw, p);
    Matrix n_inv;
    try {
        n_inv = invert(normal);
    } catch (const NumericError&) {
        throw NumericError("augmented system A_0m is singular (unobservable network)");
    }

    const Matrix top_left = matmul(n_inv, ptw);        // 2B x n
    const Matrix bottom_right = matmul(p, n_inv);      // n x 2B
    const Matrix bottom_left = matmul(p, top_left);    // n x n, equals P N^-1 P' W^-1

    // Layout of the augmented unknowns: [x (2B); y_d (n)].
    Matrix inv(n + nx, n + nx);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = top_left(i, j);
        for (std::size_t j = 0; j < nx; ++j) inv(i, n + j) = n_inv(i, j);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) inv(nx + i, j) = bottom_left(i, j) - (i == j ? 1.0 : 0.0);
        for (std::size_t j = 0; j < nx; ++j) inv(nx + i, n + j) = bottom_right(i, j);
    }
    return inv;
}

}  // namespace

Matrix AugmentedSystem::abs_c_sum() const {
    Matrix s(dim(), dim());
    for (const SparseCols& ck : c_k) {
        for (std::size_t c = 0; c < ck.col_index.size(); ++c) {
            const std::size_t j = ck.col_index[c];
            const Vector& col = ck.columns[c];
            for (std::size_t i = 0; i < col.size(); ++i) s(i, j) += std::abs(col[i]);
        }
    }
    return s;
}

Vector AugmentedSystem::abs_c_f0m_sum() const {
    Vector acc(dim(), 0.0);
    for (const SparseCols& ck : c_k) {
        Vector prod(dim(), 0.0);
        for (std::size_t c = 0; c < ck.col_index.size(); ++c) {
            const double fj = f_0m[ck.col_index[c]];
            if (fj == 0.0) continue;
            const Vector& col = ck.columns[c];
            for (std::size_t i = 0; i < col.size(); ++i) prod[i] += col[i] * fj;
        }
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::abs(prod[i]);
    }
    return acc;
}

AugmentedSystem build_augmented(const MeasurementModel& model, const Matrix& w,
                                const UncertaintySpec& spec, std::span<const double> y) {
    const std::size_t n = model.n_meas, nx = 2 * model.n_bus;
    if (w.rows() != n || w.cols() != n) throw UsageError("weight matrix must be n x n");
    if (y.size() != n) throw UsageError("measurement vector must have length n");

    AugmentedSystem sys;
    sys.n = n;
    sys.nx = nx;

    // Assemble A_0m explicitly: unknown ordering [x; y_d], equation ordering
    // [measurement rows; normal-equation rows].
    sys.a0m = Matrix(n + nx, n + nx);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nx; ++j) sys.a0m(i, j) = model.p0m(i, j);
        sys.a0m(i, nx + i) = -1.0;
    }
    for (std::size_t j = 0; j < nx; ++j)
        for (std::size_t i = 0; i < n; ++i) sys.a0m(n + j, nx + i) = model.p0m(i, j) / w(i, i);

    sys.a0m_inv = block_inverse(model.p0m, w);

    sys.b_z.assign(n + nx, 0.0);
    for (std::size_t i = 0; i < n; ++i) sys.b_z[i] = y[i];
    sys.f_0m = matvec(sys.a0m_inv, sys.b_z);

    // C_k = A_0m^-1 A_k dp_k with A_k = [[P_k, 0], [0, P_k' W^-1]].
    // Column j <= 2B of A_k holds P_k(:, j) in the measurement block; column
    // 2B + i holds W_ii^-1 P_k(i, :) in the state block. Each triplet
    // (i, j, v) of P_k therefore contributes to both.
    std::vector<std::pair<std::size_t, std::pair<std::size_t, double>>> entries;
    for (std::size_t k = 0; k < spec.n_params(); ++k) {
        const SparseTriplets& pk = spec.p_k[k];
        if (pk.rows != n || pk.cols != nx) throw UsageError("sensitivity matrix shape mismatch");
        const double dp = spec.delta_p[k];

        // Sparse columns of A_k * dp, keyed by unknown-column index.
        entries.clear();
        for (const auto& e : pk.entries) {
            entries.push_back({e.j, {e.i, e.v * dp}});                       // top block
            entries.push_back({nx + e.i, {n + e.j, e.v * dp / w(e.i, e.i)}});  // bottom block
        }
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        SparseCols ck;
        std::size_t pos = 0;
        while (pos < entries.size()) {
            const std::size_t j = entries[pos].first;
            Vector col(n + nx, 0.0);
            while (pos < entries.size() && entries[pos].first == j) {
                const auto [eq_row, v] = entries[pos].second;
                const double* inv = sys.a0m_inv.data().data();
                const std::size_t stride = n + nx;
                for (std::size_t r = 0; r < n + nx; ++r) col[r] += inv[r * stride + eq_row] * v;
                ++pos;
            }
            ck.col_index.push_back(j);
            ck.columns.push_back(std::move(col));
        }
        sys.c_k.push_back(std::move(ck));
    }
    return sys;
}

IntervalVector iterate_radius(const AugmentedSystem& sys, std::span<const double> delta_y,
                              double tol, int max_iter) {
    const std::size_t dim = sys.dim();
    if (delta_y.size() != sys.n) throw UsageError("delta_y must have length n");

    const Matrix s = sys.abs_c_sum();

    // Contraction check on the nonnegative matrix S: power iteration with
    // Collatz-Wielandt brackets. For positive v, min_i (Sv)_i/v_i and
    // max_i (Sv)_i/v_i enclose the spectral radius, so the sweep can stop as
    // soon as the bracket clears 1 on either side.
    {
        Vector v(dim, 1.0), sv(dim);
        double hi = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 500; ++it) {
            double lo_b = std::numeric_limits<double>::infinity(), hi_b = 0.0, vmax = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                double acc = 0.0;
                const auto srow = s.row(i);
                for (std::size_t j = 0; j < dim; ++j) acc += srow[j] * v[j];
                sv[i] = acc;
                const double ratio = acc / v[i];
                lo_b = std::min(lo_b, ratio);
                hi_b = std::max(hi_b, ratio);
                vmax = std::max(vmax, acc);
            }
            if (hi_b < 1.0) {
                hi = hi_b;
                break;
            }
            if (lo_b >= 1.0)
                throw NumericError(
                    "interval iteration diverges: spectral radius of sum|C_k| is at least " +
                    std::to_string(lo_b));
            if (vmax == 0.0) {
                hi = 0.0;
                break;
            }
            // Keep v strictly positive so the ratios stay defined.
            for (std::size_t i = 0; i < dim; ++i) v[i] = std::max(sv[i] / vmax, 1e-30);
            hi = hi_b;
        }
        if (hi >= 1.0)
            throw NumericError("interval iteration diverges: spectral radius of sum|C_k| is "
                               "approximately " +
                               std::to_string(hi));
    }

    // mag([w]) per the measurement-extended interval right-hand side.
    Vector mag_w = sys.abs_c_f0m_sum();
    for (std::size_t i = 0; i < sys.n; ++i) {
        if (delta_y[i] == 0.0) continue;
        for (std::size_t r = 0; r < dim; ++r)
            mag_w[r] += std::abs(sys.a0m_inv(r, i)) * delta_y[i];
    }

    IntervalVector out;
    out.center = sys.f_0m;
    Vector u(dim, 0.0), next(dim);
    for (int it = 0; it < max_iter; ++it) {
        double diff = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            double acc = mag_w[i];
            const auto srow = s.row(i);
            for (std::size_t j = 0; j < dim; ++j) acc += srow[j] * u[j];
            next[i] = acc;
            diff = std::max(diff, std::abs(acc - u[i]));
        }
        std::swap(u, next);
        out.iterations = it + 1;
        if (diff <= tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged)
        throw NumericError("interval iteration did not converge within " +
                           std::to_string(max_iter) + " sweeps");
    out.radius = std::move(u);
    return out;
}

StateBounds state_bounds(const AugmentedSystem& sys, const IntervalVector& radius) {
    if (!radius.converged) throw UsageError("state_bounds requires a converged radius");
    StateBounds sb;
    sb.iterations = radius.iterations;
    sb.converged = true;
    sb.lower.resize(sys.nx);
    sb.upper.resize(sys.nx);
    for (std::size_t j = 0; j < sys.nx; ++j) {
        sb.lower[j] = sys.f_0m[j] - radius.radius[j];
        sb.upper[j] = sys.f_0m[j] + radius.radius[j];
    }
    return sb;
}

void write_bounds_csv(const std::string& path, const NetworkCase& net, const StateBounds& bounds,
                      std::span<const double> center) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "component_index,part,bus_id,lower,center,upper\n";
    const std::size_t nb = net.buses.size();
    char buf[160];
    for (std::size_t j = 0; j < bounds.lower.size(); ++j) {
        const bool re = j < nb;
        const int bus_id = net.buses[re ? j : j - nb].id;
        std::snprintf(buf, sizeof buf, "%zu,%s,%d,%.17g,%.17g,%.17g\n", j, re ? "real" : "imag",
                      bus_id, bounds.lower[j], center[j], bounds.upper[j]);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace lsebu
