#include "lsebu/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace lsebu {

namespace {

constexpr double kSingularRelTol = 1e-12;

void require_finite(const Matrix& a, const char* what) {
    if (!a.all_finite()) throw NumericError(std::string(what) + ": non-finite entry");
}

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite entry");
    }
}

double max_abs_row_sum(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (double x : a.row(i)) s += std::abs(x);
        m = std::max(m, s);
    }
    return m;
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const noexcept {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw UsageError("matrix add: shape mismatch");
    Matrix r = a;
    for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] += b.data()[i];
    return r;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw UsageError("matrix sub: shape mismatch");
    Matrix r = a;
    for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] -= b.data()[i];
    return r;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix r = a;
    for (double& x : r.data()) x *= s;
    return r;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw UsageError("matmul: inner dimensions differ");
    Matrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const auto brow = b.row(k);
            auto rrow = r.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) rrow[j] += aik * brow[j];
        }
    }
    return r;
}

Vector matvec(const Matrix& a, std::span<const double> v) {
    if (a.cols() != v.size()) throw UsageError("matvec: dimension mismatch");
    Vector r(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        const auto arow = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) s += arow[j] * v[j];
        r[i] = s;
    }
    return r;
}

Matrix transpose(const Matrix& a) {
    Matrix r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

LuFactor::LuFactor(const Matrix& a) : lu_(a) {
    if (a.rows() != a.cols()) throw UsageError("lu: matrix not square");
    require_finite(a, "lu");
    const std::size_t n = a.rows();
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    const double pivot_floor = kSingularRelTol * max_abs_row_sum(a);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double cand = std::abs(lu_(i, k));
            if (cand > best) {
                best = cand;
                p = i;
            }
        }
        if (best <= pivot_floor) throw NumericError("lu: matrix is singular to working precision");
        if (p != k) {
            std::swap(perm_[k], perm_[p]);
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        }
        const double inv_pivot = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = lu_(i, k) * inv_pivot;
            lu_(i, k) = m;
            if (m == 0.0) continue;
            const auto krow = lu_.row(k);
            auto irow = lu_.row(i);
            for (std::size_t j = k + 1; j < n; ++j) irow[j] -= m * krow[j];
        }
    }
}

Vector LuFactor::solve(std::span<const double> b) const {
    const std::size_t n = dim();
    if (b.size() != n) throw UsageError("lu solve: rhs length mismatch");
    require_finite(b, "lu solve");
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[perm_[i]];
        for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
        y[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * y[j];
        y[ii] = s / lu_(ii, ii);
    }
    return y;
}

Matrix LuFactor::solve(const Matrix& b) const {
    const std::size_t n = dim();
    if (b.rows() != n) throw UsageError("lu solve: rhs rows mismatch");
    Matrix x(n, b.cols());
    Vector col(n);
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
        Vector sol = solve(col);
        for (std::size_t i = 0; i < n; ++i) x(i, j) = sol[i];
    }
    return x;
}

Matrix lu_solve(const Matrix& a, const Matrix& b) { return LuFactor(a).solve(b); }

Vector lu_solve(const Matrix& a, std::span<const double> b) { return LuFactor(a).solve(b); }

Matrix invert(const Matrix& a) { return LuFactor(a).solve(Matrix::identity(a.rows())); }

double norm2_vec(std::span<const double> v) {
    require_finite(v, "norm2_vec");
    // Scaled accumulation; plain sum of squares overflows around 1e154.
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double ssq = 0.0;
    for (double x : v) {
        const double t = x / scale;
        ssq += t * t;
    }
    return scale * std::sqrt(ssq);
}

double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double norm2_mat(const Matrix& a) {
    require_finite(a, "norm2_mat");
    if (a.rows() == 0 || a.cols() == 0) return 0.0;

    double max_entry = 0.0;
    for (double x : a.data()) max_entry = std::max(max_entry, std::abs(x));
    if (max_entry == 0.0) return 0.0;

    const std::size_t n = a.cols();
    // Deterministic pseudo-random start vector keeps the result reproducible.
    Vector v(n);
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (std::size_t i = 0; i < n; ++i) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        v[i] = 0.5 + static_cast<double>(state >> 11) / 9.007199254740992e15;  // in (0.5, 1.5)
    }
    const double vn = norm2_vec(v);
    for (double& x : v) x /= vn;

    double lambda = 0.0;
    constexpr int kMaxIter = 10000;
    constexpr double kTol = 1e-10;
    for (int it = 0; it < kMaxIter; ++it) {
        Vector av = matvec(a, v);
        Vector w = matvec(transpose(a), av);  // a^T a v
        const double wn = norm2_vec(w);
        if (wn == 0.0) return 0.0;
        const double lambda_new = wn;  // ||a^T a v|| -> dominant eigenvalue for unit v
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
        if (std::abs(lambda_new - lambda) <= kTol * std::max(1.0, lambda_new)) {
            return std::sqrt(lambda_new);
        }
        lambda = lambda_new;
    }
    throw NumericError("norm2_mat: power iteration failed to converge");
}

std::size_t qr_rank(Matrix a, double rel_tol) {
    const std::size_t m = a.rows(), n = a.cols();
    if (m == 0 || n == 0) return 0;
    require_finite(a, "qr_rank");

    std::vector<double> colnorm(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += a(i, j) * a(i, j);
        colnorm[j] = s;
    }

    const std::size_t kmax = std::min(m, n);
    double r00 = 0.0;
    std::size_t rank = 0;
    for (std::size_t k = 0; k < kmax; ++k) {
        // Pivot: move the column with the largest remaining norm to position k.
        std::size_t p = k;
        for (std::size_t j = k + 1; j < n; ++j)
            if (colnorm[j] > colnorm[p]) p = j;
        if (p != k) {
            for (std::size_t i = 0; i < m; ++i) std::swap(a(i, k), a(i, p));
            std::swap(colnorm[k], colnorm[p]);
        }

        double alpha = 0.0;
        for (std::size_t i = k; i < m; ++i) alpha += a(i, k) * a(i, k);
        alpha = std::sqrt(alpha);
        if (k == 0) r00 = alpha;
        if (alpha <= rel_tol * std::max(r00, 1e-300)) break;
        ++rank;

        if (a(k, k) > 0) alpha = -alpha;
        Vector h(m - k);
        h[0] = a(k, k) - alpha;
        for (std::size_t i = k + 1; i < m; ++i) h[i - k] = a(i, k);
        double hn = 0.0;
        for (double x : h) hn += x * x;
        if (hn == 0.0) continue;

        a(k, k) = alpha;
        for (std::size_t j = k + 1; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += h[i - k] * a(i, j);
            const double f = 2.0 * dot / hn;
            for (std::size_t i = k; i < m; ++i) a(i, j) -= f * h[i - k];
            colnorm[j] -= a(k, j) * a(k, j);
            if (colnorm[j] < 0) colnorm[j] = 0;
        }
    }
    return rank;
}

}  // namespace lsebu
