#ifndef LSEBU_LINALG_HPP
#define LSEBU_LINALG_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "lsebu/errors.hpp"

namespace lsebu {

using Vector = std::vector<double>;

// Dense row-major matrix. Large enough for a few hundred rows/columns,
// which covers every system this library targets.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool all_finite() const noexcept;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> v);
Matrix transpose(const Matrix& a);

// LU factorization with partial pivoting. Reusable across multiple solves.
class LuFactor {
public:
    explicit LuFactor(const Matrix& a);  // throws NumericError when singular

    Matrix solve(const Matrix& b) const;
    Vector solve(std::span<const double> b) const;
    std::size_t dim() const noexcept { return lu_.rows(); }

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
};

// One-shot solves of a X = b. Pivot magnitudes below 1e-12 * ||a||_inf are
// treated as singular.
Matrix lu_solve(const Matrix& a, const Matrix& b);
Vector lu_solve(const Matrix& a, std::span<const double> b);
Matrix invert(const Matrix& a);

double norm2_vec(std::span<const double> v);
double norm_inf(std::span<const double> v);

// Largest singular value by power iteration on a^T a (tol 1e-10, at most
// 10000 sweeps).
double norm2_mat(const Matrix& a);

// Numerical rank via Householder QR with column pivoting.
std::size_t qr_rank(Matrix a, double rel_tol = 1e-10);

}  // namespace lsebu

#endif
