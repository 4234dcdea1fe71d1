#include <doctest.h>

#include <cmath>

#include "lsebu/linalg.hpp"
#include "lsebu/rng.hpp"

using namespace lsebu;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = scale * (2.0 * rng.uniform() - 1.0);
    return m;
}

// Diagonally dominant, hence comfortably well-conditioned.
Matrix random_well_conditioned(std::size_t n, Rng& rng) {
    Matrix m = random_matrix(n, n, rng);
    for (std::size_t i = 0; i < n; ++i) m(i, i) += static_cast<double>(n);
    return m;
}

}  // namespace

TEST_CASE("lu_solve identity returns rhs") {
    const Matrix a = Matrix::identity(4);
    Matrix b(4, 2);
    Rng rng(1);
    for (double& x : b.data()) x = rng.uniform();
    const Matrix x = lu_solve(a, b);
    for (std::size_t i = 0; i < b.data().size(); ++i)
        CHECK(x.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-14));
}

TEST_CASE("lu_solve diagonal system") {
    Matrix a(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 4.0;
    Matrix b(2, 1);
    b(0, 0) = 2.0;
    b(1, 0) = 8.0;
    const Matrix x = lu_solve(a, b);
    CHECK(x(0, 0) == doctest::Approx(1.0));
    CHECK(x(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("lu_solve residual on random well-conditioned system") {
    Rng rng(42);
    const Matrix a = random_well_conditioned(20, rng);
    const Matrix b = random_matrix(20, 3, rng);
    const Matrix x = lu_solve(a, b);
    const Matrix r = matmul(a, x) - b;
    CHECK(norm_inf(r.data()) <= 1e-10 * std::max(1.0, norm_inf(b.data())));
}

TEST_CASE("lu_solve flags singular matrices") {
    Matrix a(3, 3);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0;
    a(1, 1) = 4.0;  // row 1 = 2 * row 0
    a(2, 2) = 1.0;
    Matrix b(3, 1, 1.0);
    CHECK_THROWS_AS(lu_solve(a, b), NumericError);
}

TEST_CASE("lu inverse property") {
    Rng rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const Matrix a = random_well_conditioned(12, rng);
        const Matrix inv = invert(a);
        const Matrix prod = matmul(inv, a) - Matrix::identity(12);
        CHECK(norm_inf(prod.data()) < 1e-8);
    }
}

TEST_CASE("norm2_vec") {
    CHECK(norm2_vec(Vector{3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(norm2_vec(Vector{0.0, 0.0, 0.0}) == 0.0);

    Rng rng(3);
    Vector v(37);
    for (double& x : v) x = 10.0 * (rng.uniform() - 0.5);
    double ssq = 0.0;
    for (double x : v) ssq += x * x;
    CHECK(norm2_vec(v) == doctest::Approx(std::sqrt(ssq)).epsilon(1e-13));
}

TEST_CASE("norm2_mat on diagonal and zero matrices") {
    Matrix d(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    d(2, 2) = 2.0;
    CHECK(norm2_mat(d) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(norm2_mat(Matrix(4, 5)) == 0.0);
}

TEST_CASE("norm2_mat matches randomized ratio search") {
    Rng rng(11);
    const Matrix a = random_matrix(10, 6, rng);
    const double sigma = norm2_mat(a);

    auto ratio = [&](const Vector& v) {
        const double vn = norm2_vec(v);
        return vn == 0.0 ? 0.0 : norm2_vec(matvec(a, v)) / vn;
    };

    double best = 0.0;
    Vector best_v(6, 1.0);
    Vector v(6);
    for (int rep = 0; rep < 100000; ++rep) {
        for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
        const double r = ratio(v);
        if (r > best) {
            best = r;
            best_v = v;
        }
    }
    // Local random refinement around the best sampled direction.
    double step = 0.3;
    for (int rep = 0; rep < 4000; ++rep) {
        Vector probe = best_v;
        for (double& x : probe) x += step * rng.normal();
        const double r = ratio(probe);
        if (r > best) {
            best = r;
            best_v = probe;
        } else if (rep % 100 == 99) {
            step *= 0.7;
        }
    }
    CHECK(sigma >= best - 1e-9);                          // upper-bound property
    CHECK(sigma == doctest::Approx(best).epsilon(1e-3));  // refined search gets close
}

TEST_CASE("spectral norm dominates every probe direction") {
    Rng rng(13);
    const Matrix a = random_matrix(8, 8, rng);
    const double sigma = norm2_mat(a);
    Vector v(8);
    for (int rep = 0; rep < 500; ++rep) {
        for (double& x : v) x = rng.normal();
        const double vn = norm2_vec(v);
        if (vn == 0.0) continue;
        CHECK(sigma >= norm2_vec(matvec(a, v)) / vn - 1e-9);
    }
}

TEST_CASE("non-finite inputs are rejected") {
    Matrix a = Matrix::identity(2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    Matrix b(2, 1, 1.0);
    CHECK_THROWS_AS(lu_solve(a, b), NumericError);
    CHECK_THROWS_AS(norm2_mat(a), NumericError);
    CHECK_THROWS_AS(norm2_vec(Vector{1.0, std::numeric_limits<double>::infinity()}), NumericError);
}

TEST_CASE("qr_rank detects rank deficiency") {
    Rng rng(17);
    Matrix a = random_matrix(10, 4, rng);
    CHECK(qr_rank(a) == 4);

    Matrix low(10, 4);
    const Matrix u = random_matrix(10, 2, rng);
    const Matrix v = random_matrix(2, 4, rng);
    low = matmul(u, v);
    CHECK(qr_rank(low) == 2);
}
