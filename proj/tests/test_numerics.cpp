#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cimdet/matrix.hpp"
#include "cimdet/rng.hpp"
#include "support/oracles.hpp"

using namespace cimdet;

TEST_CASE("sym_eigenvalues: identity and diagonal") {
    CHECK(sym_eigenvalues(Matrix::identity(3)) == std::vector<double>{1.0, 1.0, 1.0});

    Matrix d(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 5.0;
    CHECK(sym_eigenvalues(d) == std::vector<double>{2.0, 5.0});
}

TEST_CASE("sym_eigenvalues: rejects non-square and asymmetric input") {
    CHECK_THROWS_AS(sym_eigenvalues(Matrix(2, 3)), DimensionError);

    Matrix m(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 2.0;
    CHECK_THROWS_AS(sym_eigenvalues(m), DimensionError);
}

TEST_CASE("sym_eigenvalues: matches characteristic-polynomial oracle on random 6x6 Gram matrices") {
    Rng rng(RngStream{42, 7});
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(6, 6);
        for (double& v : a.a) v = rng.normal(0.0, 1.0);
        const Matrix g = gram(a);
        const std::vector<double> ours = sym_eigenvalues(g);
        const std::vector<double> ref = oracles::charpoly_eigenvalues(g);
        REQUIRE(ref.size() == ours.size());
        for (std::size_t i = 0; i < ours.size(); ++i)
            CHECK(std::fabs(ours[i] - ref[i]) <= 1e-8 * std::max(1.0, std::fabs(ref[i])));
        // PSD input: no eigenvalue below -1e-9 * ||A||
        const double scale = frobenius_norm(g);
        CHECK(ours.front() >= -1e-9 * scale);
    }
}

TEST_CASE("sym_eigenvalues: recovers a planted spectrum Q' D Q") {
    Rng rng(RngStream{5, 1});
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 8;
        const Matrix q = oracles::random_orthogonal(n, rng);
        std::vector<double> planted(n);
        for (double& v : planted) v = 10.0 * rng.uniform01();
        std::sort(planted.begin(), planted.end());
        Matrix d(n, n);
        for (int i = 0; i < n; ++i) d(i, i) = planted[i];
        const Matrix a = matmul(matmul(transpose(q), d), q);
        const std::vector<double> ev = sym_eigenvalues(a);
        for (int i = 0; i < n; ++i) CHECK(std::fabs(ev[i] - planted[i]) <= 1e-8 * std::max(1.0, planted[i]));
    }
}

TEST_CASE("spd_solve: identity and scaled identity") {
    const std::vector<double> b = {3.0, -1.0, 2.0};
    CHECK(spd_solve(Matrix::identity(3), b) == b);

    Matrix a(2, 2);
    a(0, 0) = 4.0;
    a(1, 1) = 4.0;
    const std::vector<double> x = spd_solve(a, std::vector<double>{8.0, 4.0});
    CHECK(x[0] == doctest::Approx(2.0));
    CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("spd_solve: residual on random SPD systems up to 128x128") {
    Rng rng(RngStream{99, 3});
    for (int n : {8, 32, 128}) {
        Matrix b(n, n);
        for (double& v : b.a) v = rng.normal(0.0, 1.0);
        Matrix a = gram(b);
        for (int i = 0; i < n; ++i) a(i, i) += 0.5;
        std::vector<double> rhs(n);
        for (double& v : rhs) v = rng.normal(0.0, 1.0);
        const std::vector<double> x = spd_solve(a, rhs);
        const std::vector<double> ax = matvec(a, x);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err += (ax[i] - rhs[i]) * (ax[i] - rhs[i]);
        CHECK(std::sqrt(err) <= 1e-8 * norm(rhs));
    }
}

TEST_CASE("spd_solve: non-positive-definite pivot raises") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 1.0;
    a(1, 0) = 1.0;
    a(1, 1) = 1.0;  // rank 1
    CHECK_THROWS_AS(spd_solve(a, std::vector<double>{1.0, 1.0}), SingularMatrixError);
}

TEST_CASE("sample_normal: zero stddev, determinism, moments") {
    const RngStream s{123, 5};
    const std::vector<double> constant = sample_normal(s, 64, 2.5, 0.0);
    for (double v : constant) CHECK(v == 2.5);

    CHECK(sample_normal(s, 100, 0.0, 1.0) == sample_normal(s, 100, 0.0, 1.0));

    const std::size_t n = 100000;
    const std::vector<double> big = sample_normal(s, n, 0.0, 1.0);
    double mean = 0.0;
    for (double v : big) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : big) var += (v - mean) * (v - mean);
    var /= n - 1;
    CHECK(std::fabs(mean) <= 0.02);
    CHECK(std::fabs(std::sqrt(var) - 1.0) <= 0.02);
}

TEST_CASE("sample_folded_normal: non-negative, folded mean") {
    const std::vector<double> v = sample_folded_normal(RngStream{7, 7}, 100000, 1.0);
    double mean = 0.0;
    for (double x : v) {
        CHECK(x >= 0.0);
        mean += x;
    }
    mean /= v.size();
    // folded N(0,1) has mean sqrt(2/pi) ~ 0.79788
    CHECK(std::fabs(mean - std::sqrt(2.0 / 3.14159265358979)) <= 0.01);
}

TEST_CASE("RngStream: disjoint streams are uncorrelated") {
    const RngStream base{2024, 0};
    const std::vector<double> a = sample_normal(base.child(0), 100000, 0.0, 1.0);
    const std::vector<double> b = sample_normal(base.child(1), 100000, 0.0, 1.0);
    double corr = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) corr += a[i] * b[i];
    corr /= a.size();
    CHECK(std::fabs(corr) < 0.01);
}

TEST_CASE("RngStream: child derivation is stable and order-free") {
    const RngStream base{1, 1};
    CHECK(base.child(3).stream_id == base.child(3).stream_id);
    CHECK(base.child(3).stream_id != base.child(4).stream_id);
    CHECK(base.child(0).child(1).stream_id != base.child(1).child(0).stream_id);
}
