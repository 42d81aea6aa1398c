#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "scs/errors.hpp"
#include "scs/gaussian_model.hpp"
#include "test_support.hpp"

using namespace scs;
using scs::test::rel_frobenius;

TEST_CASE("power_decay_spectrum values") {
    const Spectrum s = power_decay_spectrum(3, 1.0);
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(0.5));
    CHECK(s[2] == doctest::Approx(1.0 / 3.0));

    const Spectrum big = power_decay_spectrum(64, 3.0);
    CHECK(big[7] == 0.001953125);
}

TEST_CASE("power_decay_spectrum rejects bad arguments") {
    CHECK_THROWS_AS(power_decay_spectrum(4, 0.0), InvalidArgument);
    CHECK_THROWS_AS(power_decay_spectrum(4, -1.0), InvalidArgument);
    CHECK_THROWS_AS(power_decay_spectrum(0, 1.0), InvalidArgument);
}

TEST_CASE("power_decay_spectrum strictly decreasing") {
    for (double alpha : {0.1, 0.5, 1.0, 2.0, 3.0, 5.0}) {
        const Spectrum s = power_decay_spectrum(50, alpha);
        for (Eigen::Index i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);
    }
}

TEST_CASE("Spectrum validation and tail sums") {
    CHECK_THROWS_AS(Spectrum(Vector{{1.0, 2.0}}), InvalidArgument);
    CHECK_THROWS_AS(Spectrum(Vector{{1.0, -0.5}}), InvalidArgument);
    CHECK_THROWS_AS(Spectrum{Vector()}, InvalidArgument);
    const Spectrum s(Vector{{4.0, 2.0, 1.0}});
    CHECK(s.sum() == 7.0);
    CHECK(s.tail_sum(0) == 7.0);
    CHECK(s.tail_sum(1) == 3.0);
    CHECK(s.tail_sum(3) == 0.0);
}

TEST_CASE("make_gaussian on the identity") {
    const GaussianModel g = make_gaussian(Vector::Zero(2), Matrix::Identity(2, 2), 0.0);
    CHECK(g.spectrum()[0] == doctest::Approx(1.0));
    CHECK(g.spectrum()[1] == doctest::Approx(1.0));
    CHECK(g.log_det() == doctest::Approx(0.0));
    CHECK((g.pca_basis().cwiseAbs() - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("make_gaussian on a diagonal covariance") {
    const GaussianModel g = make_gaussian(Vector::Zero(2), Vector{{4.0, 1.0}}.asDiagonal().toDenseMatrix(), 0.0);
    CHECK(g.spectrum()[0] == doctest::Approx(4.0));
    CHECK(g.spectrum()[1] == doctest::Approx(1.0));
    CHECK(g.log_det() == doctest::Approx(std::log(4.0)));
}

TEST_CASE("make_gaussian recovers rotated factors") {
    const Matrix b = rotation_2d(std::numbers::pi / 6.0);
    const Matrix cov = b * Vector{{4.0, 1.0}}.asDiagonal() * b.transpose();
    const GaussianModel g = make_gaussian(Vector::Zero(2), cov, 0.0);
    CHECK(g.spectrum()[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(g.spectrum()[1] == doctest::Approx(1.0).epsilon(1e-12));
    const Matrix rebuilt = g.pca_basis() * g.spectrum().values().asDiagonal() * g.pca_basis().transpose();
    CHECK((rebuilt - cov).norm() < 1e-12);
}

TEST_CASE("make_gaussian invariants on random covariances") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const int n = 2 + static_cast<int>(seed % 12);
        const Matrix cov = test::random_spd(n, seed);
        const GaussianModel g = make_gaussian(Vector::Zero(n), cov, 0.0);
        const Matrix& b = g.pca_basis();
        CHECK(rel_frobenius(b * g.spectrum().values().asDiagonal() * b.transpose(), cov) < 1e-9);
        CHECK((b.transpose() * b - Matrix::Identity(n, n)).norm() < 1e-9);
        const Matrix& c = g.covariance();
        CHECK((c - c.transpose()).lpNorm<Eigen::Infinity>() <= 1e-12 * c.lpNorm<Eigen::Infinity>());
        for (Eigen::Index i = 1; i < n; ++i) CHECK(g.spectrum()[i] <= g.spectrum()[i - 1]);
        // Largest-magnitude entry of each eigenvector is positive.
        for (int col = 0; col < n; ++col) {
            Eigen::Index arg = 0;
            b.col(col).cwiseAbs().maxCoeff(&arg);
            CHECK(b(arg, col) > 0.0);
        }
        CHECK(g.log_det() == doctest::Approx(std::log(cov.determinant())).epsilon(1e-9));
    }
}

TEST_CASE("make_gaussian rejects invalid covariances") {
    Matrix asym{{1.0, 0.5}, {0.0, 1.0}};
    CHECK_THROWS_AS(make_gaussian(asym), InvalidCovariance);
    Matrix neg{{1.0, 0.0}, {0.0, -0.5}};
    CHECK_THROWS_AS(make_gaussian(neg), InvalidCovariance);
    CHECK_THROWS_AS(make_gaussian(Vector::Zero(3), Matrix::Identity(2, 2)), InvalidArgument);
    CHECK_THROWS_AS(make_gaussian(Matrix::Identity(2, 3)), InvalidArgument);
}

TEST_CASE("make_gaussian floors small eigenvalues for the inverse only") {
    const Matrix cov = Vector{{1.0, 0.0}}.asDiagonal();
    const GaussianModel raw = make_gaussian(Vector::Zero(2), cov, 0.0);
    CHECK_FALSE(raw.invertible());
    CHECK(raw.spectrum()[1] == 0.0);

    const GaussianModel floored = make_gaussian(Vector::Zero(2), cov, 1e-6);
    CHECK(floored.invertible());
    CHECK(floored.spectrum()[1] == 0.0);
    CHECK(floored.eigenvalue_floor() == doctest::Approx(0.5e-6));
    CHECK(floored.log_det() == doctest::Approx(std::log(0.5e-6)));
}

TEST_CASE("rotate_spectrum examples") {
    const Spectrum iso(Vector{{1.0, 1.0}});
    CHECK((rotate_spectrum(iso, rotation_2d(0.7)) - Matrix::Identity(2, 2)).norm() < 1e-12);
    const Spectrum s(Vector{{4.0, 1.0}});
    CHECK((rotate_spectrum(s, Matrix::Identity(2, 2)) - Matrix(Vector{{4.0, 1.0}}.asDiagonal())).norm() < 1e-12);
    CHECK((rotate_spectrum(s, rotation_2d(std::numbers::pi / 2)) - Matrix(Vector{{1.0, 4.0}}.asDiagonal())).norm() < 1e-12);
    const Matrix r = rotate_spectrum(s, rotation_2d(0.3));
    CHECK(r(0, 1) == r(1, 0));
    CHECK_THROWS_AS(rotate_spectrum(s, Matrix{{1.0, 0.1}, {0.0, 1.0}}), InvalidArgument);
}

TEST_CASE("rotation_2d examples") {
    CHECK((rotation_2d(0.0) - Matrix::Identity(2, 2)).norm() == 0.0);
    const Matrix quarter = rotation_2d(std::numbers::pi / 2);
    CHECK((quarter - Matrix{{0.0, -1.0}, {1.0, 0.0}}).norm() < 1e-15);
    const Matrix eighth = rotation_2d(std::numbers::pi / 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(eighth(i / 2, i % 2)) == doctest::Approx(std::sqrt(2.0) / 2));
    for (double t : {0.1, 1.0, 2.5, -0.7}) CHECK(std::abs(rotation_2d(t).determinant() - 1.0) < 1e-12);
}

TEST_CASE("anti_diagonal_pair examples") {
    auto [a, b] = anti_diagonal_pair(2, Spectrum(Vector{{4.0, 1.0}}));
    CHECK((a.covariance() - Matrix(Vector{{4.0, 1.0}}.asDiagonal())).norm() == 0.0);
    CHECK((b.covariance() - Matrix(Vector{{1.0, 4.0}}.asDiagonal())).norm() == 0.0);

    auto [c, d] = anti_diagonal_pair(3, Spectrum(Vector::Ones(3)));
    CHECK((c.covariance() - Matrix::Identity(3, 3)).norm() == 0.0);
    CHECK((d.covariance() - Matrix::Identity(3, 3)).norm() == 0.0);

    const Spectrum s = power_decay_spectrum(4, 3.0);
    auto [e, f] = anti_diagonal_pair(4, s);
    for (int i = 0; i < 4; ++i) CHECK(f.covariance()(i, i) == s[3 - i]);
    CHECK((f.covariance() - Matrix(f.covariance().diagonal().asDiagonal())).norm() == 0.0);
    CHECK(e.mean().isZero());
    CHECK(f.mean().isZero());

    CHECK_THROWS_AS(anti_diagonal_pair(1, Spectrum(Vector::Ones(1))), InvalidArgument);
}

TEST_CASE("sample from a zero covariance") {
    Rng rng(3);
    const Matrix x = sample(make_gaussian(Vector::Zero(3), Matrix::Zero(3, 3), 0.0), 20, rng);
    CHECK(x.rows() == 3);
    CHECK(x.cols() == 20);
    CHECK(x.isZero());
}

TEST_CASE("sample N(0, I2) covariance") {
    Rng rng(11);
    const Matrix x = sample(make_gaussian(Matrix::Identity(2, 2)), 100000, rng);
    CHECK(rel_frobenius(test::empirical_covariance(x), Matrix::Identity(2, 2)) < 0.03);
}

TEST_CASE("sample is deterministic and honours the mean") {
    const Vector mu{{1.0, -2.0, 3.0}};
    const GaussianModel g = make_gaussian(mu, test::random_spd(3, 5));
    Rng r1(42);
    Rng r2(42);
    const Matrix a = sample(g, 50, r1);
    const Matrix b = sample(g, 50, r2);
    CHECK(a == b);
    Rng r3(9);
    const Matrix many = sample(g, 200000, r3);
    CHECK((many.rowwise().mean() - mu).norm() < 0.02);
}

TEST_CASE("sampling consistency on random models") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const int n = 3 + static_cast<int>(seed);
        const Matrix cov = test::random_spd(n, seed * 17);
        Rng rng(seed);
        const Matrix x = sample(make_gaussian(cov), 100000, rng);
        CHECK(rel_frobenius(test::empirical_covariance(x), cov) < 0.05);
    }
}

TEST_CASE("round trip through rotate_spectrum") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const int n = 2 + static_cast<int>(seed);
        const Spectrum s = power_decay_spectrum(n, 1.0 + 0.2 * static_cast<double>(seed));
        const Matrix cov = rotate_spectrum(s, test::random_orthonormal(n, seed));
        const GaussianModel g = make_gaussian(cov, 0.0);
        CHECK((g.spectrum().values() - s.values()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(rel_frobenius(rotate_spectrum(g.spectrum(), g.pca_basis()), cov) < 1e-9);
    }
}

TEST_CASE("mahalanobis and precision agree with an explicit inverse") {
    const Matrix cov = test::random_spd(5, 77);
    const Vector mu = Vector::LinSpaced(5, -1.0, 1.0);
    const GaussianModel g = make_gaussian(mu, cov, 0.0);
    const Vector x = Vector::LinSpaced(5, 2.0, -3.0);
    const Matrix inv = cov.inverse();
    CHECK(g.mahalanobis_squared(x) == doctest::Approx((x - mu).dot(inv * (x - mu))).epsilon(1e-10));
    CHECK(rel_frobenius(g.precision(), inv) < 1e-10);
}

TEST_CASE("Gmm requires a shared dimension") {
    CHECK_THROWS_AS(Gmm({}), InvalidArgument);
    CHECK_THROWS_AS(Gmm({make_gaussian(Matrix::Identity(2, 2)), make_gaussian(Matrix::Identity(3, 3))}),
                    InvalidArgument);
    const Gmm gmm({make_gaussian(Matrix::Identity(2, 2)), make_gaussian(Matrix::Identity(2, 2) * 2.0)});
    CHECK(gmm.size() == 2);
    CHECK(gmm.dimension() == 2);
}

TEST_CASE("Gmm container round trip and layout") {
    const Gmm gmm({make_gaussian(Vector{{1.0, 2.0, 3.0}}, test::random_spd(3, 1)),
                   make_gaussian(Vector{{-1.0, 0.5, 0.0}}, test::random_spd(3, 2))});
    std::stringstream buf;
    save_gmm(gmm, buf);
    const std::string bytes = buf.str();
    CHECK(bytes.size() == 16 + 2 * (3 + 9) * 8);
    CHECK(bytes.substr(0, 4) == "SCSG");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[8]) == 3);
    CHECK(static_cast<unsigned char>(bytes[12]) == 2);

    const Gmm back = load_gmm(buf);
    REQUIRE(back.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(back[j].mean() == gmm[j].mean());
        CHECK(back[j].covariance() == gmm[j].covariance());
    }
}

TEST_CASE("Gmm container errors") {
    std::stringstream bad("XXXX0000");
    CHECK_THROWS_AS(load_gmm(bad), ParseError);

    const Gmm gmm({make_gaussian(Matrix::Identity(2, 2))});
    std::stringstream buf;
    save_gmm(gmm, buf);
    std::string bytes = buf.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_gmm(truncated), TruncatedData);

    bytes[4] = 9;
    std::stringstream version(bytes);
    CHECK_THROWS_AS(load_gmm(version), ParseError);
}
