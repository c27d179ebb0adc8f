#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "ttmr/feature_map.hpp"

using namespace ttmr;

TEST_CASE("polynomial encode") {
    CHECK(encode(FeatureMap::polynomial(3), 2.0) == Vector((Vector(3) << 1, 2, 4).finished()));
    for (std::size_t s = 1; s <= 6; ++s) {
        const Vector v = encode(FeatureMap::polynomial(s), 0.0);
        CHECK(v(0) == 1.0);
        CHECK(v.tail(static_cast<Eigen::Index>(s) - 1).isZero());
    }
    SUBCASE("Vandermonde recurrence") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-3, 3);
        for (int rep = 0; rep < 50; ++rep) {
            const double x = u(rng);
            const Vector v = encode(FeatureMap::polynomial(7), x);
            for (Eigen::Index j = 0; j + 1 < v.size(); ++j) CHECK(v(j + 1) == doctest::Approx(x * v(j)).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(FeatureMap::polynomial(0), std::invalid_argument);
}

TEST_CASE("exponential encode") {
    CHECK(encode(FeatureMap::exponential(), 1.0) == Vector((Vector(3) << 1, 1, 0).finished()));
    CHECK(encode(FeatureMap::exponential(), std::exp(2.0))(2) == doctest::Approx(2.0));
    CHECK_THROWS_AS(encode(FeatureMap::exponential(), 0.0), std::domain_error);
    CHECK_THROWS_AS(encode(FeatureMap::exponential(), -1.0), std::domain_error);
    CHECK_THROWS_AS(encode(FeatureMap{FeatureKind::exponential, 4}, 1.0), std::invalid_argument);
}

TEST_CASE("encode_batch") {
    const auto map = FeatureMap::polynomial(4);
    SUBCASE("single sample reduces to encode") {
        const Matrix phi = encode_batch(map, Vector::Constant(1, 0.3));
        CHECK(phi.col(0) == encode(map, 0.3));
    }
    SUBCASE("constant column gives identical columns") {
        const Matrix phi = encode_batch(map, Vector::Constant(5, -0.7));
        for (Eigen::Index m = 1; m < 5; ++m) CHECK(phi.col(m) == phi.col(0));
        Eigen::FullPivLU<Matrix> lu(phi);
        CHECK(lu.rank() == 1);
    }
    SUBCASE("per-element oracle") {
        std::mt19937_64 rng(2);
        const Vector x = oracle::random_vector(rng, 30);
        const Matrix phi = encode_batch(map, x);
        for (Eigen::Index m = 0; m < 30; ++m)
            for (Eigen::Index j = 0; j < 4; ++j) CHECK(phi(j, m) == doctest::Approx(std::pow(x(m), j)).epsilon(1e-13));
    }
    SUBCASE("domain error names the row") {
        Vector x(3);
        x << 1.0, 2.0, -1.0;
        try {
            encode_batch(FeatureMap::exponential(), x);
            FAIL("expected domain_error");
        } catch (const std::domain_error& e) {
            CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        }
    }
}

TEST_CASE("scaler") {
    Matrix train(2, 1);
    train << 0.0, 10.0;
    const Scaler sc = scaler_fit(train);
    CHECK(sc.apply(Vector::Constant(1, 5.0), 0)(0) == doctest::Approx(0.0));
    const Matrix z = sc.apply(train);
    CHECK(z(0, 0) == -1.0);
    CHECK(z(1, 0) == 1.0);
    CHECK(sc.apply(Vector::Constant(1, 15.0), 0)(0) == doctest::Approx(2.0));
    CHECK(sc.apply(Vector::Constant(1, -5.0), 0)(0) == doctest::Approx(-2.0));

    SUBCASE("round trip") {
        std::mt19937_64 rng(3);
        const Matrix x = oracle::random_matrix(rng, 40, 3) * 7.0;
        const Scaler s = scaler_fit(x.topRows(25));
        const Matrix back = s.inverse(s.apply(x));
        CHECK((back - x).cwiseAbs().maxCoeff() <= 1e-12);
        const Matrix zt = s.apply(Matrix(x.topRows(25)));
        CHECK(zt.maxCoeff() <= 1.0 + 1e-15);
        CHECK(zt.minCoeff() >= -1.0 - 1e-15);
    }
    Matrix flat(3, 2);
    flat << 1, 2, 1, 3, 1, 4;
    CHECK_THROWS_AS(scaler_fit(flat), std::domain_error);
}
