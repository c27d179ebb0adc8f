#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "ttmr/metrics.hpp"

#include <algorithm>
#include <numeric>

using namespace ttmr;

namespace {

double loop_mean(const Vector& v) {
    double s = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i);
    return s / double(v.size());
}

double loop_cov(const Vector& a, const Vector& b) {
    const double ma = loop_mean(a), mb = loop_mean(b);
    double s = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += (a(i) - ma) * (b(i) - mb);
    return s / double(a.size() - 1);
}

}  // namespace

TEST_CASE("mse") {
    const Vector y = Vector::LinSpaced(5, 0, 1);
    CHECK(mse(y, y) == 0.0);
    CHECK(mse(Vector::Zero(2), Vector::Ones(2)) == 1.0);
    std::mt19937_64 rng(1);
    const Vector a = oracle::random_vector(rng, 50), b = oracle::random_vector(rng, 50);
    double s = 0;
    for (Eigen::Index i = 0; i < 50; ++i) s += (a(i) - b(i)) * (a(i) - b(i));
    CHECK(mse(a, b) == doctest::Approx(s / 50).epsilon(1e-14));
    CHECK_THROWS(mse(Vector(0), Vector(0)));
    CHECK_THROWS(mse(Vector::Ones(2), Vector::Ones(3)));
}

TEST_CASE("explained variance") {
    std::mt19937_64 rng(2);
    const Vector y = oracle::random_vector(rng, 40);
    CHECK(explained_variance(y, y) == doctest::Approx(1.0));
    CHECK(explained_variance(y, (y.array() + 3.5).matrix()) == doctest::Approx(1.0));
    CHECK(std::abs(explained_variance(y, Vector::Constant(40, y.mean()))) <= 1e-14);
    const Vector yh = y + 0.3 * oracle::random_vector(rng, 40);
    const Vector e = y - yh;
    CHECK(explained_variance(y, yh) == doctest::Approx(1 - loop_cov(e, e) / loop_cov(y, y)).epsilon(1e-12));
    CHECK_THROWS_AS(explained_variance(Vector::Ones(4), Vector::Zero(4)), std::domain_error);
    CHECK_THROWS(explained_variance(Vector::Ones(1), Vector::Ones(1)));
}

TEST_CASE("spcc") {
    std::mt19937_64 rng(3);
    const Vector y = oracle::random_vector(rng, 30);
    CHECK(spcc(y, (2 * y.array() + 3).matrix()) == doctest::Approx(1.0));
    CHECK(spcc(y, -y) == doctest::Approx(-1.0));
    const Vector z = oracle::random_vector(rng, 30);
    CHECK(spcc(y, z) == doctest::Approx(loop_cov(y, z) / std::sqrt(loop_cov(y, y) * loop_cov(z, z))).epsilon(1e-12));
    for (int rep = 0; rep < 50; ++rep) {
        const Vector a = oracle::random_vector(rng, 3), b = oracle::random_vector(rng, 3);
        const double r = spcc(a, b);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
    }
    CHECK_THROWS_AS(spcc(y, Vector::Constant(30, 1.0)), std::domain_error);
    CHECK_THROWS_AS(spcc(Vector::Constant(30, 1.0), y), std::domain_error);
}

TEST_CASE("r squared") {
    std::mt19937_64 rng(4);
    const Vector y = oracle::random_vector(rng, 25);
    CHECK(r_squared(y, y) == doctest::Approx(1.0));
    CHECK(std::abs(r_squared(y, Vector::Constant(25, y.mean()))) <= 1e-14);
    const Vector biased = (y.array() + 0.4).matrix();
    CHECK(r_squared(y, biased) < 1.0);
    CHECK(explained_variance(y, biased) == doctest::Approx(1.0));
    CHECK(r_squared(y, oracle::random_vector(rng, 25)) <= 1.0);
    CHECK_THROWS_AS(r_squared(Vector::Zero(3), Vector::Ones(3)), std::domain_error);
}

TEST_CASE("fit line") {
    std::mt19937_64 rng(5);
    const Vector y = oracle::random_vector(rng, 60);
    auto l = fit_line(y, y);
    CHECK(l.slope == doctest::Approx(1.0));
    CHECK(std::abs(l.intercept) <= 1e-14);
    l = fit_line(y, Vector::Constant(60, 2.25));
    CHECK(std::abs(l.slope) <= 1e-14);
    CHECK(l.intercept == doctest::Approx(2.25));
    const Vector yh = 0.7 * y + oracle::random_vector(rng, 60);
    l = fit_line(y, yh);
    const double m = loop_cov(y, yh) / loop_cov(y, y);
    CHECK(l.slope == doctest::Approx(m).epsilon(1e-12));
    CHECK(l.intercept == doctest::Approx(loop_mean(yh) - m * loop_mean(y)).epsilon(1e-12));
    CHECK_THROWS_AS(fit_line(Vector::Ones(5), y.head(5)), std::domain_error);
}

TEST_CASE("metric invariants") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 30; ++rep) {
        const Vector y = oracle::random_vector(rng, 20);
        Vector yh = y + 0.5 * oracle::random_vector(rng, 20);
        SUBCASE("unbiased predictions: score equals R^2") {
            yh.array() += (y - yh).mean();
            CHECK(explained_variance(y, yh) == doctest::Approx(r_squared(y, yh)).epsilon(1e-10));
        }
        SUBCASE("spcc^2 is R^2 of the best affine fit") {
            const Line l = fit_line(yh, y);
            const Vector affine = (l.slope * yh.array() + l.intercept).matrix();
            CHECK(spcc(y, yh) * spcc(y, yh) == doctest::Approx(r_squared(y, affine)).epsilon(1e-10));
        }
        SUBCASE("permutation invariance") {
            std::vector<Eigen::Index> perm(20);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            Vector yp(20), yhp(20);
            for (Eigen::Index i = 0; i < 20; ++i) {
                yp(i) = y(perm[std::size_t(i)]);
                yhp(i) = yh(perm[std::size_t(i)]);
            }
            const auto a = evaluate(y, yh), b = evaluate(yp, yhp);
            CHECK(a.mse == doctest::Approx(b.mse).epsilon(1e-12));
            CHECK(a.score == doctest::Approx(b.score).epsilon(1e-12));
            CHECK(a.spcc == doctest::Approx(b.spcc).epsilon(1e-12));
            CHECK(a.r_squared == doctest::Approx(b.r_squared).epsilon(1e-12));
            CHECK(a.fit_slope == doctest::Approx(b.fit_slope).epsilon(1e-12));
        }
    }
}

TEST_CASE("evaluate") {
    std::mt19937_64 rng(7);
    const Vector y = oracle::random_vector(rng, 30), yh = y + 0.1 * oracle::random_vector(rng, 30);
    const auto r = evaluate(y, yh);
    CHECK(r.mse == mse(y, yh));
    CHECK(r.score == explained_variance(y, yh));
    CHECK(r.spcc == spcc(y, yh));
    CHECK(r.r_squared == r_squared(y, yh));
    CHECK(r.fit_slope == fit_line(y, yh).slope);
    const auto flat = evaluate(Vector::Ones(4), y.head(4));
    CHECK(std::isnan(flat.score));
    CHECK(std::isnan(flat.r_squared));
    CHECK(flat.mse == mse(Vector::Ones(4), y.head(4)));
    CHECK(std::isnan(evaluate(y, Vector::Zero(30)).spcc));
}
