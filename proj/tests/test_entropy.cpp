#include "singpot/entropy.hpp"
#include "singpot/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace singpot;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> x;
    for (int i = 0; i < n; ++i) x.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return x;
}

void check_calculus(const EntropyFunction& phi) {
    double prev_inv = -1e300;
    for (double x : log_grid(1e-6, 1e6, 61)) {
        const double y = phi.derivative(x);
        CHECK(phi.inverse_derivative(y) == doctest::Approx(x).epsilon(1e-10));
        const double z = phi.inverse_derivative(y);
        CHECK(phi.conjugate(y) == doctest::Approx(y * z - phi.value(z)).epsilon(1e-10).scale(1.0));
        CHECK(z > prev_inv);
        prev_inv = z;
        CHECK(phi.second_derivative(x) > 0.0);
    }
    double prev_ratio = -1e300;
    for (int n = 2; n <= 6; ++n) {
        const double x = std::pow(10.0, n);
        const double r = phi.value(x) / x;
        CHECK(r > prev_ratio);
        prev_ratio = r;
    }
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ux(-8.0, 6.0), uy(-20.0, 20.0);
    for (int i = 0; i < 500; ++i) {
        const double x = std::exp(ux(rng)), y = uy(rng);
        CHECK(phi.value(x) + phi.conjugate(y) >= x * y - 1e-9 * (1.0 + std::abs(x * y)));
    }
    CHECK_THROWS_AS(phi.value(-1.0), std::domain_error);
}

}  // namespace

TEST_CASE("Shannon closed forms") {
    const auto phi = shannon();
    CHECK(phi->value(1.0) == 0.0);
    CHECK(phi->value(0.0) == 0.0);
    CHECK(phi->inverse_derivative(1.0) == doctest::Approx(1.0));
    CHECK(phi->conjugate(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(phi->derivative(2.0) == doctest::Approx(std::log(2.0) + 1.0));
    CHECK(phi->second_derivative(4.0) == doctest::Approx(0.25));
    CHECK(phi->is_shannon());
    check_calculus(*phi);
}

TEST_CASE("inverse-square entropy") {
    const auto phi = inverse_square();
    CHECK(phi->inverse_derivative(1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(phi->value(1.0) == doctest::Approx(2.0));
    CHECK(phi->conjugate(1.0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::isinf(phi->value(0.0)));
    CHECK_FALSE(phi->is_shannon());
    check_calculus(*phi);
}

TEST_CASE("tabulated entropy reconstructs x ln x") {
    std::vector<double> x, v;
    for (double t : log_grid(1e-4, 1e3, 200)) {
        x.push_back(t);
        v.push_back(t * std::log(t));
    }
    const auto phi = tabulated_entropy(x, v, "shannon-table");
    for (double t : {0.01, 0.1, 0.5, 1.0, 3.0, 50.0}) {
        CHECK(phi->value(t) == doctest::Approx(t * std::log(t)).epsilon(1e-3).scale(1.0));
        CHECK(phi->derivative(t) == doctest::Approx(std::log(t) + 1.0).epsilon(1e-2).scale(1.0));
    }
    for (double y : {-10.0, -1.0, 0.0, 2.0, 6.0}) {
        const double z = phi->inverse_derivative(y);
        CHECK(phi->derivative(z) == doctest::Approx(y).epsilon(1e-10).scale(1.0));
    }
    CHECK_THROWS(tabulated_entropy({1.0, 2.0}, {0.0, 1.0}));
    // non-convex data
    CHECK_THROWS(tabulated_entropy({1, 2, 3, 4, 5}, {0, 1, 1.5, 3, 2}));
}

TEST_CASE("entropy lookup") {
    CHECK(entropy_by_name("shannon")->is_shannon());
    CHECK(entropy_by_name("inverse_square")->label() == inverse_square()->label());
    CHECK_THROWS(entropy_by_name("renyi"));
}
