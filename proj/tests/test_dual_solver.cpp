#include "oracles.hpp"

#include "singpot/dual_solver.hpp"
#include "singpot/models.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace singpot;

namespace {

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("b = 0 gives the uniform density") {
    const auto t = table_model(1, 32);
    const auto sol = dual_solve(t, v1(0.0));
    CHECK(sol.converged);
    CHECK(std::abs(sol.lambda(0)) < 1e-12);
    CHECK(sol.alpha == doctest::Approx(1.0).epsilon(1e-12));
    const auto rho = density_from_dual(t, sol);
    CHECK((rho.values.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("Langevin point: b = coth 1 - 1") {
    const auto t = table_model(1, 64);
    const double b = oracle::langevin(1.0);
    CHECK(b == doctest::Approx(0.313035285499331).epsilon(1e-13));
    const double alpha1 = 1.0 - std::log(std::sinh(1.0));
    CHECK(alpha1 == doctest::Approx(0.838560638428804).epsilon(1e-13));

    CHECK(alpha_for_lambda(t, v1(1.0)) == doctest::Approx(alpha1).epsilon(1e-13));
    const auto [mass, moments] = forward_moment_map(t, alpha1, v1(1.0));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(moments(0) == doctest::Approx(b).epsilon(1e-13));

    const auto sol = dual_solve(t, v1(b));
    CHECK(sol.lambda(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.alpha == doctest::Approx(alpha1).epsilon(1e-9));
}

TEST_CASE("McMillan symmetry: sigma = 0 gives lambda_2 = 0") {
    const auto m = mcmillan_model(48, 48);
    const auto sol = dual_solve(m, v2(0.3, 0.0));
    CHECK(std::abs(sol.lambda(1)) < 1e-9);
}

TEST_CASE("alpha for the inverse-square entropy at lambda = 0") {
    const auto t = polynomial_interval_model("x", {0.0, 1.0}, 32, inverse_square());
    CHECK(alpha_for_lambda(t, v1(0.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse consistency on a lambda box") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    SUBCASE("interval, Shannon") {
        const auto t = table_model(1, 96);
        for (int i = 0; i < 30; ++i) {
            const Eigen::VectorXd lam = v1(u(rng));
            const double a = alpha_for_lambda(t, lam);
            const auto [mass, b] = forward_moment_map(t, a, lam);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
            const auto sol = dual_solve(t, b);
            CHECK(std::abs(sol.lambda(0) - lam(0)) <= 1e-8);
            CHECK(std::abs(sol.alpha - a) <= 1e-8);
        }
    }
    SUBCASE("McMillan, Shannon") {
        const auto m = mcmillan_model(32, 32);
        for (int i = 0; i < 20; ++i) {
            const Eigen::VectorXd lam = v2(u(rng), u(rng));
            const auto p = dual_point(m, lam);
            const auto sol = dual_solve(m, p.moments);
            CHECK((sol.lambda - lam).lpNorm<Eigen::Infinity>() <= 1e-8);
        }
    }
    SUBCASE("interval, inverse-square") {
        const auto t = polynomial_interval_model("x", {0.0, 1.0}, 64, inverse_square());
        for (int i = 0; i < 10; ++i) {
            const Eigen::VectorXd lam = v1(u(rng));
            const auto p = dual_point(t, lam);
            CHECK(p.mass == doctest::Approx(1.0).epsilon(1e-12));
            const auto sol = dual_solve(t, p.moments);
            CHECK(std::abs(sol.lambda(0) - lam(0)) <= 1e-8);
        }
    }
}

TEST_CASE("dual concavity and the residual contract") {
    const auto m = mcmillan_model(32, 32);
    for (const auto& b : {v2(0.1, 0.05), v2(0.6, -0.4), v2(-0.3, 0.2)}) {
        const auto sol = dual_solve(m, b);
        REQUIRE(sol.converged);
        CHECK(sol.moment_residual.lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, b.norm()));
        CHECK(std::abs(sol.normalization_residual) <= 1e-10);
        const auto p = dual_point(m, sol.lambda);
        const Eigen::LLT<Eigen::MatrixXd> llt(p.covariance);
        CHECK(llt.info() == Eigen::Success);
        const auto rho = density_from_dual(m, sol);
        CHECK(rho.values.minCoeff() > 0.0);
        const Eigen::VectorXd moments = m.constraints.values() * m.space.weights().cwiseProduct(rho.values);
        CHECK((moments - b).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("Shannon density is the exponential family") {
    const auto m = mcmillan_model(24, 24);
    const Eigen::VectorXd lam = v2(1.3, -0.7);
    const auto p = dual_point(m, lam);
    const Eigen::VectorXd y = m.constraints.values().transpose() * lam;
    const double z = m.space.integrate(y.array().exp().matrix());
    CHECK((p.rho - (y.array().exp() / z).matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exterior and boundary b are reported") {
    const auto t = table_model(1, 64);
    CHECK_THROWS_AS(dual_solve(t, v1(1.5)), SolverError);
    try {
        dual_solve(t, v1(1.5));
    } catch (const SolverError& e) {
        CHECK(e.kind() == SolverError::Kind::UnattainedDual);
        CHECK_FALSE(e.best().converged);
    }
    SolverOptions few;
    few.max_iterations = 1;
    CHECK_THROWS_AS(dual_solve(t, v1(0.9), few), SolverError);
}

TEST_CASE("warm starts reach the same solution") {
    const auto m = mcmillan_model(32, 32);
    const auto cold = dual_solve(m, v2(0.7, 0.5));
    const auto warm = dual_solve(m, v2(0.7, 0.5), {}, v2(3.0, 2.0));
    CHECK((cold.lambda - warm.lambda).norm() < 1e-8);
    CHECK(warm.iterations <= cold.iterations + 2);
}

TEST_CASE("continuity of b -> rho_b") {
    const auto m = mcmillan_model(32, 32);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd b = v2(0.3 * u(rng) + 0.1, 0.3 * u(rng));
        const Eigen::VectorXd d = v2(u(rng), u(rng)).normalized() * 1e-4;
        const auto r1 = density_from_dual(m, dual_solve(m, b));
        const auto r2 = density_from_dual(m, dual_solve(m, b + d));
        worst = std::max(worst, (r1.values - r2.values).cwiseAbs().maxCoeff() / 1e-4);
    }
    MESSAGE("empirical continuity constant C = " << worst);
    CHECK(std::isfinite(worst));
}
