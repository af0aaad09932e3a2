#include "oracles.hpp"

#include "singpot/errors.hpp"
#include "singpot/mean_field.hpp"
#include "singpot/models.hpp"
#include "singpot/singular_potential.hpp"

#include <doctest.h>

#include <cmath>

using namespace singpot;

namespace {

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

MeanFieldModel orthonormal_1d(double T, double h = 0.0) {
    MeanFieldModel mf{interval_orthonormal_model(64), T, Eigen::MatrixXd::Identity(1, 1), {}};
    if (h != 0.0) mf.H = v1(h);
    return mf;
}

}  // namespace

TEST_CASE("validation") {
    auto mf = orthonormal_1d(1.0);
    CHECK_NOTHROW(mf.validate());
    mf.T = 0.0;
    CHECK_THROWS_AS(mf.validate(), ConfigError);
    mf.T = 1.0;
    mf.K = -Eigen::MatrixXd::Identity(1, 1);
    CHECK_THROWS_AS(mf.validate(), ConfigError);
    mf.K = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(mf.validate(), ConfigError);
    mf.K = Eigen::MatrixXd::Identity(1, 1);
    mf.H = v2(1, 1);
    CHECK_THROWS_AS(mf.validate(), ConfigError);
}

TEST_CASE("Onsager dual energy against the closed form") {
    const auto mf = orthonormal_1d(1.0);
    CHECK(std::abs(onsager_dual_energy(mf, v1(0.0))) < 1e-14);
    // a = sqrt(3) x, lambda = 1: Z = sinh(s)/s, b = s L(s) with s = sqrt 3
    const double s = std::sqrt(3.0);
    const double z = std::sinh(s) / s;
    const double b = s * oracle::langevin(s);
    const double expected = (b - std::log(z)) - 0.5 * b * b;
    CHECK(onsager_dual_energy(mf, v1(1.0)) == doctest::Approx(expected).epsilon(1e-12));

    const double h = 1e-6;
    for (double l : {-2.0, 0.3, 1.7}) {
        const double fd = (onsager_dual_energy(mf, v1(l + h)) - onsager_dual_energy(mf, v1(l - h))) / (2 * h);
        CHECK(onsager_dual_gradient(mf, v1(l))(0) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("dual energy equals the primal free energy at b^lambda") {
    const auto m = mcmillan_model(32, 32);
    MeanFieldModel mf{m, 0.7, Eigen::Matrix2d{{2.0, 0.3}, {0.3, 1.0}}, v2(0.1, -0.05)};
    const Eigen::VectorXd lam = v2(1.2, -0.4);
    const auto p = dual_point(m, lam);
    const double primal = mf.T * psi(m, p.moments).psi - 0.5 * p.moments.dot(mf.K * p.moments) - mf.H.dot(p.moments);
    CHECK(onsager_dual_energy(mf, lam) == doctest::Approx(primal).epsilon(1e-9));
}

TEST_CASE("high temperature: unique isotropic critical point") {
    const auto r = minimize_free_energy(orthonormal_1d(5.0));
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].lambda.norm() < 1e-9);
    CHECK(r.points[0].kind == CriticalKind::Minimum);
    CHECK(r.global_minimizer == 0);
    CHECK(r.converged_starts > 0);
}

TEST_CASE("low temperature: symmetric pair of minimisers and an unstable origin") {
    const auto r = minimize_free_energy(orthonormal_1d(0.5));
    REQUIRE(r.global_minimizer >= 0);
    const auto& g = r.points[static_cast<std::size_t>(r.global_minimizer)];
    CHECK(std::abs(g.b(0)) > 0.1);
    CHECK(g.kind == CriticalKind::Minimum);
    // self-consistency: T lambda = K b
    CHECK(0.5 * g.lambda(0) == doctest::Approx(g.b(0)).epsilon(1e-9));
    bool origin = false, mirror = false;
    for (const auto& p : r.points) {
        if (p.lambda.norm() < 1e-8) {
            origin = true;
            CHECK(p.kind == CriticalKind::Maximum);
        }
        if (std::abs(p.lambda(0) + g.lambda(0)) < 1e-6) mirror = true;
        CHECK(critical_point_residual(orthonormal_1d(0.5), p.lambda) < 1e-9);
    }
    CHECK(origin);
    CHECK(mirror);
}

TEST_CASE("small field breaks the symmetry") {
    const auto r = minimize_free_energy(orthonormal_1d(5.0, 0.1));
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].b(0) > 0.0);
    // T lambda = b + H, to first order b = H / (T C^{-1} - 1) = 0.1 / 4
    CHECK(r.points[0].b(0) == doctest::Approx(0.025).epsilon(0.02));
}

TEST_CASE("McMillan: sigma-reflection symmetry of the critical set") {
    const auto m = mcmillan_model(32, 32);
    MeanFieldModel mf{m, 0.05, Eigen::Vector2d(1.0, 1.0).asDiagonal(), {}};
    MeanFieldOptions opts;
    opts.n_starts = 48;
    const auto r = minimize_free_energy(mf, opts);
    // multi-start may miss a saddle, but every minimiser must have its mirror
    for (const auto& p : r.points) {
        if (p.kind != CriticalKind::Minimum) continue;
        const Eigen::VectorXd ref = v2(p.lambda(0), -p.lambda(1));
        bool found = false;
        for (const auto& q : r.points) found = found || (q.lambda - ref).norm() < 1e-5;
        CHECK(found);
    }
    for (const auto& p : r.points) CHECK(p.residual < 1e-8);
    // energies are invariant under the reflection
    CHECK(onsager_dual_energy(mf, v2(2.0, 1.5)) == doctest::Approx(onsager_dual_energy(mf, v2(2.0, -1.5))).epsilon(1e-12));
}

TEST_CASE("stability thresholds") {
    const auto hi = stability_report(orthonormal_1d(5.0));
    CHECK(hi.global_bound == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(hi.local_bound == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hi.verdict == Stability::GloballyStable);
    CHECK(stability_report(orthonormal_1d(0.5)).verdict == Stability::Unstable);
    CHECK(stability_report(orthonormal_1d(2.0)).verdict == Stability::Indeterminate);
    MeanFieldModel raw{table_model(1), 1.0, Eigen::MatrixXd::Identity(1, 1), {}};
    CHECK_THROWS_AS(stability_report(raw), PreconditionError);
    CHECK(to_string(Stability::GloballyStable) == "globally_stable");
}

TEST_CASE("critical-point residuals") {
    const auto mf = orthonormal_1d(1.0);
    const auto m = mf.model;
    const auto grad_f = [](const Eigen::VectorXd& b) -> Eigen::VectorXd { return -b; };
    // lambda = 0 is critical for f = -1/2 b^2
    CHECK(critical_point_residual(m, v1(0.0), grad_f) < 1e-14);
    const auto p = dual_point(m, v1(1.0));
    CHECK(critical_point_residual(m, v1(1.0), grad_f) == doctest::Approx(std::abs(1.0 - p.moments(0))).epsilon(1e-12));
    CHECK(critical_point_residual(mf, v1(1.0)) == doctest::Approx(std::abs(1.0 - p.moments(0))).epsilon(1e-12));
}

TEST_CASE("bifurcation temperature of the orthonormal model") {
    const double tc = bifurcation_temperature(orthonormal_1d(1.0), 0.5, 3.0, 1e-3);
    CHECK(std::abs(tc - 1.0) < 0.05);
    CHECK_THROWS(bifurcation_temperature(orthonormal_1d(1.0), 2.0, 3.0));
}

TEST_CASE("constrained maximum entropy") {
    SUBCASE("sphere chain, |b| = 0.5 gives |lambda| = inverse Langevin(0.5)") {
        const auto m = sphere_chain_model(32);
        const auto g = [](const Eigen::VectorXd& b) { return b.squaredNorm() - 0.25; };
        const auto dg = [](const Eigen::VectorXd& b) -> Eigen::VectorXd { return 2.0 * b; };
        const auto r = constrained_max_entropy(m, g, dg);
        CHECK(std::abs(r.constraint_value) < 1e-10);
        CHECK(r.b.norm() == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(r.lambda.norm() == doctest::Approx(oracle::inverse_langevin(0.5)).epsilon(1e-6));
        CHECK(oracle::inverse_langevin(0.5) == doctest::Approx(1.796755985).epsilon(1e-8));
        // lambda parallel to b
        CHECK(std::abs(r.lambda.normalized().dot(r.b.normalized()) - 1.0) < 1e-8);
    }
    SUBCASE("r = 0 returns the isotropic state") {
        const auto m = sphere_chain_model(16);
        const auto g = [](const Eigen::VectorXd& b) { return b(0); };
        const auto dg = [](const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::Vector3d(1, 0, 0); };
        const auto r = constrained_max_entropy(m, g, dg);
        CHECK(r.b.norm() < 1e-9);
        CHECK(r.lambda.norm() < 1e-8);
    }
    SUBCASE("circle phase, |b| = 0.6: I1/I0 oracle") {
        const auto m = circle_phase_model(128);
        const auto g = [](const Eigen::VectorXd& b) { return b.squaredNorm() - 0.36; };
        const auto dg = [](const Eigen::VectorXd& b) -> Eigen::VectorXd { return 2.0 * b; };
        const auto r = constrained_max_entropy(m, g, dg);
        const double want = oracle::bisect(
            [](double l) { return std::cyl_bessel_i(1.0, l) / std::cyl_bessel_i(0.0, l) - 0.6; }, 1e-9, 50.0);
        CHECK(r.lambda.norm() == doctest::Approx(want).epsilon(1e-7));
        CHECK(r.kkt_residual < 1e-8);
    }
    SUBCASE("infeasible constraint is reported") {
        const auto m = sphere_chain_model(8);
        const auto g = [](const Eigen::VectorXd& b) { return b.squaredNorm() + 1.0; };
        const auto dg = [](const Eigen::VectorXd& b) -> Eigen::VectorXd { return 2.0 * b; };
        CHECK_THROWS_AS(constrained_max_entropy(m, g, dg), ConfigError);
    }
}
