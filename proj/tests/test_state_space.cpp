#include "oracles.hpp"

#include "singpot/errors.hpp"
#include "singpot/models.hpp"
#include "singpot/state_space.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace singpot;

namespace {

ConstraintSet poly_constraints(const StateSpace& space, std::vector<std::vector<double>> coeffs) {
    const int k = static_cast<int>(coeffs.size());
    return ConstraintSet::from_evaluator(space, k, [coeffs](std::span<const double> p, std::span<double> out) {
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            double v = 0.0;
            for (auto it = coeffs[i].rbegin(); it != coeffs[i].rend(); ++it) v = v * p[0] + *it;
            out[i] = v;
        }
    });
}

}  // namespace

TEST_CASE("interval space: normalisation and bad orders") {
    const auto s2 = build_interval_space(2, true);
    CHECK(s2.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
    const auto s16 = build_interval_space(16, false);
    CHECK(s16.total_mass() == doctest::Approx(2.0).epsilon(1e-13));
    CHECK_THROWS_AS(build_interval_space(1, true), ConfigError);
    CHECK_THROWS_AS(build_interval_space(0, true), ConfigError);
}

TEST_CASE("interval space: x^2 integrates to 1/3 under dx/2") {
    const auto s = build_interval_space(16, true);
    const Eigen::VectorXd x2 = s.nodes().row(0).transpose().array().square();
    CHECK(s.integrate(x2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("Gauss-Legendre exactness up to degree 2n-1") {
    for (int n : {2, 5, 16, 40}) {
        const auto s = build_interval_space(n, true);
        for (int p = 0; p <= 2 * n - 1; ++p) {
            const Eigen::VectorXd v = s.nodes().row(0).transpose().array().pow(p);
            const double exact = oracle::half_monomial_integral(p);
            CHECK(std::abs(s.integrate(v) - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
        }
    }
}

TEST_CASE("weights are positive and sum to the total mass") {
    for (const auto& s : {build_interval_space(7, true), build_mcmillan_space(8, 6), build_sphere_space(6, 9),
                          build_circle_space(12)}) {
        CHECK(s.weights().minCoeff() > 0.0);
        CHECK(std::abs(s.weights().sum() - s.total_mass()) <= 1e-12 * s.total_mass());
    }
    Eigen::MatrixXd nodes(1, 2);
    nodes << 0.0, 1.0;
    Eigen::VectorXd w(2);
    w << 0.5, 0.0;
    CHECK_THROWS(StateSpace(SpaceKind::Custom, nodes, w, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {false}));
}

TEST_CASE("McMillan space: total mass, <P2> and <P2^2>") {
    const auto s = build_mcmillan_space(32, 32);
    CHECK(std::abs(s.total_mass() - 4.0 * std::numbers::pi) <= 1e-10 * 4.0 * std::numbers::pi);
    Eigen::VectorXd a1(s.size());
    for (int j = 0; j < s.size(); ++j) {
        const double c = std::cos(s.nodes()(0, j));
        a1(j) = 0.5 * (3.0 * c * c - 1.0);
    }
    CHECK(std::abs(s.integrate(a1)) < 1e-12);
    CHECK(s.integrate(a1.array().square().matrix()) / s.total_mass() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(build_mcmillan_space(1, 8), ConfigError);
    CHECK_THROWS_AS(build_mcmillan_space(8, 1), ConfigError);
}

TEST_CASE("sphere space has mass 4 pi") {
    const auto s = build_sphere_space(16, 32);
    CHECK(s.total_mass() == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("constraint rows must not vanish") {
    const auto s = build_interval_space(8, true);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, s.size());
    v.row(0) = s.nodes().row(0);
    CHECK_THROWS(ConstraintSet::from_table(s, v));
}

TEST_CASE("pseudo-Haar check") {
    const auto s = build_interval_space(32, true);
    SUBCASE("{1, x} passes") {
        const auto r = pseudo_haar_check(s, poly_constraints(s, {{0.0, 1.0}}), 50);
        CHECK(r.pass);
        CHECK(r.min_singular_value > 1e-6);
    }
    SUBCASE("{1, x, 2x} fails") {
        const auto r = pseudo_haar_check(s, poly_constraints(s, {{0.0, 1.0}, {0.0, 2.0}}), 50);
        CHECK_FALSE(r.pass);
        CHECK(r.min_singular_value < 1e-10);
    }
    SUBCASE("McMillan {1, a1, a2} passes") {
        const auto m = mcmillan_model(16, 16);
        CHECK(pseudo_haar_check(m.space, m.constraints, 50).pass);
    }
}

TEST_CASE("orthonormalize") {
    const auto s = build_interval_space(24, true);
    const auto check_sqrt3x = [&](const ConstraintSet& c) {
        REQUIRE(c.count() == 1);
        const double sign = c.values()(0, s.size() - 1) > 0 ? 1.0 : -1.0;
        for (int j = 0; j < s.size(); ++j)
            CHECK(sign * c.values()(0, j) == doctest::Approx(std::sqrt(3.0) * s.nodes()(0, j)).epsilon(1e-10));
    };
    SUBCASE("x -> sqrt(3) x") { check_sqrt3x(orthonormalize(poly_constraints(s, {{0.0, 1.0}}), s)); }
    SUBCASE("x + 5 -> sqrt(3) x") { check_sqrt3x(orthonormalize(poly_constraints(s, {{5.0, 1.0}}), s)); }
    SUBCASE("post-conditions and idempotence") {
        const auto c = orthonormalize(poly_constraints(s, {{1.0, 1.0}, {0.0, 0.0, 1.0}, {0.0, 2.0, 0.0, 1.0}}), s);
        const Eigen::MatrixXd g = c.gram(s);
        CHECK(g.block(1, 0, 3, 1).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((g.block(1, 1, 3, 3) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
        const auto c2 = orthonormalize(c, s);
        for (int i = 0; i < 3; ++i) {
            const double sign = c2.values().row(i).dot(c.values().row(i)) > 0 ? 1.0 : -1.0;
            CHECK((sign * c2.values().row(i) - c.values().row(i)).cwiseAbs().maxCoeff() < 1e-10);
        }
        // evaluator stays in sync with the node table
        const double p[] = {0.3};
        const auto v = c.evaluate(p);
        CHECK(v.size() == 3);
    }
    SUBCASE("dependent functions are rejected") {
        CHECK_THROWS_AS(orthonormalize(poly_constraints(s, {{0.0, 1.0}, {0.0, 2.0}}), s), ConfigError);
    }
}

TEST_CASE("sup-norm estimates do not decrease under refinement") {
    double prev = 0.0;
    for (int n : {4, 8, 16, 32}) {
        const auto m = mcmillan_model(n, n);
        const double s = m.constraints.sup_norm()(1);
        CHECK(s >= prev - 1e-12);
        prev = s;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-9));
    const auto io = interval_orthonormal_model(8);
    CHECK(io.constraints.sup_vector_norm() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("Gram matrix of builtins is well conditioned") {
    for (const auto& name : builtin_names()) {
        const auto m = builtin_model(name, name == "mcmillan" ? 16 : 0);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.constraints.gram(m.space));
        const auto sv = svd.singularValues();
        CHECK(sv(sv.size() - 1) / sv(0) > 1e-10);
    }
}
