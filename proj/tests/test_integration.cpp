// End-to-end checks that cross module boundaries.

#include "oracles.hpp"

#include "singpot/approximation.hpp"
#include "singpot/config.hpp"
#include "singpot/mean_field.hpp"
#include "singpot/models.hpp"
#include "singpot/moment_geometry.hpp"
#include "singpot/singular_potential.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace singpot;

namespace {

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("config text to model to psi agrees with the builtin model") {
    const auto cfg = parse_model_config("[space]\nkind=mcmillan\nn_theta=32\nn_x=32\n[constraints]\nfamily=mcmillan\n");
    const auto a = build_model(cfg);
    const auto b = mcmillan_model(32, 32);
    for (const auto& p : {v2(0.1, 0.2), v2(-0.3, 0.1), v2(0.7, -0.5)}) {
        CHECK(psi(a, p, cfg.solver).psi == doctest::Approx(psi(b, p).psi).epsilon(1e-12));
    }
}

TEST_CASE("Taylor polynomial approximates psi to fifth order near the origin") {
    const auto m = mcmillan_model(48, 48);
    const auto q = taylor4(m);
    const Eigen::VectorXd dir = v2(0.6, 0.8);
    double prev_ratio = 0.0;
    for (double t : {0.04, 0.02, 0.01}) {
        const double err = std::abs(psi(m, t * dir).psi - q.evaluate(t * dir));
        const double ratio = err / std::pow(t, 5);
        CHECK(ratio < 1e3);
        if (prev_ratio > 0.0) CHECK(ratio == doctest::Approx(prev_ratio).epsilon(0.35));
        prev_ratio = ratio;
    }
}

TEST_CASE("psi blows up along rays toward the boundary") {
    const auto m = mcmillan_model(48, 48);
    for (int r = 0; r < 8; ++r) {
        const double ang = 2.0 * std::numbers::pi * r / 8.0;
        const Eigen::VectorXd u = v2(std::cos(ang), std::sin(ang));
        // exit distance along the ray from the closed form
        double lo = 0.0, hi = 3.0;
        for (int i = 0; i < 100; ++i) {
            const double mid = 0.5 * (lo + hi);
            (m.closed_form_q->contains(mid * u) ? lo : hi) = mid;
        }
        std::vector<double> vals;
        for (double f : {0.5, 0.7, 0.8, 0.9, 0.95}) vals.push_back(psi(m, f * lo * u).psi);
        for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] > vals[i - 1]);
        CHECK(vals.back() > vals.front() + 0.1);
    }
}

TEST_CASE("Yosida prox of an exterior point lands inside Q near the boundary") {
    const auto m = mcmillan_model(48, 48);
    const Eigen::VectorXd b = v2(1.4, 0.0);
    const auto y = yosida(m, b, 1000.0);
    CHECK(m.closed_form_q->contains(y.prox));
    CHECK(m.closed_form_q->signed_distance(y.prox) < 0.05);
    CHECK(membership(m.space, m.constraints, y.prox).verdict != Verdict::Outside);
}

TEST_CASE("mean-field minimiser is a constrained entropy maximiser on its own level set") {
    // For K = I the minimiser b* maximises entropy on |b| = |b*|.
    const auto io = interval_orthonormal_model(64);
    MeanFieldModel mf{io, 0.5, Eigen::MatrixXd::Identity(1, 1), {}};
    const auto rep = minimize_free_energy(mf);
    const auto& best = rep.points[static_cast<std::size_t>(rep.global_minimizer)];
    const double r2 = best.b.squaredNorm();
    const auto g = [r2](const Eigen::VectorXd& b) { return b.squaredNorm() - r2; };
    const auto dg = [](const Eigen::VectorXd& b) -> Eigen::VectorXd { return 2.0 * b; };
    const auto c = constrained_max_entropy(io, g, dg);
    CHECK(std::abs(c.lambda(0)) == doctest::Approx(std::abs(best.lambda(0))).epsilon(1e-7));
}

TEST_CASE("membership verdicts match solver attainability on the interval") {
    const auto t = table_model(3, 64);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    for (int i = 0; i < 40; ++i) {
        Eigen::VectorXd b(1);
        b << u(rng);
        const auto mem = membership(t.space, t.constraints, b);
        if (mem.verdict == Verdict::Inside && mem.margin > 0.05) {
            CHECK_NOTHROW(dual_solve(t, b));
        } else if (mem.verdict == Verdict::Outside) {
            CHECK_THROWS_AS(dual_solve(t, b), SolverError);
        }
    }
}
