#include "singpot/config.hpp"
#include "singpot/dual_solver.hpp"
#include "singpot/errors.hpp"
#include "singpot/models.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

using namespace singpot;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / "singpot_test_config";
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("interval polynomial config") {
    const auto c = parse_model_config(R"(
[model]
name = "cubic"
[space]
kind = interval
order = 32
[constraints]
family = polynomial
coefficients = 0.3333333333333333, 1, -1, 7
[solver]
tolerance = 1e-11
max_iterations = 50
)");
    CHECK(c.name == "cubic");
    CHECK(c.order == 32);
    REQUIRE(c.coefficients.size() == 1);
    CHECK(c.coefficients[0].size() == 4);
    CHECK(c.solver.tolerance == 1e-11);
    CHECK(c.solver.max_iterations == 50);
    const auto m = build_model(c);
    CHECK(m.k() == 1);
    CHECK(m.space.size() == 32);
    const double p[] = {0.5};
    CHECK(m.constraints.evaluate(p)(0) == doctest::Approx(1.0 / 3 + 0.5 - 0.25 + 7 * 0.125));
}

TEST_CASE("monomial family and orthonormalisation") {
    const auto c = parse_model_config("[space]\nkind=interval\n[constraints]\nfamily=monomial\ndegree=2\northonormalize=true\n");
    const auto m = build_model(c);
    REQUIRE(m.k() == 2);
    const Eigen::MatrixXd g = m.constraints.gram(m.space);
    CHECK((g - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("McMillan config gets the closed-form Q") {
    const auto m = build_model(parse_model_config("[space]\nkind=mcmillan\nn_theta=16\nn_x=16\n[constraints]\nfamily=mcmillan\n"));
    CHECK(m.k() == 2);
    CHECK(m.closed_form_q.has_value());
    CHECK(m.space.size() == 256);
}

TEST_CASE("sphere and circle families") {
    const auto s = build_model(parse_model_config("[space]\nkind=sphere2\nn_theta=8\nn_phi=16\n[constraints]\nfamily=sphere\n"));
    CHECK(s.k() == 3);
    const auto t = build_model(parse_model_config("[space]\nkind=circle\nn=32\n[constraints]\nfamily=trig\ndegree=2\n"));
    CHECK(t.k() == 4);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_model_config("[bogus]\na=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_model_config("[space]\norder=abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_model_config("[space]\nnormalized=maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_model_config("[solver]\ntolerance=-1\n"), ConfigError);
    CHECK_THROWS_AS(build_model(parse_model_config("[space]\nkind=torus\n")), ConfigError);
    CHECK_THROWS_AS(build_model(parse_model_config("[constraints]\nfamily=mcmillan\n")), ConfigError);
    CHECK_THROWS_AS(build_model(parse_model_config("[constraints]\nfamily=polynomial\n")), ConfigError);
    CHECK_THROWS_AS(build_model(parse_model_config("[entropy]\nkind=renyi\n")), ConfigError);
    // x and 2x are dependent
    CHECK_THROWS_AS(build_model(parse_model_config("[constraints]\nfamily=polynomial\ncoefficients=0,1;0,2\n")),
                    ConfigError);
    CHECK_THROWS_AS(load_model_config("/nonexistent/model.ini"), ConfigError);
    CHECK_THROWS_AS(parse_number_list("1,x", "test"), ConfigError);
}

TEST_CASE("custom nodes and tabulated constraints from CSV") {
    const auto dir = scratch_dir();
    // 8-point midpoint rule on [0, 1]
    std::string nodes = "t,w\n", cons = "a\n";
    for (int j = 0; j < 8; ++j) {
        const double t = (j + 0.5) / 8.0;
        nodes += std::to_string(t) + "," + std::to_string(1.0 / 8.0) + "\n";
        cons += std::to_string(2 * t - 1) + "\n";
    }
    write(dir / "nodes.csv", nodes);
    write(dir / "cons.csv", cons);
    write(dir / "model.ini", "[space]\nkind=custom\nnodes=nodes.csv\n[constraints]\nfamily=tabulated\npath=cons.csv\n");
    const auto c = load_model_config((dir / "model.ini").string());
    const auto m = build_model(c);
    CHECK(m.space.size() == 8);
    CHECK(m.space.total_mass() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.k() == 1);
    const auto sol = dual_solve(m, Eigen::VectorXd::Constant(1, 0.2));
    CHECK(sol.converged);

    write(dir / "short.csv", "0.1\n0.2\n");
    write(dir / "bad.ini", "[space]\nkind=custom\nnodes=nodes.csv\n[constraints]\nfamily=tabulated\npath=short.csv\n");
    CHECK_THROWS_AS(build_model(load_model_config((dir / "bad.ini").string())), ConfigError);
}

TEST_CASE("tabulated entropy file") {
    const auto dir = scratch_dir();
    std::string table = "x,phi\n";
    for (int i = 0; i < 200; ++i) {
        const double x = 1e-4 * std::pow(1e7, i / 199.0);
        std::ostringstream row;
        row << std::setprecision(17) << x << "," << x * std::log(x) << "\n";
        table += row.str();
    }
    write(dir / "phi.csv", table);
    write(dir / "ent.ini", "[space]\nkind=interval\norder=32\n[entropy]\nkind=table\npath=phi.csv\n");
    const auto m = build_model(load_model_config((dir / "ent.ini").string()));
    CHECK_FALSE(m.phi().is_shannon());
    const auto sol = dual_solve(m, Eigen::VectorXd::Constant(1, 0.3));
    CHECK(sol.converged);
    // close to the Shannon solution lambda = L^{-1}(0.3)
    const auto ref = dual_solve(table_model(1, 32), Eigen::VectorXd::Constant(1, 0.3));
    CHECK(sol.lambda(0) == doctest::Approx(ref.lambda(0)).epsilon(1e-2));
}

TEST_CASE("mean-field section") {
    const auto c = parse_model_config(
        "[space]\nkind=mcmillan\nn_theta=8\nn_x=8\n[constraints]\nfamily=mcmillan\n[meanfield]\nT=0.4\nK=2,1\nH=0.1,0\n");
    const auto m = build_model(c);
    const auto mf = build_mean_field(m, c);
    CHECK(mf.T == 0.4);
    CHECK(mf.K(0, 0) == 2.0);
    CHECK(mf.K(1, 1) == 1.0);
    CHECK(mf.K(0, 1) == 0.0);
    CHECK(mf.H(0) == 0.1);
    CHECK(build_mean_field(m, c, 2.0).T == 2.0);
    auto bad = c;
    bad.K = {1, 2, 3};
    CHECK_THROWS_AS(build_mean_field(m, bad), ConfigError);
}
