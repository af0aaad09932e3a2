#include "singpot/models.hpp"

#include "singpot/errors.hpp"
#include "singpot/moment_geometry.hpp"

#include <cmath>
#include <numbers>

namespace singpot {

namespace {

double p2(double c) { return 0.5 * (3.0 * c * c - 1.0); }

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

Model mcmillan_model(int n_theta, int n_x, EntropyPtr entropy) {
    StateSpace space = build_mcmillan_space(n_theta, n_x);
    auto cons = ConstraintSet::from_evaluator(
        space, 2,
        [](std::span<const double> p, std::span<double> out) {
            const double s = p2(std::cos(p[0]));
            out[0] = s;
            out[1] = s * std::cos(2.0 * std::numbers::pi * p[1]);
        },
        {"S", "sigma"});
    HalfSpaceSet q;
    q.normals = {vec2(1.0, 0.0), vec2(-1.0, 0.0), vec2(-1.0 / 3.0, 1.0), vec2(-1.0 / 3.0, -1.0)};
    q.offsets = {1.0, 0.5, 2.0 / 3.0, 2.0 / 3.0};
    return Model{"mcmillan", std::move(space), std::move(cons), std::move(entropy), std::move(q)};
}

Model polynomial_interval_model(std::string name, std::vector<double> coefficients, int order,
                                EntropyPtr entropy) {
    if (coefficients.empty()) throw ConfigError("polynomial constraint: no coefficients");
    StateSpace space = build_interval_space(order, true);
    auto cons = ConstraintSet::from_evaluator(
        space, 1,
        [c = coefficients](std::span<const double> p, std::span<double> out) {
            double v = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * p[0] + *it;
            out[0] = v;
        },
        {"a"});
    Model m{std::move(name), std::move(space), std::move(cons), std::move(entropy), std::nullopt};
    // Q = (min a, max a); the extrema are located by the refined support function
    HalfSpaceSet q;
    for (double sgn : {1.0, -1.0}) {
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, sgn);
        q.normals.push_back(u);
        q.offsets.push_back(support(m.space, m.constraints, u).value);
    }
    m.closed_form_q = std::move(q);
    return m;
}

std::vector<Model> table_models(int order) {
    std::vector<Model> out;
    out.push_back(polynomial_interval_model("table1", {0.0, 1.0}, order));
    out.push_back(polynomial_interval_model("table2", {7.0 / 15.0, 3.0, -2.0, -7.0, 1.0}, order));
    out.push_back(polynomial_interval_model("table3", {1.0 / 3.0, 1.0, -1.0, 7.0}, order));
    out.push_back(polynomial_interval_model("table4", {0.0, 0.0, 0.0, 1.0}, order));
    return out;
}

Model table_model(int index, int order) {
    if (index < 1 || index > 4) throw ConfigError("table model index must be 1..4");
    return table_models(order)[static_cast<std::size_t>(index - 1)];
}

Model sphere_chain_model(int n_quad, EntropyPtr entropy) {
    if (n_quad < 4) throw ConfigError("sphere-chain: quadrature size must be >= 4");
    StateSpace space = build_sphere_space(n_quad, 2 * n_quad);
    auto cons = ConstraintSet::from_evaluator(
        space, 3,
        [](std::span<const double> p, std::span<double> out) {
            const double st = std::sin(p[0]);
            out[0] = st * std::cos(p[1]);
            out[1] = st * std::sin(p[1]);
            out[2] = std::cos(p[0]);
        },
        {"p1", "p2", "p3"});
    return Model{"sphere-chain", std::move(space), std::move(cons), std::move(entropy), std::nullopt};
}

Model circle_phase_model(int n, EntropyPtr entropy) {
    StateSpace space = build_circle_space(n);
    auto cons = ConstraintSet::from_evaluator(
        space, 2,
        [](std::span<const double> p, std::span<double> out) {
            out[0] = std::cos(p[0]);
            out[1] = std::sin(p[0]);
        },
        {"cos", "sin"});
    return Model{"circle-phase", std::move(space), std::move(cons), std::move(entropy), std::nullopt};
}

Model interval_orthonormal_model(int order, EntropyPtr entropy) {
    Model m = polynomial_interval_model("interval-orthonormal", {0.0, std::sqrt(3.0)}, order, std::move(entropy));
    return m;
}

Model builtin_model(const std::string& name, int resolution) {
    const auto res = [&](int def) { return resolution > 0 ? resolution : def; };
    if (name == "mcmillan") return mcmillan_model(res(48), res(48));
    if (name.size() == 6 && name.rfind("table", 0) == 0 && name[5] >= '1' && name[5] <= '4')
        return table_model(name[5] - '0', res(64));
    if (name == "sphere-chain") return sphere_chain_model(res(32));
    if (name == "circle-phase") return circle_phase_model(res(128));
    if (name == "interval-orthonormal") return interval_orthonormal_model(res(64));
    throw ConfigError("unknown model '" + name + "'");
}

std::vector<std::string> builtin_names() {
    return {"mcmillan", "table1", "table2", "table3", "table4", "sphere-chain", "circle-phase",
            "interval-orthonormal"};
}

}  // namespace singpot
