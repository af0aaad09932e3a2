#include "singpot/config.hpp"

#include "singpot/entropy.hpp"
#include "singpot/errors.hpp"
#include "singpot/models.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace singpot {

namespace pt = boost::property_tree;

namespace {

std::string unquote(std::string s) {
    boost::algorithm::trim(s);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
        s = s.substr(1, s.size() - 2);
    return s;
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key) {
    const auto v = tree.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return unquote(*v);
}

double to_double(const std::string& s, const std::string& what) {
    std::string t = s;
    boost::algorithm::trim(t);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(what + ": not a number: '" + s + "'");
    return v;
}

int to_int(const std::string& s, const std::string& what) {
    const double v = to_double(s, what);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + ": not an integer: '" + s + "'");
    return static_cast<int>(v);
}

bool to_bool(const std::string& s, const std::string& what) {
    const std::string t = boost::algorithm::to_lower_copy(s);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(what + ": not a boolean: '" + s + "'");
}

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (std::filesystem::path(base) / path).string();
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(to_double(p, what));
    return out;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        boost::algorithm::trim(line);
        if (line.empty() || line[0] == '#') continue;
        try {
            rows.push_back(parse_number_list(line, path));
        } catch (const ConfigError&) {
            if (!first) throw;
        }
        first = false;
    }
    if (rows.empty()) throw ConfigError("'" + path + "' has no numeric rows");
    for (const auto& r : rows)
        if (r.size() != rows.front().size()) throw ConfigError("'" + path + "' has ragged rows");
    return rows;
}

ModelConfig parse_model_config(const std::string& text, const std::string& base_dir) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    static const std::vector<std::string> sections{"model", "space", "constraints", "entropy", "solver", "meanfield"};
    for (const auto& [key, _] : tree)
        if (std::find(sections.begin(), sections.end(), key) == sections.end())
            throw ConfigError("config: unknown section [" + key + "]");

    ModelConfig c;
    if (auto v = get(tree, "model.name")) c.name = *v;

    if (auto v = get(tree, "space.kind")) c.space_kind = *v;
    if (auto v = get(tree, "space.order")) c.order = to_int(*v, "space.order");
    if (auto v = get(tree, "space.normalized")) c.normalized = to_bool(*v, "space.normalized");
    if (auto v = get(tree, "space.n_theta")) c.n_theta = to_int(*v, "space.n_theta");
    if (auto v = get(tree, "space.n_x")) c.n_x = to_int(*v, "space.n_x");
    if (auto v = get(tree, "space.n_phi")) c.n_phi = to_int(*v, "space.n_phi");
    if (auto v = get(tree, "space.n")) c.n_circle = to_int(*v, "space.n");
    if (auto v = get(tree, "space.nodes")) c.nodes_path = resolve(base_dir, *v);

    if (auto v = get(tree, "constraints.family")) c.family = *v;
    if (auto v = get(tree, "constraints.degree")) c.degree = to_int(*v, "constraints.degree");
    if (auto v = get(tree, "constraints.coefficients")) {
        std::vector<std::string> funcs;
        boost::algorithm::split(funcs, *v, boost::algorithm::is_any_of(";"));
        for (const auto& f : funcs) c.coefficients.push_back(parse_number_list(f, "constraints.coefficients"));
    }
    if (auto v = get(tree, "constraints.path")) c.constraints_path = resolve(base_dir, *v);
    if (auto v = get(tree, "constraints.orthonormalize"))
        c.orthonormalize = to_bool(*v, "constraints.orthonormalize");

    if (auto v = get(tree, "entropy.kind")) c.entropy = *v;
    if (auto v = get(tree, "entropy.path")) c.entropy_path = resolve(base_dir, *v);

    if (auto v = get(tree, "solver.tolerance")) c.solver.tolerance = to_double(*v, "solver.tolerance");
    if (auto v = get(tree, "solver.max_iterations"))
        c.solver.max_iterations = to_int(*v, "solver.max_iterations");
    if (auto v = get(tree, "solver.lambda_cap")) c.solver.lambda_cap = to_double(*v, "solver.lambda_cap");
    if (auto v = get(tree, "solver.condition_limit"))
        c.solver.condition_limit = to_double(*v, "solver.condition_limit");
    if (auto v = get(tree, "solver.n_directions"))
        c.membership.n_directions = to_int(*v, "solver.n_directions");
    if (auto v = get(tree, "solver.membership_tolerance"))
        c.membership.tolerance = to_double(*v, "solver.membership_tolerance");
    if (!(c.solver.tolerance > 0.0) || c.solver.max_iterations < 1 || !(c.solver.lambda_cap > 0.0))
        throw ConfigError("config: solver settings must be positive");

    if (auto v = get(tree, "meanfield.T")) c.T = to_double(*v, "meanfield.T");
    if (auto v = get(tree, "meanfield.K")) c.K = parse_number_list(*v, "meanfield.K");
    if (auto v = get(tree, "meanfield.H")) c.H = parse_number_list(*v, "meanfield.H");
    return c;
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto parent = std::filesystem::path(path).parent_path();
    return parse_model_config(ss.str(), parent.empty() ? "." : parent.string());
}

namespace {

StateSpace build_space(const ModelConfig& c) {
    if (c.space_kind == "interval") return build_interval_space(c.order, c.normalized);
    if (c.space_kind == "mcmillan") return build_mcmillan_space(c.n_theta, c.n_x);
    if (c.space_kind == "sphere2") return build_sphere_space(c.n_theta, c.n_phi);
    if (c.space_kind == "circle") return build_circle_space(c.n_circle);
    if (c.space_kind == "custom") {
        if (c.nodes_path.empty()) throw ConfigError("space.nodes is required for kind = custom");
        const auto rows = read_numeric_csv(c.nodes_path);
        const int d = static_cast<int>(rows.front().size()) - 1;
        if (d < 1) throw ConfigError("space.nodes: need coordinate columns and a weight column");
        const int n = static_cast<int>(rows.size());
        Eigen::MatrixXd nodes(d, n);
        Eigen::VectorXd w(n);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < d; ++i) nodes(i, j) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            w(j) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)];
        }
        if (!(w.minCoeff() > 0.0)) throw ConfigError("space.nodes: weights must be positive");
        const Eigen::VectorXd lo = nodes.rowwise().minCoeff(), hi = nodes.rowwise().maxCoeff();
        return StateSpace(SpaceKind::Custom, nodes, w, lo, hi, std::vector<bool>(static_cast<std::size_t>(d), false));
    }
    throw ConfigError("space.kind: unknown '" + c.space_kind + "'");
}

void require_space(const ModelConfig& c, const std::string& kind) {
    if (c.space_kind != kind)
        throw ConfigError("constraints.family = " + c.family + " needs space.kind = " + kind);
}

ConstraintSet build_constraints(const ModelConfig& c, const StateSpace& space) {
    if (c.family == "monomial" || c.family == "polynomial") {
        if (space.dimension() != 1) throw ConfigError("polynomial constraints need a 1-D space");
        std::vector<std::vector<double>> coeffs = c.coefficients;
        if (c.family == "monomial") {
            if (c.degree < 1) throw ConfigError("constraints.degree must be >= 1");
            coeffs.clear();
            for (int p = 1; p <= c.degree; ++p) {
                std::vector<double> row(static_cast<std::size_t>(p + 1), 0.0);
                row.back() = 1.0;
                coeffs.push_back(row);
            }
        }
        if (coeffs.empty()) throw ConfigError("constraints.coefficients is required for family = polynomial");
        const int k = static_cast<int>(coeffs.size());
        return ConstraintSet::from_evaluator(space, k, [coeffs](std::span<const double> p, std::span<double> out) {
            for (std::size_t i = 0; i < coeffs.size(); ++i) {
                double v = 0.0;
                for (auto it = coeffs[i].rbegin(); it != coeffs[i].rend(); ++it) v = v * p[0] + *it;
                out[i] = v;
            }
        });
    }
    if (c.family == "mcmillan") {
        require_space(c, "mcmillan");
        return mcmillan_model(c.n_theta, c.n_x).constraints;
    }
    if (c.family == "sphere") {
        require_space(c, "sphere2");
        return ConstraintSet::from_evaluator(space, 3, [](std::span<const double> p, std::span<double> out) {
            out[0] = std::sin(p[0]) * std::cos(p[1]);
            out[1] = std::sin(p[0]) * std::sin(p[1]);
            out[2] = std::cos(p[0]);
        });
    }
    if (c.family == "trig") {
        if (space.dimension() != 1) throw ConfigError("trig constraints need a 1-D space");
        const int deg = std::max(1, c.degree);
        return ConstraintSet::from_evaluator(space, 2 * deg, [deg](std::span<const double> p, std::span<double> out) {
            for (int m = 1; m <= deg; ++m) {
                out[static_cast<std::size_t>(2 * m - 2)] = std::cos(m * p[0]);
                out[static_cast<std::size_t>(2 * m - 1)] = std::sin(m * p[0]);
            }
        });
    }
    if (c.family == "tabulated") {
        if (c.constraints_path.empty()) throw ConfigError("constraints.path is required for family = tabulated");
        const auto rows = read_numeric_csv(c.constraints_path);
        if (static_cast<int>(rows.size()) != space.size())
            throw ConfigError("tabulated constraints: " + std::to_string(rows.size()) + " rows but the space has " +
                              std::to_string(space.size()) + " nodes");
        const int k = static_cast<int>(rows.front().size());
        Eigen::MatrixXd values(k, space.size());
        for (int j = 0; j < space.size(); ++j)
            for (int i = 0; i < k; ++i) values(i, j) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        return ConstraintSet::from_table(space, values);
    }
    throw ConfigError("constraints.family: unknown '" + c.family + "'");
}

}  // namespace

Model build_model(const ModelConfig& c) {
    StateSpace space = build_space(c);
    ConstraintSet cons = build_constraints(c, space);
    const Eigen::MatrixXd gram = cons.gram(space);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
    const double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    if (!std::isfinite(cond) || cond > 1e12)
        throw ConfigError("constraints: Gram matrix of {1, a} is singular (condition " + std::to_string(cond) + ")");
    if (c.orthonormalize) cons = orthonormalize(cons, space);

    EntropyPtr phi;
    if (c.entropy == "table") {
        if (c.entropy_path.empty()) throw ConfigError("entropy.path is required for kind = table");
        phi = load_tabulated_entropy(c.entropy_path);
    } else {
        try {
            phi = entropy_by_name(c.entropy);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("entropy.kind: ") + e.what());
        }
    }
    std::optional<HalfSpaceSet> q;
    if (c.family == "mcmillan" && !c.orthonormalize) q = mcmillan_model(2, 2).closed_form_q;
    return Model{c.name, std::move(space), std::move(cons), std::move(phi), std::move(q)};
}

MeanFieldModel build_mean_field(const Model& model, const ModelConfig& c, std::optional<double> T) {
    const int k = model.k();
    MeanFieldModel mf{model, T ? *T : c.T.value_or(1.0), Eigen::MatrixXd::Identity(k, k), Eigen::VectorXd::Zero(k)};
    if (!c.K.empty()) {
        if (static_cast<int>(c.K.size()) == k) {
            mf.K = Eigen::VectorXd::Map(c.K.data(), k).asDiagonal();
        } else if (static_cast<int>(c.K.size()) == k * k) {
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) mf.K(i, j) = c.K[static_cast<std::size_t>(i * k + j)];
        } else {
            throw ConfigError("meanfield.K must have k (diagonal) or k*k entries");
        }
    }
    if (!c.H.empty()) {
        if (static_cast<int>(c.H.size()) != k) throw ConfigError("meanfield.H must have k entries");
        mf.H = Eigen::VectorXd::Map(c.H.data(), k);
    }
    mf.validate();
    return mf;
}

}  // namespace singpot
