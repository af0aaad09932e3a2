#pragma once

#include "singpot/dual_solver.hpp"
#include "singpot/mean_field.hpp"
#include "singpot/model.hpp"
#include "singpot/moment_geometry.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace singpot {

/// Parsed model description. INI-style text:
///
///   [space]        kind = interval | mcmillan | sphere2 | circle | custom
///                  order, normalized (interval); n_theta, n_x (mcmillan);
///                  n_theta, n_phi (sphere2); n (circle); nodes = CSV (custom)
///   [constraints]  family = monomial | polynomial | mcmillan | sphere | trig | tabulated
///                  degree (monomial); coefficients = "c0,c1,..;c0,.." (polynomial);
///                  path (tabulated); orthonormalize = true|false
///   [entropy]      kind = shannon | inverse_square | table; path (table)
///   [solver]       tolerance, max_iterations, lambda_cap, condition_limit,
///                  n_directions, membership_tolerance
///   [meanfield]    T, K (row-major), H
///
/// Relative paths are resolved against the config file's directory.
struct ModelConfig {
    std::string name = "custom";

    std::string space_kind = "interval";
    int order = 64;
    bool normalized = true;
    int n_theta = 48;
    int n_x = 48;
    int n_phi = 64;
    int n_circle = 128;
    std::string nodes_path;

    std::string family = "monomial";
    int degree = 1;
    std::vector<std::vector<double>> coefficients;
    std::string constraints_path;
    bool orthonormalize = false;

    std::string entropy = "shannon";
    std::string entropy_path;

    SolverOptions solver;
    MembershipOptions membership;

    std::optional<double> T;
    std::vector<double> K;
    std::vector<double> H;
};

/// Parses a config file. Throws ConfigError with the offending key.
ModelConfig load_model_config(const std::string& path);
ModelConfig parse_model_config(const std::string& text, const std::string& base_dir = ".");

/// Builds the model; validates the constraint Gram matrix.
Model build_model(const ModelConfig& cfg);

/// Mean-field model from the [meanfield] section, with overrides.
MeanFieldModel build_mean_field(const Model& model, const ModelConfig& cfg, std::optional<double> T = std::nullopt);

/// Numeric CSV reader (skips a non-numeric header row and '#' lines).
std::vector<std::vector<double>> read_numeric_csv(const std::string& path);

/// "1,2,3" -> {1,2,3}; throws ConfigError on junk.
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

}  // namespace singpot
