#pragma once

#include "singpot/errors.hpp"
#include "singpot/model.hpp"

#include <Eigen/Dense>

#include <optional>

namespace singpot {

struct SolverOptions {
    /// Stop when |b - int a rho|_inf <= tolerance * max(1, |b|).
    double tolerance = 1e-10;
    int max_iterations = 200;
    /// |lambda| beyond this is reported as an unattained dual (b on or outside dQ).
    double lambda_cap = 1e4;
    /// Newton systems with a worse condition number fall back to gradient ascent.
    double condition_limit = 1e12;
};

struct DualSolution {
    double alpha = 0.0;
    Eigen::VectorXd lambda;
    Eigen::VectorXd b;
    double psi_value = 0.0;  // dual optimum
    Eigen::VectorXd moment_residual;  // b - int a rho dmu
    double normalization_residual = 0.0;  // 1 - int rho dmu
    int iterations = 0;
    int gradient_steps = 0;  // iterations that fell back to gradient ascent
    bool converged = false;
};

/// Thrown when the dual iteration stops short of its tolerance. Carries the
/// best iterate.
class SolverError : public NumericalError {
public:
    enum class Kind { NonConvergence, UnattainedDual };
    SolverError(Kind kind, const std::string& what, DualSolution best)
        : NumericalError(what), kind_(kind), best_(std::move(best)) {}
    Kind kind() const { return kind_; }
    const DualSolution& best() const { return best_; }

private:
    Kind kind_;
    DualSolution best_;
};

/// Everything the dual needs at one lambda, with alpha fixed to alpha_lambda so
/// that the density is normalised.
struct DualPoint {
    double alpha = 0.0;
    Eigen::VectorXd lambda;
    Eigen::VectorXd rho;      // density at nodes
    Eigen::VectorXd moments;  // b^lambda = int a rho dmu
    double mass = 1.0;        // int rho dmu
    /// sigma = 1/phi''(rho); moment_covariance = int a a^T sigma - (int a sigma)(int a sigma)^T / int sigma.
    /// Its inverse is d lambda / d b.
    Eigen::MatrixXd covariance;
    /// alpha + lambda . b^lambda - int phi*(alpha + lambda . a) dmu, i.e.
    /// psi_s(b^lambda).
    double psi = 0.0;
};

/// alpha_lambda: the unique alpha with int (phi')^{-1}(alpha + lambda . a) dmu = 1.
double alpha_for_lambda(const Model& model, const Eigen::VectorXd& lambda);

/// Evaluates the normalised exponential-family (or general phi) point.
DualPoint dual_point(const Model& model, const Eigen::VectorXd& lambda);

/// h(alpha, lambda) = int (1, a) (phi')^{-1}(alpha + lambda . a) dmu.
std::pair<double, Eigen::VectorXd> forward_moment_map(const Model& model, double alpha,
                                                      const Eigen::VectorXd& lambda);

/// Maximises alpha + lambda . b - int phi*(alpha + lambda . a) dmu
/// [- |lambda|^2 / (2 J) when `yosida_j` is set] by damped Newton in lambda,
/// with alpha eliminated through alpha_for_lambda. Throws SolverError.
DualSolution dual_solve(const Model& model, const Eigen::VectorXd& b, const SolverOptions& opts = {},
                        const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                        std::optional<double> yosida_j = std::nullopt);

struct Density {
    Eigen::VectorXd values;  // rho at each node
    double mass = 0.0;
};

/// Node values of rho_b = (phi')^{-1}(alpha + lambda . a). Throws
/// ConsistencyError on negative values or a normalisation defect.
Density density_from_dual(const Model& model, const DualSolution& sol, double tol = 1e-8);

}  // namespace singpot
