#pragma once

#include "singpot/dual_solver.hpp"
#include "singpot/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace singpot {

/// T int phi(rho) - 1/2 K b.b - H.b over densities, or equivalently
/// T psi_s(b) + f(b) with f(b) = -1/2 K b.b - H.b.
struct MeanFieldModel {
    Model model;
    double T = 1.0;
    Eigen::MatrixXd K;
    Eigen::VectorXd H;  // empty means zero

    /// Throws ConfigError unless T > 0, K is symmetric (1e-12) positive
    /// definite with matching size, and H has size k or is empty.
    void validate() const;
    Eigen::VectorXd field() const;
};

/// Energy in the dual order parameter:
///   I(lambda) = T psi_s(b^lambda) - 1/2 K b^lambda . b^lambda - H . b^lambda.
/// For Shannon, psi_s(b^lambda) = lambda . b^lambda - ln Z_lambda.
double onsager_dual_energy(const MeanFieldModel& mf, const Eigen::VectorXd& lambda);

/// dI/dlambda = C (T lambda - K b - H), C = db/dlambda.
Eigen::VectorXd onsager_dual_gradient(const MeanFieldModel& mf, const Eigen::VectorXd& lambda);

/// |lambda + grad f(b^lambda)| for an arbitrary smooth macroscopic term f
/// (scaled so that the entropy enters with weight one).
double critical_point_residual(const Model& model, const Eigen::VectorXd& lambda,
                               const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_f);

/// |lambda - (K b^lambda + H) / T|.
double critical_point_residual(const MeanFieldModel& mf, const Eigen::VectorXd& lambda);

enum class CriticalKind { Minimum, Saddle, Maximum, Degenerate };

std::string to_string(CriticalKind kind);

struct CriticalPoint {
    Eigen::VectorXd lambda;
    Eigen::VectorXd b;
    double energy = 0.0;
    Eigen::VectorXd hessian_eigenvalues;  // of I at lambda, ascending
    CriticalKind kind = CriticalKind::Degenerate;
    double residual = 0.0;
};

struct EquilibriumReport {
    std::vector<CriticalPoint> points;  // sorted by energy, then lexicographically in lambda
    int global_minimizer = -1;
    int starts = 0;
    int converged_starts = 0;
};

struct MeanFieldOptions {
    int n_starts = -1;  // negative means 8 k
    unsigned seed = 20240611;
    double dedup_distance = 1e-6;
    double tolerance = 1e-11;  // on |T lambda - K b - H|_inf
    int max_iterations = 200;
};

/// Multi-start search for critical points of I: descent (eigenvalue-shifted
/// Newton with backtracking on I) and plain Newton on the critical-point
/// equation T lambda - K b - H = 0 from lambda = 0 and seeded Gaussian starts.
/// Throws NumericalError if no start converges.
EquilibriumReport minimize_free_energy(const MeanFieldModel& mf, const MeanFieldOptions& opts = {});

enum class Stability { GloballyStable, Indeterminate, Unstable };

std::string to_string(Stability s);

struct StabilityReport {
    double global_bound = 0.0;  // |a|_inf^2 lambda_max(K)
    double local_bound = 0.0;   // lambda_max(K) / mu(X)
    double T = 0.0;
    Stability verdict = Stability::Indeterminate;
};

/// Isotropic-state thresholds. Requires L2(mu)-orthonormal mean-free
/// constraints; otherwise PreconditionError (use orthonormalize first).
StabilityReport stability_report(const MeanFieldModel& mf);

/// Bisection in T on "the global minimiser has |b| > b_floor". Requires a
/// nontrivial minimiser at lo and none at hi.
double bifurcation_temperature(const MeanFieldModel& mf, double lo, double hi, double rel_tol = 1e-3,
                               double b_floor = 1e-4, const MeanFieldOptions& opts = {});

struct ConstrainedResult {
    Eigen::VectorXd b;
    Eigen::VectorXd lambda;
    double eta = 0.0;
    double psi = 0.0;
    double constraint_value = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Minimises psi_s over {b in Q : g(b) = 0} by Newton on the KKT system
/// lambda(b) = eta grad g(b), g(b) = 0, started from a feasible point found by
/// sampling b^lambda and bisecting a sign change of g. Throws ConfigError
/// when no feasible point is found.
ConstrainedResult constrained_max_entropy(const Model& model, const ScalarField& g, const VectorField& grad_g,
                                          unsigned seed = 7, const SolverOptions& opts = {});

}  // namespace singpot
