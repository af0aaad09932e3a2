#pragma once

#include "singpot/dual_solver.hpp"
#include "singpot/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace singpot {

struct PotentialValue {
    double psi = 0.0;         // dual optimum
    double primal = 0.0;      // int phi(rho_b) dmu
    double duality_gap = 0.0; // |psi - primal|
    DualSolution solution;
};

/// psi_s(b) = min { int phi(rho) : rho in P(X), int a rho = b }, evaluated
/// through the dual. The primal integral is computed as a cross-check.
PotentialValue psi(const Model& model, const Eigen::VectorXd& b, const SolverOptions& opts = {},
                   const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// grad psi_s(b) = lambda(b).
Eigen::VectorXd gradient(const Model& model, const Eigen::VectorXd& b, const SolverOptions& opts = {});

/// Hessian of psi_s from the general formula
///   (int a a^T sigma - (int a sigma)(int a sigma)^T / int sigma)^{-1},
/// sigma = 1/phi''(rho_b).
Eigen::MatrixXd hessian(const Model& model, const Eigen::VectorXd& b, const SolverOptions& opts = {});

/// Shannon-only closed form (int a a^T rho_b - b b^T)^{-1}.
Eigen::MatrixXd shannon_hessian(const Model& model, const DualSolution& sol);

/// Dense fully symmetric tensor M^n_{i1..in} = int a_i1 ... a_in rho dmu.
class MomentTensor {
public:
    MomentTensor(int order, int k);

    int order() const { return order_; }
    int dimension() const { return k_; }
    double operator()(std::initializer_list<int> idx) const;
    double& at(const std::vector<int>& idx);
    double at(const std::vector<int>& idx) const;
    const std::vector<double>& data() const { return data_; }
    /// Largest |T(idx) - T(perm(idx))| over all index tuples and permutations.
    double symmetry_defect() const;

private:
    std::size_t offset(const std::vector<int>& idx) const;
    int order_;
    int k_;
    std::vector<double> data_;
};

/// Moment tensor of a node density (n in 1..4).
MomentTensor moment_tensor(const Model& model, int order, const Eigen::VectorXd& rho);

}  // namespace singpot
