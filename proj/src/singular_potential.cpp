#include "singpot/singular_potential.hpp"

#include "singpot/errors.hpp"

#include <algorithm>
#include <cmath>

namespace singpot {

PotentialValue psi(const Model& model, const Eigen::VectorXd& b, const SolverOptions& opts,
                   const std::optional<Eigen::VectorXd>& warm_start) {
    PotentialValue v;
    v.solution = dual_solve(model, b, opts, warm_start);
    v.psi = v.solution.psi_value;
    const Density rho = density_from_dual(model, v.solution, 1e-8);
    double primal = 0.0;
    const auto& w = model.space.weights();
    for (int j = 0; j < rho.values.size(); ++j) primal += w(j) * model.phi().value(rho.values(j));
    v.primal = primal;
    v.duality_gap = std::abs(v.psi - v.primal);
    return v;
}

Eigen::VectorXd gradient(const Model& model, const Eigen::VectorXd& b, const SolverOptions& opts) {
    return dual_solve(model, b, opts).lambda;
}

Eigen::MatrixXd hessian(const Model& model, const Eigen::VectorXd& b, const SolverOptions& opts) {
    const auto sol = dual_solve(model, b, opts);
    const DualPoint p = dual_point(model, sol.lambda);
    const Eigen::MatrixXd h = p.covariance.ldlt().solve(Eigen::MatrixXd::Identity(model.k(), model.k()));
    return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd shannon_hessian(const Model& model, const DualSolution& sol) {
    if (!model.phi().is_shannon()) throw PreconditionError("shannon_hessian: entropy is not Shannon");
    const Density rho = density_from_dual(model, sol, 1e-8);
    const auto& A = model.constraints.values();
    const Eigen::VectorXd wr = model.space.weights().cwiseProduct(rho.values);
    const Eigen::MatrixXd second = A * wr.asDiagonal() * A.transpose();
    const Eigen::MatrixXd cov = second - sol.b * sol.b.transpose();
    return cov.ldlt().solve(Eigen::MatrixXd::Identity(model.k(), model.k()));
}

MomentTensor::MomentTensor(int order, int k) : order_(order), k_(k) {
    if (order < 1 || order > 4) throw std::invalid_argument("moment tensor order must be in 1..4");
    if (k < 1) throw std::invalid_argument("moment tensor dimension must be positive");
    std::size_t n = 1;
    for (int i = 0; i < order; ++i) n *= static_cast<std::size_t>(k);
    data_.assign(n, 0.0);
}

std::size_t MomentTensor::offset(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != order_) throw std::invalid_argument("moment tensor: wrong index count");
    std::size_t off = 0;
    for (int i : idx) {
        if (i < 0 || i >= k_) throw std::out_of_range("moment tensor: index out of range");
        off = off * static_cast<std::size_t>(k_) + static_cast<std::size_t>(i);
    }
    return off;
}

double MomentTensor::operator()(std::initializer_list<int> idx) const { return at(std::vector<int>(idx)); }
double& MomentTensor::at(const std::vector<int>& idx) { return data_[offset(idx)]; }
double MomentTensor::at(const std::vector<int>& idx) const { return data_[offset(idx)]; }

namespace {

// odometer over {0..k-1}^n; returns false after the last tuple
bool next_tuple(std::vector<int>& idx, int k) {
    for (int p = static_cast<int>(idx.size()) - 1; p >= 0; --p) {
        if (++idx[static_cast<std::size_t>(p)] < k) return true;
        idx[static_cast<std::size_t>(p)] = 0;
    }
    return false;
}

}  // namespace

double MomentTensor::symmetry_defect() const {
    double defect = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(order_), 0);
    do {
        std::vector<int> perm = idx;
        std::sort(perm.begin(), perm.end());
        const double ref = at(idx);
        do {
            defect = std::max(defect, std::abs(at(perm) - ref));
        } while (std::next_permutation(perm.begin(), perm.end()));
    } while (next_tuple(idx, k_));
    return defect;
}

MomentTensor moment_tensor(const Model& model, int order, const Eigen::VectorXd& rho) {
    if (order < 1 || order > 4) throw std::invalid_argument("moment_tensor: order must be in 1..4");
    const int k = model.k();
    if (rho.size() != model.space.size()) throw std::invalid_argument("moment_tensor: density size mismatch");
    MomentTensor t(order, k);
    const auto& A = model.constraints.values();
    const Eigen::VectorXd wr = model.space.weights().cwiseProduct(rho);
    // fill sorted index tuples only, then copy to permutations
    std::vector<int> idx(static_cast<std::size_t>(order), 0);
    do {
        if (!std::is_sorted(idx.begin(), idx.end())) continue;
        Eigen::ArrayXd prod = wr.array();
        for (int i : idx) prod *= A.row(i).transpose().array();
        const double value = prod.sum();
        std::vector<int> perm = idx;
        do {
            t.at(perm) = value;
        } while (std::next_permutation(perm.begin(), perm.end()));
    } while (next_tuple(idx, k));
    return t;
}

}  // namespace singpot
