#pragma once

#include "singpot/dual_solver.hpp"
#include "singpot/model.hpp"
#include "singpot/singular_potential.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <vector>

namespace singpot {

/// Moments and sign tests of the 1-D fourth-order Taylor polynomial
///   b^2/(2 m2) - m3/(6 m2^3) b^3 + (3 m3^2 - m2 m4 + 3 m2^3)/(24 m2^5) b^4.
struct Discriminants1D {
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    double d1 = 0.0;  // 3 m3^2 - m2 m4 + 3 m2^3; > 0 iff the quartic is coercive
    double d2 = 0.0;  // 72 m2^3 - 24 m2 m4 + 63 m3^2; > 0 iff one critical point
    double d3 = 0.0;  // 6 m2^3 - 2 m2 m4 + 5 m3^2; > 0 iff convex
    bool coercive = false;
    bool single_critical_point = false;
    bool convex = false;
};

/// Discriminants from explicit moments.
Discriminants1D discriminants_from_moments(double m2, double m3, double m4);

/// Single-constraint model: the mean is projected out first, then
/// m_i = int a^i dmu / mu(X). Throws ConfigError when m2 <= 0.
Discriminants1D discriminants_1d(const Model& model);

/// psi_s^4(b) = c + 1/2 Q2 b b + 1/6 T3 b b b + 1/24 T4 b b b b.
class TaylorQuartic {
public:
    TaylorQuartic(double constant, MomentTensor q2, MomentTensor t3, MomentTensor t4);

    int dimension() const { return q2_.dimension(); }
    double constant() const { return constant_; }
    const MomentTensor& quadratic() const { return q2_; }
    const MomentTensor& cubic() const { return t3_; }
    const MomentTensor& quartic() const { return t4_; }

    double evaluate(const Eigen::VectorXd& b) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& b) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& b) const;
    /// Homogeneous quartic part 1/24 T4 b b b b.
    double quartic_form(const Eigen::VectorXd& b) const;

    /// Coefficients keyed by exponent vector, e.g. {4,0} -> coefficient of b1^4.
    /// Includes the constant under the all-zero key.
    std::map<std::vector<int>, double> monomials() const;

private:
    double constant_;
    MomentTensor q2_, t3_, t4_;
};

/// Fourth-order Taylor polynomial of psi_s about b = 0 for the Shannon
/// entropy, from the moment tensors of the uniform density 1/mu(X):
///   V = (M2)^{-1}, D3 = -VVV.M3,
///   D4 = -VVVV.(M4 - 3 sym M2 M2) + sum over the three pairings of V M3 V M3 V...
/// The constant is mu(X) phi(1/mu(X)) = -ln mu(X).
/// Requires mean-free constraints (PreconditionError otherwise) and the
/// Shannon entropy (PreconditionError otherwise).
TaylorQuartic taylor4(const Model& model);

struct QuarticShapeReport {
    bool coercive = false;
    /// Minimum of the quartic form on sampled unit directions.
    double min_quartic_on_sphere = 0.0;
    /// k = 2 and no S^3 sigma / S sigma^3 terms: eigenvalues (ascending) of the
    /// 2x2 matrix M with quartic form = (b1^2, b2^2) M (b1^2, b2^2)^T.
    std::optional<Eigen::Vector2d> square_form_eigenvalues;
    std::vector<Eigen::VectorXd> points;
    std::vector<Eigen::VectorXd> hessian_eigenvalues;  // ascending, per point
    /// First grid point with a negative Hessian eigenvalue.
    std::optional<Eigen::VectorXd> nonconvexity_witness;
};

QuarticShapeReport quartic_shape_report(const TaylorQuartic& q, const std::vector<Eigen::VectorXd>& points,
                                        int n_directions = 720);

struct YosidaValue {
    double J = 0.0;
    Eigen::VectorXd b;
    double value = 0.0;     // psi^J(b)
    Eigen::VectorXd prox;   // G_J(b) = b - lambda / J
    Eigen::VectorXd gradient;  // lambda = J (b - G_J(b))
    DualSolution solution;
};

/// Yosida-Moreau envelope min_{b' in Q} psi_s(b') + J/2 |b' - b|^2 via the
/// penalised dual; defined for every b.
YosidaValue yosida(const Model& model, const Eigen::VectorXd& b, double J, const SolverOptions& opts = {},
                   const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

}  // namespace singpot
