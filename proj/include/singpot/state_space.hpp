#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace singpot {

enum class SpaceKind { Interval, Sphere2, McMillan, Custom };

std::string to_string(SpaceKind kind);

/// Quadrature representation of a finite measure space (X, mu).
///
/// Nodes are stored column-wise as points of a coordinate box; each
/// coordinate can be flagged periodic, in which case local refinement may
/// step across the box edge. Immutable once built.
class StateSpace {
public:
    StateSpace(SpaceKind kind, Eigen::MatrixXd nodes, Eigen::VectorXd weights,
               Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<bool> periodic);

    SpaceKind kind() const { return kind_; }
    int dimension() const { return static_cast<int>(nodes_.rows()); }
    int size() const { return static_cast<int>(nodes_.cols()); }
    const Eigen::MatrixXd& nodes() const { return nodes_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    double total_mass() const { return total_mass_; }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }
    bool periodic(int coord) const { return periodic_[static_cast<std::size_t>(coord)]; }

    /// Typical node spacing per coordinate, used to size refinement brackets.
    const Eigen::VectorXd& spacing() const { return spacing_; }

    /// Quadrature of node values against mu.
    double integrate(const Eigen::VectorXd& values) const { return weights_.dot(values); }

private:
    SpaceKind kind_;
    Eigen::MatrixXd nodes_;
    Eigen::VectorXd weights_;
    double total_mass_;
    Eigen::VectorXd lower_, upper_;
    std::vector<bool> periodic_;
    Eigen::VectorXd spacing_;
};

/// Gauss-Legendre nodes on [-1,1]. With `normalized` the measure is dx/2.
StateSpace build_interval_space(int quadrature_order, bool normalized);

/// Reduced McMillan coordinates (theta, x) in [0,pi]x[0,1] with measure
/// 2 pi sin(theta) dtheta dx: Gauss-Legendre in cos(theta), periodic midpoint
/// in x.
StateSpace build_mcmillan_space(int n_theta, int n_x);

/// Unit sphere in (theta, phi) coordinates: Gauss-Legendre in cos(theta),
/// periodic midpoint in phi. Surface measure, total mass 4 pi.
StateSpace build_sphere_space(int n_theta, int n_phi);

/// Periodic interval [0, 2pi) with the normalised measure dt / (2 pi).
StateSpace build_circle_space(int n);

/// Evaluates all k constraint functions at one point of the coordinate box.
using PointEvaluator = std::function<void(std::span<const double> point, std::span<double> out)>;

/// Bounded constraint functions a_1..a_k tabulated at the nodes of a space,
/// optionally backed by a closed-form evaluator used for local refinement.
class ConstraintSet {
public:
    /// Tabulates `evaluator` on the nodes of `space`.
    static ConstraintSet from_evaluator(const StateSpace& space, int k, PointEvaluator evaluator,
                                        std::vector<std::string> labels = {});
    /// Uses node values directly (k x n). No refinement is possible.
    static ConstraintSet from_table(const StateSpace& space, Eigen::MatrixXd values,
                                    std::vector<std::string> labels = {});

    int count() const { return static_cast<int>(values_.rows()); }
    const Eigen::MatrixXd& values() const { return values_; }
    /// a(t_j) as a column.
    Eigen::VectorXd at_node(int j) const { return values_.col(j); }
    bool has_evaluator() const { return static_cast<bool>(evaluator_); }
    Eigen::VectorXd evaluate(std::span<const double> point) const;
    const PointEvaluator& evaluator() const { return evaluator_; }
    /// Per-function estimate of the essential supremum of |a_i|.
    const Eigen::VectorXd& sup_norm() const { return sup_norm_; }
    /// Estimate of sup_t |a(t)| (Euclidean norm of the vector a(t)).
    double sup_vector_norm() const { return sup_vector_norm_; }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Affine image A a + c, keeping the evaluator in sync.
    ConstraintSet transformed(const StateSpace& space, const Eigen::MatrixXd& A,
                              const Eigen::VectorXd& c) const;

    /// Gram matrix of {1, a_1, ..., a_k} under mu (size k+1).
    Eigen::MatrixXd gram(const StateSpace& space) const;

private:
    ConstraintSet() = default;
    void finalize(const StateSpace& space);

    Eigen::MatrixXd values_;
    PointEvaluator evaluator_;
    Eigen::VectorXd sup_norm_;
    double sup_vector_norm_ = 0.0;
    std::vector<std::string> labels_;
};

/// Maximises a scalar function of the point starting from node `start`:
/// cyclic golden-section sweeps over each coordinate within one node spacing.
/// Returns the refined point and value; never worse than the node value.
std::pair<Eigen::VectorXd, double> refine_maximum(
    const StateSpace& space, const std::function<double(std::span<const double>)>& f, int start);

struct PseudoHaarReport {
    double min_singular_value = 0.0;
    int subsets_checked = 0;
    int subsets_skipped = 0;
    bool pass = false;
};

/// Necessary-condition check for the pseudo-Haar property: the Gram matrix of
/// {1, a_1..a_k} restricted to random node subsets carrying at least half of
/// the mass must stay nonsingular. Passing does NOT prove the property.
PseudoHaarReport pseudo_haar_check(const StateSpace& space, const ConstraintSet& constraints,
                                   int n_subsets, double floor = 1e-8, unsigned seed = 12345);

/// Returns functions that are mean-free and L2(mu)-orthonormal spanning the
/// same space together with the constants. Throws ConfigError when the Gram
/// matrix is numerically singular.
ConstraintSet orthonormalize(const ConstraintSet& constraints, const StateSpace& space);

}  // namespace singpot
