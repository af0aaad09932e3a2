#pragma once

#include "singpot/entropy.hpp"
#include "singpot/model.hpp"
#include "singpot/state_space.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace singpot {

struct SupportResult {
    Eigen::VectorXd direction;
    double value = 0.0;   // S_u = ess sup_t u . a(t)
    int argmax_node = 0;  // best quadrature node
    Eigen::VectorXd argmax_point;  // refined maximiser (== node when no evaluator)
};

/// Support function of the moment set. With `refine` and a closed-form
/// evaluator the node maximum is polished by local golden-section search.
SupportResult support(const StateSpace& space, const ConstraintSet& constraints,
                      const Eigen::VectorXd& u, bool refine = true);

enum class Verdict { Inside, Outside, Indeterminate };

std::string to_string(Verdict v);

struct MembershipResult {
    Verdict verdict = Verdict::Indeterminate;
    /// min over sampled unit u of S_u - b . u (distance to the boundary when
    /// inside, <= 0 when outside)
    double margin = 0.0;
    /// direction attaining the margin; a separating direction when Outside
    Eigen::VectorXd witness;
};

struct MembershipOptions {
    int n_directions = 64;
    /// absolute width of the Indeterminate band; negative means
    /// 1e-6 * max_i |a_i|_inf
    double tolerance = -1.0;
};

/// Decides b in Q via b . u < S_u over quasi-uniform directions, polished by
/// Nelder-Mead on the worst direction.
MembershipResult membership(const StateSpace& space, const ConstraintSet& constraints,
                            const Eigen::VectorXd& b, const MembershipOptions& opts = {});

struct BoundaryDistance {
    double distance = 0.0;
    Eigen::VectorXd direction;  // unit normal of the nearest supporting hyperplane
    double support_value = 0.0;  // S_u for that direction
};

/// d(b, dQ) = min_u S_u - b . u. Throws PreconditionError when b is not
/// Inside.
BoundaryDistance distance_to_boundary(const StateSpace& space, const ConstraintSet& constraints,
                                      const Eigen::VectorXd& b, const MembershipOptions& opts = {});

struct ConcentrationSet {
    Eigen::VectorXd direction;
    double epsilon = 0.0;
    double support_value = 0.0;
    std::vector<bool> mask;  // node membership in E
    double measure = 0.0;    // mu(E)
};

/// E_eps^u = {t : S_u < u . a(t) + eps} evaluated on nodes.
ConcentrationSet concentration_set_for(const StateSpace& space, const ConstraintSet& constraints,
                                       const Eigen::VectorXd& u, double support_value, double epsilon);

/// Concentration set at the nearest boundary direction with eps^2 = d(b, dQ).
/// Returns nullopt when eps >= 1 (the mass bound is vacuous).
std::optional<ConcentrationSet> concentration_set(const StateSpace& space,
                                                  const ConstraintSet& constraints,
                                                  const Eigen::VectorXd& b,
                                                  const MembershipOptions& opts = {});

/// mu(E_eps^u) for each eps in the list.
std::vector<double> concentration_measure_decay(const StateSpace& space,
                                                const ConstraintSet& constraints,
                                                const Eigen::VectorXd& u,
                                                const std::vector<double>& epsilons);

struct GrowthBound {
    bool applicable = false;
    double value = 0.0;  // may be +inf
    double epsilon = 0.0;
    double measure_e = 0.0;
    std::string reason;  // why the bound does not apply
};

/// Two-term Jensen lower bound on psi_s(b) from the mass concentration of
/// densities near the boundary:
///   mu(E) phi((1-eps)/mu(E)) + mu(X\E) phi(eps/mu(X\E)).
/// Applicable when eps < 1 and the monotonicity hypotheses hold, i.e. phi is
/// increasing from (1-eps)/mu(E) and decreasing up to eps/mu(X\E).
GrowthBound growth_lower_bound(const StateSpace& space, const ConstraintSet& constraints,
                               const Eigen::VectorXd& b, const EntropyFunction& phi,
                               const MembershipOptions& opts = {});

}  // namespace singpot
