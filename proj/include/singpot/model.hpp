#pragma once

#include "singpot/entropy.hpp"
#include "singpot/state_space.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace singpot {

/// Open polytope {b : n_i . b < c_i for all i}; used for moment sets that are
/// known in closed form.
struct HalfSpaceSet {
    std::vector<Eigen::VectorXd> normals;
    std::vector<double> offsets;

    bool contains(const Eigen::VectorXd& b) const;
    /// min_i (c_i - n_i . b) / |n_i|: the distance to the boundary for
    /// interior points, negative outside.
    double signed_distance(const Eigen::VectorXd& b) const;
};

/// A measure space, its constraint functions and the entropy in use.
struct Model {
    std::string name;
    StateSpace space;
    ConstraintSet constraints;
    EntropyPtr entropy;
    std::optional<HalfSpaceSet> closed_form_q;

    int k() const { return constraints.count(); }
    const EntropyFunction& phi() const { return *entropy; }
};

}  // namespace singpot
