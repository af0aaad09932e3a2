#include "singpot/moment_geometry.hpp"

#include "singpot/errors.hpp"
#include "singpot/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace singpot {

bool HalfSpaceSet::contains(const Eigen::VectorXd& b) const { return signed_distance(b) > 0.0; }

double HalfSpaceSet::signed_distance(const Eigen::VectorXd& b) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < normals.size(); ++i)
        d = std::min(d, (offsets[i] - normals[i].dot(b)) / normals[i].norm());
    return d;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Inside: return "inside";
        case Verdict::Outside: return "outside";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

namespace {

/// Best nodes from well-separated regions: near-ties between distant local
/// maxima are common (McMillan vertices), and only one of them is global.
std::vector<int> refinement_seeds(const StateSpace& space, const Eigen::VectorXd& values) {
    constexpr int pool = 64, max_seeds = 4;
    constexpr double separation = 0.15;  // in box-scaled coordinates
    std::vector<int> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), 0);
    const auto top = std::min<std::size_t>(pool, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(top), idx.end(),
                      [&](int a, int b) { return values(a) > values(b); });
    const Eigen::VectorXd span = (space.upper() - space.lower()).cwiseMax(1e-300);
    const auto dist = [&](int a, int b) {
        double s = 0.0;
        for (int c = 0; c < space.dimension(); ++c) {
            double d = std::abs(space.nodes()(c, a) - space.nodes()(c, b)) / span(c);
            if (space.periodic(c)) d = std::min(d, 1.0 - d);
            s += d * d;
        }
        return std::sqrt(s);
    };
    std::vector<int> seeds;
    for (std::size_t i = 0; i < top && static_cast<int>(seeds.size()) < max_seeds; ++i) {
        const int j = idx[i];
        if (std::all_of(seeds.begin(), seeds.end(), [&](int s) { return dist(s, j) >= separation; }))
            seeds.push_back(j);
    }
    return seeds;
}

}  // namespace

SupportResult support(const StateSpace& space, const ConstraintSet& constraints,
                      const Eigen::VectorXd& u, bool refine) {
    if (u.size() != constraints.count())
        throw std::invalid_argument("support: direction has wrong dimension");
    if (u.norm() == 0.0) throw std::invalid_argument("support: zero direction");
    const Eigen::VectorXd projected = constraints.values().transpose() * u;
    Eigen::Index arg = 0;
    SupportResult r;
    r.direction = u;
    r.value = projected.maxCoeff(&arg);
    r.argmax_node = static_cast<int>(arg);
    r.argmax_point = space.nodes().col(arg);
    if (refine && constraints.has_evaluator()) {
        const auto f = [&](std::span<const double> p) { return u.dot(constraints.evaluate(p)); };
        for (const int node : refinement_seeds(space, projected)) {
            auto [point, value] = refine_maximum(space, f, node);
            if (value > r.value) {
                r.value = value;
                r.argmax_point = std::move(point);
            }
        }
    }
    return r;
}

namespace {

double default_tolerance(const ConstraintSet& constraints, const MembershipOptions& opts) {
    return opts.tolerance >= 0.0 ? opts.tolerance : 1e-6 * constraints.sup_norm().maxCoeff();
}

}  // namespace

MembershipResult membership(const StateSpace& space, const ConstraintSet& constraints,
                            const Eigen::VectorXd& b, const MembershipOptions& opts) {
    const int k = constraints.count();
    if (b.size() != k) throw std::invalid_argument("membership: b has wrong dimension");
    const double tol = default_tolerance(constraints, opts);

    // coarse scan with node maxima only
    const auto dirs = numerics::sphere_directions(k, std::max(opts.n_directions, 2));
    double best_margin = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_dir;
    for (const auto& u : dirs) {
        const double m = (constraints.values().transpose() * u).maxCoeff() - b.dot(u);
        if (m < best_margin) {
            best_margin = m;
            best_dir = u;
        }
    }

    const auto margin_of = [&](const Eigen::VectorXd& v) {
        const double n = v.norm();
        if (n == 0.0) return std::numeric_limits<double>::infinity();
        const Eigen::VectorXd u = v / n;
        return support(space, constraints, u).value - b.dot(u);
    };

    MembershipResult result;
    result.witness = best_dir;
    result.margin = margin_of(best_dir);
    if (k > 1) {
        const double scale = 2.0 * std::numbers::pi / static_cast<double>(dirs.size());
        const auto nm = numerics::nelder_mead(margin_of, best_dir, scale, 1e-13, 600);
        if (nm.value < result.margin) {
            result.margin = nm.value;
            result.witness = nm.x / nm.x.norm();
        }
    } else {
        for (const auto& u : dirs) {
            const double m = margin_of(u);
            if (m < result.margin) {
                result.margin = m;
                result.witness = u;
            }
        }
    }
    if (result.margin <= 0.0)
        result.verdict = Verdict::Outside;
    else if (result.margin <= tol)
        result.verdict = Verdict::Indeterminate;
    else
        result.verdict = Verdict::Inside;
    return result;
}

BoundaryDistance distance_to_boundary(const StateSpace& space, const ConstraintSet& constraints,
                                      const Eigen::VectorXd& b, const MembershipOptions& opts) {
    const auto m = membership(space, constraints, b, opts);
    if (m.verdict != Verdict::Inside)
        throw PreconditionError("distance_to_boundary: b is " + to_string(m.verdict) +
                                " (margin " + numerics::format_double(m.margin) + ")");
    BoundaryDistance d;
    d.direction = m.witness;
    d.support_value = support(space, constraints, m.witness).value;
    d.distance = d.support_value - b.dot(m.witness);
    return d;
}

ConcentrationSet concentration_set_for(const StateSpace& space, const ConstraintSet& constraints,
                                       const Eigen::VectorXd& u, double support_value,
                                       double epsilon) {
    ConcentrationSet set;
    set.direction = u;
    set.epsilon = epsilon;
    set.support_value = support_value;
    const Eigen::VectorXd projected = constraints.values().transpose() * u;
    set.mask.assign(static_cast<std::size_t>(space.size()), false);
    for (int j = 0; j < space.size(); ++j) {
        if (support_value < projected(j) + epsilon) {
            set.mask[static_cast<std::size_t>(j)] = true;
            set.measure += space.weights()(j);
        }
    }
    return set;
}

std::optional<ConcentrationSet> concentration_set(const StateSpace& space,
                                                  const ConstraintSet& constraints,
                                                  const Eigen::VectorXd& b,
                                                  const MembershipOptions& opts) {
    const auto d = distance_to_boundary(space, constraints, b, opts);
    const double eps = std::sqrt(d.distance);
    if (eps >= 1.0) return std::nullopt;
    return concentration_set_for(space, constraints, d.direction, d.support_value, eps);
}

std::vector<double> concentration_measure_decay(const StateSpace& space,
                                                const ConstraintSet& constraints,
                                                const Eigen::VectorXd& u,
                                                const std::vector<double>& epsilons) {
    const auto s = support(space, constraints, u);
    std::vector<double> out;
    out.reserve(epsilons.size());
    for (double eps : epsilons)
        out.push_back(concentration_set_for(space, constraints, u, s.value, eps).measure);
    return out;
}

GrowthBound growth_lower_bound(const StateSpace& space, const ConstraintSet& constraints,
                               const Eigen::VectorXd& b, const EntropyFunction& phi,
                               const MembershipOptions& opts) {
    GrowthBound g;
    const auto set = concentration_set(space, constraints, b, opts);
    if (!set) {
        g.reason = "eps >= 1";
        return g;
    }
    g.epsilon = set->epsilon;
    g.measure_e = set->measure;
    const double mu_e = set->measure;
    const double mu_rest = space.total_mass() - mu_e;
    const double eps = set->epsilon;
    if (mu_rest <= 1e-14 * space.total_mass()) {
        g.reason = "X \\ E has no mass at this quadrature resolution";
        return g;
    }
    const double x_min = phi.inverse_derivative(0.0);
    const double upper_arg = (1.0 - eps) / mu_e;
    const double lower_arg = eps / mu_rest;
    if (upper_arg < x_min) {
        g.reason = "phi not increasing on [(1-eps)/mu(E), inf)";
        return g;
    }
    if (lower_arg > x_min) {
        g.reason = "phi not decreasing on (0, eps/mu(X\\E)]";
        return g;
    }
    g.applicable = true;
    g.value = mu_e * phi.value(upper_arg) + mu_rest * phi.value(lower_arg);
    return g;
}

}  // namespace singpot
