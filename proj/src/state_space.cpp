#include "singpot/state_space.hpp"

#include "singpot/errors.hpp"
#include "singpot/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace singpot {

std::string to_string(SpaceKind kind) {
    switch (kind) {
        case SpaceKind::Interval: return "interval";
        case SpaceKind::Sphere2: return "sphere2";
        case SpaceKind::McMillan: return "mcmillan";
        case SpaceKind::Custom: return "custom";
    }
    return "custom";
}

StateSpace::StateSpace(SpaceKind kind, Eigen::MatrixXd nodes, Eigen::VectorXd weights,
                       Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<bool> periodic)
    : kind_(kind),
      nodes_(std::move(nodes)),
      weights_(std::move(weights)),
      total_mass_(0.0),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      periodic_(std::move(periodic)) {
    if (nodes_.cols() == 0) throw ConfigError("state space has no nodes");
    if (weights_.size() != nodes_.cols())
        throw ConfigError("state space: weight count does not match node count");
    if (lower_.size() != nodes_.rows() || upper_.size() != nodes_.rows() ||
        periodic_.size() != static_cast<std::size_t>(nodes_.rows()))
        throw ConfigError("state space: box dimension does not match node dimension");
    if ((weights_.array() <= 0.0).any()) throw ConfigError("state space: weights must be positive");
    total_mass_ = weights_.sum();

    spacing_.resize(nodes_.rows());
    for (int c = 0; c < nodes_.rows(); ++c) {
        std::vector<double> coords;
        coords.reserve(static_cast<std::size_t>(nodes_.cols()));
        for (int j = 0; j < nodes_.cols(); ++j) coords.push_back(nodes_(c, j));
        std::sort(coords.begin(), coords.end());
        coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        double gap = std::max(coords.front() - lower_(c), upper_(c) - coords.back());
        for (std::size_t i = 1; i < coords.size(); ++i) gap = std::max(gap, coords[i] - coords[i - 1]);
        spacing_(c) = gap > 0.0 ? gap : (upper_(c) - lower_(c));
    }
}

StateSpace build_interval_space(int quadrature_order, bool normalized) {
    if (quadrature_order < 2) throw ConfigError("interval space: quadrature order must be >= 2");
    const auto rule = numerics::gauss_legendre(quadrature_order, -1.0, 1.0);
    const int n = quadrature_order;
    Eigen::MatrixXd nodes(1, n);
    Eigen::VectorXd weights(n);
    const double scale = normalized ? 0.5 : 1.0;
    for (int i = 0; i < n; ++i) {
        nodes(0, i) = rule.nodes[static_cast<std::size_t>(i)];
        weights(i) = scale * rule.weights[static_cast<std::size_t>(i)];
    }
    return StateSpace(SpaceKind::Interval, std::move(nodes), std::move(weights),
                      Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0), {false});
}

namespace {

// Tensor grid: Gauss-Legendre in cos(theta) times a periodic rule in the
// second coordinate on [0, period).
StateSpace polar_tensor_space(SpaceKind kind, int n_theta, int n_second, double period,
                              double weight_factor) {
    const auto c_rule = numerics::gauss_legendre(n_theta, -1.0, 1.0);
    const auto s_rule = numerics::periodic_midpoint(n_second, 0.0, period);
    const int n = n_theta * n_second;
    Eigen::MatrixXd nodes(2, n);
    Eigen::VectorXd weights(n);
    int j = 0;
    // descending cos so theta is ascending
    for (int i = n_theta - 1; i >= 0; --i) {
        const double theta = std::acos(std::clamp(c_rule.nodes[static_cast<std::size_t>(i)], -1.0, 1.0));
        for (int m = 0; m < n_second; ++m, ++j) {
            nodes(0, j) = theta;
            nodes(1, j) = s_rule.nodes[static_cast<std::size_t>(m)];
            weights(j) = weight_factor * c_rule.weights[static_cast<std::size_t>(i)] *
                         s_rule.weights[static_cast<std::size_t>(m)];
        }
    }
    Eigen::VectorXd lo(2), hi(2);
    lo << 0.0, 0.0;
    hi << std::numbers::pi, period;
    return StateSpace(kind, std::move(nodes), std::move(weights), lo, hi, {false, true});
}

}  // namespace

StateSpace build_mcmillan_space(int n_theta, int n_x) {
    if (n_theta < 2 || n_x < 2) throw ConfigError("mcmillan space: grid sizes must be >= 2");
    return polar_tensor_space(SpaceKind::McMillan, n_theta, n_x, 1.0, 2.0 * std::numbers::pi);
}

StateSpace build_sphere_space(int n_theta, int n_phi) {
    if (n_theta < 2 || n_phi < 3) throw ConfigError("sphere space: grid too small");
    return polar_tensor_space(SpaceKind::Sphere2, n_theta, n_phi, 2.0 * std::numbers::pi, 1.0);
}

StateSpace build_circle_space(int n) {
    if (n < 3) throw ConfigError("circle space: need at least 3 nodes");
    const auto rule = numerics::periodic_midpoint(n, 0.0, 2.0 * std::numbers::pi);
    Eigen::MatrixXd nodes(1, n);
    Eigen::VectorXd weights(n);
    for (int i = 0; i < n; ++i) {
        nodes(0, i) = rule.nodes[static_cast<std::size_t>(i)];
        weights(i) = 1.0 / n;
    }
    return StateSpace(SpaceKind::Custom, std::move(nodes), std::move(weights),
                      Eigen::VectorXd::Constant(1, 0.0),
                      Eigen::VectorXd::Constant(1, 2.0 * std::numbers::pi), {true});
}

std::pair<Eigen::VectorXd, double> refine_maximum(
    const StateSpace& space, const std::function<double(std::span<const double>)>& f, int start) {
    Eigen::VectorXd p = space.nodes().col(start);
    double best = f({p.data(), static_cast<std::size_t>(p.size())});
    const int d = space.dimension();
    auto eval_at = [&](int c, double v) {
        Eigen::VectorXd q = p;
        q(c) = v;
        return f({q.data(), static_cast<std::size_t>(q.size())});
    };
    for (int sweep = 0; sweep < 4; ++sweep) {
        double before = best;
        for (int c = 0; c < d; ++c) {
            const double h = space.spacing()(c);
            double lo = p(c) - h, hi = p(c) + h;
            if (!space.periodic(c)) {
                lo = std::max(lo, space.lower()(c));
                hi = std::min(hi, space.upper()(c));
            }
            if (hi <= lo) continue;
            const auto line = [&](double v) { return eval_at(c, v); };
            double cand = numerics::golden_section_max(line, lo, hi, 1e-11 * (1.0 + h));
            double fc = line(cand);
            for (double edge : {lo, hi}) {
                const double fe = line(edge);
                if (fe > fc) {
                    fc = fe;
                    cand = edge;
                }
            }
            if (fc > best) {
                best = fc;
                p(c) = cand;
            }
        }
        if (best - before <= 1e-15 * (1.0 + std::abs(best))) break;
    }
    return {p, best};
}

ConstraintSet ConstraintSet::from_evaluator(const StateSpace& space, int k, PointEvaluator evaluator,
                                            std::vector<std::string> labels) {
    if (k < 1) throw ConfigError("constraint set: need at least one function");
    if (!evaluator) throw ConfigError("constraint set: empty evaluator");
    ConstraintSet set;
    set.values_.resize(k, space.size());
    std::vector<double> out(static_cast<std::size_t>(k));
    for (int j = 0; j < space.size(); ++j) {
        const Eigen::VectorXd p = space.nodes().col(j);
        evaluator({p.data(), static_cast<std::size_t>(p.size())}, out);
        for (int i = 0; i < k; ++i) set.values_(i, j) = out[static_cast<std::size_t>(i)];
    }
    set.evaluator_ = std::move(evaluator);
    set.labels_ = std::move(labels);
    set.finalize(space);
    return set;
}

ConstraintSet ConstraintSet::from_table(const StateSpace& space, Eigen::MatrixXd values,
                                        std::vector<std::string> labels) {
    if (values.cols() != space.size())
        throw ConfigError("constraint table: column count does not match node count");
    if (values.rows() < 1) throw ConfigError("constraint table: need at least one function");
    ConstraintSet set;
    set.values_ = std::move(values);
    set.labels_ = std::move(labels);
    set.finalize(space);
    return set;
}

void ConstraintSet::finalize(const StateSpace& space) {
    const int k = count();
    if (!values_.allFinite()) throw ConfigError("constraint functions must be finite at all nodes");
    if (labels_.empty())
        for (int i = 0; i < k; ++i) labels_.push_back("a" + std::to_string(i + 1));
    if (static_cast<int>(labels_.size()) != k) throw ConfigError("constraint labels: wrong count");
    sup_norm_.resize(k);
    for (int i = 0; i < k; ++i) {
        Eigen::Index arg = 0;
        const double node_max = values_.row(i).cwiseAbs().maxCoeff(&arg);
        if (node_max == 0.0)
            throw ConfigError("constraint function " + labels_[static_cast<std::size_t>(i)] +
                              " vanishes at every node");
        sup_norm_(i) = node_max;
        if (evaluator_) {
            const auto f = [&](std::span<const double> p) { return std::abs(evaluate(p)(i)); };
            sup_norm_(i) = std::max(node_max, refine_maximum(space, f, static_cast<int>(arg)).second);
        }
    }
    Eigen::Index arg = 0;
    const double node_max = values_.colwise().squaredNorm().maxCoeff(&arg);
    sup_vector_norm_ = std::sqrt(node_max);
    if (evaluator_) {
        const auto f = [&](std::span<const double> p) { return evaluate(p).squaredNorm(); };
        sup_vector_norm_ =
            std::sqrt(std::max(node_max, refine_maximum(space, f, static_cast<int>(arg)).second));
    }
}

Eigen::VectorXd ConstraintSet::evaluate(std::span<const double> point) const {
    if (!evaluator_) throw PreconditionError("constraint set has no closed-form evaluator");
    Eigen::VectorXd out(count());
    evaluator_(point, {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

ConstraintSet ConstraintSet::transformed(const StateSpace& space, const Eigen::MatrixXd& A,
                                         const Eigen::VectorXd& c) const {
    ConstraintSet set;
    set.values_ = (A * values_).colwise() + c;
    if (evaluator_) {
        const auto inner = evaluator_;
        const int k_in = count();
        set.evaluator_ = [inner, A, c, k_in](std::span<const double> p, std::span<double> out) {
            Eigen::VectorXd tmp(k_in);
            inner(p, {tmp.data(), static_cast<std::size_t>(k_in)});
            const Eigen::VectorXd r = A * tmp + c;
            std::copy(r.data(), r.data() + r.size(), out.begin());
        };
    }
    for (int i = 0; i < A.rows(); ++i) set.labels_.push_back("e" + std::to_string(i + 1));
    set.finalize(space);
    return set;
}

Eigen::MatrixXd ConstraintSet::gram(const StateSpace& space) const {
    const int k = count();
    Eigen::MatrixXd F(k + 1, space.size());
    F.row(0).setOnes();
    F.bottomRows(k) = values_;
    return F * space.weights().asDiagonal() * F.transpose();
}

PseudoHaarReport pseudo_haar_check(const StateSpace& space, const ConstraintSet& constraints,
                                   int n_subsets, double floor, unsigned seed) {
    const int n = space.size();
    const int k = constraints.count();
    // scale each function to unit sup norm so the floor is dimensionless
    Eigen::MatrixXd F(k + 1, n);
    F.row(0).setOnes();
    for (int i = 0; i < k; ++i)
        F.row(i + 1) = constraints.values().row(i) / constraints.sup_norm()(i);

    std::mt19937_64 rng(seed);
    PseudoHaarReport report;
    report.min_singular_value = std::numeric_limits<double>::infinity();
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    const double half = 0.5 * space.total_mass();

    for (int s = 0; s < n_subsets; ++s) {
        Eigen::VectorXd mask = Eigen::VectorXd::Zero(n);
        if (s % 2 == 0) {
            // scattered subset
            std::shuffle(perm.begin(), perm.end(), rng);
            double mass = 0.0;
            for (int j : perm) {
                if (mass >= half) break;
                mask(j) = 1.0;
                mass += space.weights()(j);
            }
        } else {
            // slab in one coordinate: nodes on one side of a random cut
            std::uniform_int_distribution<int> coord_dist(0, space.dimension() - 1);
            const int c = coord_dist(rng);
            std::sort(perm.begin(), perm.end(),
                      [&](int a, int b) { return space.nodes()(c, a) < space.nodes()(c, b); });
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const bool from_top = u(rng) < 0.5;
            double mass = 0.0;
            for (int idx = 0; idx < n && mass < half; ++idx) {
                const int j = perm[static_cast<std::size_t>(from_top ? n - 1 - idx : idx)];
                mask(j) = 1.0;
                mass += space.weights()(j);
            }
        }
        const Eigen::VectorXd w = space.weights().cwiseProduct(mask);
        const double mass = w.sum();
        if (mass < 1e-14 * space.total_mass()) {
            ++report.subsets_skipped;
            continue;
        }
        const Eigen::MatrixXd G = F * (w / mass).asDiagonal() * F.transpose();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
        report.min_singular_value = std::min(report.min_singular_value, eig.eigenvalues().minCoeff());
        ++report.subsets_checked;
    }
    report.pass = report.subsets_checked > 0 && report.min_singular_value > floor;
    return report;
}

ConstraintSet orthonormalize(const ConstraintSet& constraints, const StateSpace& space) {
    const int k = constraints.count();
    const double mass = space.total_mass();
    const Eigen::VectorXd mean = constraints.values() * space.weights() / mass;
    const Eigen::MatrixXd centered = constraints.values().colwise() - mean;
    const Eigen::MatrixXd cov = centered * space.weights().asDiagonal() * centered.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(condition < 1e12))
        throw ConfigError("orthonormalize: Gram matrix is numerically singular (condition number " +
                          numerics::format_double(condition) + ")");
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::MatrixXd A = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(k, k));
    return constraints.transformed(space, A, -A * mean);
}

}  // namespace singpot
