#include "singpot/approximation.hpp"

#include "singpot/errors.hpp"
#include "singpot/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace singpot {

Discriminants1D discriminants_from_moments(double m2, double m3, double m4) {
    if (!(m2 > 0.0)) throw ConfigError("discriminants: m2 must be positive (degenerate constraint)");
    Discriminants1D d;
    d.m2 = m2;
    d.m3 = m3;
    d.m4 = m4;
    d.d1 = 3.0 * m3 * m3 - m2 * m4 + 3.0 * m2 * m2 * m2;
    d.d2 = 72.0 * m2 * m2 * m2 - 24.0 * m2 * m4 + 63.0 * m3 * m3;
    d.d3 = 6.0 * m2 * m2 * m2 - 2.0 * m2 * m4 + 5.0 * m3 * m3;
    d.coercive = d.d1 > 0.0;
    d.single_critical_point = d.d2 > 0.0;
    d.convex = d.d3 > 0.0;
    return d;
}

Discriminants1D discriminants_1d(const Model& model) {
    if (model.k() != 1) throw ConfigError("discriminants_1d: needs exactly one constraint");
    const auto& space = model.space;
    const double mu = space.total_mass();
    Eigen::ArrayXd a = model.constraints.values().row(0).transpose().array();
    a -= space.integrate(a.matrix()) / mu;
    const auto moment = [&](int p) { return space.integrate(a.pow(p).matrix()) / mu; };
    return discriminants_from_moments(moment(2), moment(3), moment(4));
}

namespace {

bool next_tuple(std::vector<int>& idx, int k) {
    for (int p = static_cast<int>(idx.size()) - 1; p >= 0; --p) {
        if (++idx[static_cast<std::size_t>(p)] < k) return true;
        idx[static_cast<std::size_t>(p)] = 0;
    }
    return false;
}

/// Full contraction T b...b.
double contract_all(const MomentTensor& t, const Eigen::VectorXd& b) {
    double s = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(t.order()), 0);
    do {
        double p = t.at(idx);
        for (int i : idx) p *= b(i);
        s += p;
    } while (next_tuple(idx, t.dimension()));
    return s;
}

/// T b...b with the first index left free (order-1 contractions).
Eigen::VectorXd contract_but_one(const MomentTensor& t, const Eigen::VectorXd& b) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(t.dimension());
    std::vector<int> idx(static_cast<std::size_t>(t.order()), 0);
    do {
        double p = t.at(idx);
        for (std::size_t q = 1; q < idx.size(); ++q) p *= b(idx[q]);
        g(idx[0]) += p;
    } while (next_tuple(idx, t.dimension()));
    return g;
}

Eigen::MatrixXd contract_but_two(const MomentTensor& t, const Eigen::VectorXd& b) {
    const int k = t.dimension();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
    std::vector<int> idx(static_cast<std::size_t>(t.order()), 0);
    do {
        double p = t.at(idx);
        for (std::size_t q = 2; q < idx.size(); ++q) p *= b(idx[q]);
        h(idx[0], idx[1]) += p;
    } while (next_tuple(idx, k));
    return h;
}

/// Applies the matrix V to every index of t.
MomentTensor transform_all(const MomentTensor& t, const Eigen::MatrixXd& V) {
    const int k = t.dimension();
    MomentTensor cur = t;
    for (int slot = 0; slot < t.order(); ++slot) {
        MomentTensor next(t.order(), k);
        std::vector<int> idx(static_cast<std::size_t>(t.order()), 0);
        do {
            double s = 0.0;
            std::vector<int> src = idx;
            for (int a = 0; a < k; ++a) {
                src[static_cast<std::size_t>(slot)] = a;
                s += V(idx[static_cast<std::size_t>(slot)], a) * cur.at(src);
            }
            next.at(idx) = s;
        } while (next_tuple(idx, k));
        cur = std::move(next);
    }
    return cur;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TaylorQuartic::TaylorQuartic(double constant, MomentTensor q2, MomentTensor t3, MomentTensor t4)
    : constant_(constant), q2_(std::move(q2)), t3_(std::move(t3)), t4_(std::move(t4)) {
    if (q2_.order() != 2 || t3_.order() != 3 || t4_.order() != 4)
        throw std::invalid_argument("TaylorQuartic: tensor orders must be 2, 3, 4");
    if (t3_.dimension() != q2_.dimension() || t4_.dimension() != q2_.dimension())
        throw std::invalid_argument("TaylorQuartic: tensor dimensions differ");
}

double TaylorQuartic::evaluate(const Eigen::VectorXd& b) const {
    return constant_ + contract_all(q2_, b) / 2.0 + contract_all(t3_, b) / 6.0 + contract_all(t4_, b) / 24.0;
}

Eigen::VectorXd TaylorQuartic::gradient(const Eigen::VectorXd& b) const {
    return contract_but_one(q2_, b) + contract_but_one(t3_, b) / 2.0 + contract_but_one(t4_, b) / 6.0;
}

Eigen::MatrixXd TaylorQuartic::hessian(const Eigen::VectorXd& b) const {
    return contract_but_two(q2_, b) + contract_but_two(t3_, b) + contract_but_two(t4_, b) / 2.0;
}

double TaylorQuartic::quartic_form(const Eigen::VectorXd& b) const { return contract_all(t4_, b) / 24.0; }

std::map<std::vector<int>, double> TaylorQuartic::monomials() const {
    const int k = dimension();
    std::map<std::vector<int>, double> out;
    out[std::vector<int>(static_cast<std::size_t>(k), 0)] = constant_;
    for (const MomentTensor* t : {&q2_, &t3_, &t4_}) {
        const double scale = 1.0 / factorial(t->order());
        std::vector<int> idx(static_cast<std::size_t>(t->order()), 0);
        do {
            std::vector<int> expo(static_cast<std::size_t>(k), 0);
            for (int i : idx) ++expo[static_cast<std::size_t>(i)];
            out[expo] += scale * t->at(idx);
        } while (next_tuple(idx, k));
    }
    return out;
}

TaylorQuartic taylor4(const Model& model) {
    if (!model.phi().is_shannon())
        throw PreconditionError("taylor4: the expansion is implemented for the Shannon entropy only");
    const int k = model.k();
    const double mu = model.space.total_mass();
    const Eigen::VectorXd rho0 = Eigen::VectorXd::Constant(model.space.size(), 1.0 / mu);

    const MomentTensor m1 = moment_tensor(model, 1, rho0);
    const double scale = std::max(1.0, model.constraints.sup_norm().maxCoeff());
    for (int i = 0; i < k; ++i)
        if (std::abs(m1({i})) > 1e-10 * scale)
            throw PreconditionError("taylor4: constraints are not mean-free (project out the mean first)");

    const MomentTensor m2 = moment_tensor(model, 2, rho0);
    const MomentTensor m3 = moment_tensor(model, 3, rho0);
    MomentTensor m4 = moment_tensor(model, 4, rho0);

    Eigen::MatrixXd M2(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) M2(i, j) = m2({i, j});
    const Eigen::MatrixXd V = M2.ldlt().solve(Eigen::MatrixXd::Identity(k, k));

    // fourth cumulant
    std::vector<int> idx(4, 0);
    do {
        const int i = idx[0], j = idx[1], l = idx[2], m = idx[3];
        m4.at(idx) -= M2(i, j) * M2(l, m) + M2(i, l) * M2(j, m) + M2(i, m) * M2(j, l);
    } while (next_tuple(idx, k));

    MomentTensor q2(2, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) q2.at({i, j}) = 0.5 * (V(i, j) + V(j, i));

    const MomentTensor u3 = transform_all(m3, V);
    MomentTensor t3(3, k);
    std::vector<int> i3(3, 0);
    do t3.at(i3) = -u3.at(i3);
    while (next_tuple(i3, k));

    const MomentTensor u4 = transform_all(m4, V);
    // W_ij,lm = sum_fg U3_ijf M2_fg U3_glm
    const auto pair = [&](int i, int j, int l, int m) {
        double s = 0.0;
        for (int f = 0; f < k; ++f)
            for (int g = 0; g < k; ++g) s += u3.at({i, j, f}) * M2(f, g) * u3.at({g, l, m});
        return s;
    };
    MomentTensor t4(4, k);
    std::fill(idx.begin(), idx.end(), 0);
    do {
        const int i = idx[0], j = idx[1], l = idx[2], m = idx[3];
        t4.at(idx) = -u4.at(idx) + pair(i, j, l, m) + pair(i, l, j, m) + pair(i, m, j, l);
    } while (next_tuple(idx, k));

    const double constant = mu * model.phi().value(1.0 / mu);
    return TaylorQuartic(constant, q2, t3, t4);
}

QuarticShapeReport quartic_shape_report(const TaylorQuartic& q, const std::vector<Eigen::VectorXd>& points,
                                        int n_directions) {
    QuarticShapeReport r;
    const int k = q.dimension();
    double min_q = std::numeric_limits<double>::infinity();
    for (const auto& u : numerics::sphere_directions(k, std::max(n_directions, 2)))
        min_q = std::min(min_q, q.quartic_form(u));
    r.min_quartic_on_sphere = min_q;
    r.coercive = min_q > 0.0;

    if (k == 2) {
        const auto c = q.monomials();
        const double odd = std::abs(c.at({3, 1})) + std::abs(c.at({1, 3}));
        const double c40 = c.at({4, 0}), c22 = c.at({2, 2}), c04 = c.at({0, 4});
        if (odd <= 1e-12 * (std::abs(c40) + std::abs(c22) + std::abs(c04))) {
            Eigen::Matrix2d m;
            m << c40, c22 / 2.0, c22 / 2.0, c04;
            const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m, Eigen::EigenvaluesOnly);
            r.square_form_eigenvalues = eig.eigenvalues();
        }
    }

    for (const auto& p : points) {
        if (p.size() != k) throw std::invalid_argument("quartic_shape_report: point has wrong dimension");
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q.hessian(p), Eigen::EigenvaluesOnly);
        r.points.push_back(p);
        r.hessian_eigenvalues.push_back(eig.eigenvalues());
        if (!r.nonconvexity_witness && eig.eigenvalues()(0) < 0.0) r.nonconvexity_witness = p;
    }
    return r;
}

YosidaValue yosida(const Model& model, const Eigen::VectorXd& b, double J, const SolverOptions& opts,
                   const std::optional<Eigen::VectorXd>& warm_start) {
    if (!(J > 0.0)) throw std::invalid_argument("yosida: J must be positive");
    // the penalised dual is attained for every b; no lambda cap is needed
    SolverOptions o = opts;
    o.lambda_cap = std::numeric_limits<double>::infinity();
    YosidaValue y;
    y.J = J;
    y.b = b;
    y.solution = dual_solve(model, b, o, warm_start, J);
    y.value = y.solution.psi_value;
    y.gradient = y.solution.lambda;
    y.prox = b - y.solution.lambda / J;
    return y;
}

}  // namespace singpot
