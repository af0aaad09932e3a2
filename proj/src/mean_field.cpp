#include "singpot/mean_field.hpp"

#include "singpot/errors.hpp"
#include "singpot/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace singpot {

void MeanFieldModel::validate() const {
    const int k = model.k();
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("mean field: temperature must be positive");
    if (K.rows() != k || K.cols() != k) throw ConfigError("mean field: K must be k x k");
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, K.cwiseAbs().maxCoeff()))
        throw ConfigError("mean field: K must be symmetric");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ConfigError("mean field: K must be positive definite");
    if (H.size() != 0 && H.size() != k) throw ConfigError("mean field: H must have k entries");
}

Eigen::VectorXd MeanFieldModel::field() const {
    return H.size() == 0 ? Eigen::VectorXd::Zero(model.k()) : H;
}

namespace {

double energy_at(const MeanFieldModel& mf, const DualPoint& p) {
    const Eigen::VectorXd& b = p.moments;
    return mf.T * p.psi - 0.5 * b.dot(mf.K * b) - mf.field().dot(b);
}

Eigen::VectorXd equation(const MeanFieldModel& mf, const DualPoint& p) {
    return mf.T * p.lambda - mf.K * p.moments - mf.field();
}

}  // namespace

double onsager_dual_energy(const MeanFieldModel& mf, const Eigen::VectorXd& lambda) {
    return energy_at(mf, dual_point(mf.model, lambda));
}

Eigen::VectorXd onsager_dual_gradient(const MeanFieldModel& mf, const Eigen::VectorXd& lambda) {
    const DualPoint p = dual_point(mf.model, lambda);
    return p.covariance * equation(mf, p);
}

double critical_point_residual(const Model& model, const Eigen::VectorXd& lambda,
                               const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_f) {
    const DualPoint p = dual_point(model, lambda);
    return (lambda + grad_f(p.moments)).norm();
}

double critical_point_residual(const MeanFieldModel& mf, const Eigen::VectorXd& lambda) {
    return critical_point_residual(mf.model, lambda, [&](const Eigen::VectorXd& b) {
        return Eigen::VectorXd(-(mf.K * b + mf.field()) / mf.T);
    });
}

std::string to_string(CriticalKind kind) {
    switch (kind) {
        case CriticalKind::Minimum: return "min";
        case CriticalKind::Saddle: return "saddle";
        case CriticalKind::Maximum: return "max";
        case CriticalKind::Degenerate: return "degenerate";
    }
    return "degenerate";
}

std::string to_string(Stability s) {
    switch (s) {
        case Stability::GloballyStable: return "globally_stable";
        case Stability::Indeterminate: return "indeterminate";
        case Stability::Unstable: return "unstable";
    }
    return "indeterminate";
}

namespace {

constexpr double kLambdaLimit = 1e3;

/// Eigenvalue-shifted Newton descent on I with Armijo backtracking.
std::optional<Eigen::VectorXd> descend(const MeanFieldModel& mf, Eigen::VectorXd lambda,
                                       const MeanFieldOptions& opts) {
    const int k = mf.model.k();
    DualPoint p = dual_point(mf.model, lambda);
    double e = energy_at(mf, p);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Eigen::VectorXd F = equation(mf, p);
        if (F.lpNorm<Eigen::Infinity>() <= opts.tolerance) return lambda;
        const Eigen::MatrixXd& C = p.covariance;
        const Eigen::VectorXd g = C * F;
        Eigen::MatrixXd hess = mf.T * C - C * mf.K * C;
        hess = 0.5 * (hess + hess.transpose());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
        const double emax = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
        Eigen::VectorXd ev = eig.eigenvalues();
        for (int i = 0; i < k; ++i) ev(i) = std::max(std::abs(ev(i)), 1e-10 * emax);
        const Eigen::VectorXd d =
            -eig.eigenvectors() * (eig.eigenvectors().transpose() * g).cwiseQuotient(ev);
        const double slope = g.dot(d);
        bool accepted = false;
        double t = 1.0;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            const Eigen::VectorXd trial = lambda + t * d;
            DualPoint q;
            try {
                q = dual_point(mf.model, trial);
            } catch (const NumericalError&) {
                continue;
            }
            const double eq = energy_at(mf, q);
            if (!std::isfinite(eq)) continue;
            const bool armijo = eq <= e + 1e-4 * t * slope + 1e-15 * (1.0 + std::abs(e));
            const bool polish = equation(mf, q).lpNorm<Eigen::Infinity>() < 0.5 * F.lpNorm<Eigen::Infinity>() &&
                                eq <= e + 1e-13 * (1.0 + std::abs(e));
            if (armijo || polish) {
                lambda = trial;
                p = std::move(q);
                e = eq;
                accepted = true;
                break;
            }
        }
        if (!accepted || lambda.norm() > kLambdaLimit) return std::nullopt;
    }
    return std::nullopt;
}

/// Newton on T lambda - K b - H = 0, backtracking on its norm. Finds saddles
/// and maxima as well as minima.
std::optional<Eigen::VectorXd> newton_equation(const MeanFieldModel& mf, Eigen::VectorXd lambda,
                                               const MeanFieldOptions& opts) {
    const int k = mf.model.k();
    DualPoint p = dual_point(mf.model, lambda);
    Eigen::VectorXd F = equation(mf, p);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const double fn = F.norm();
        if (F.lpNorm<Eigen::Infinity>() <= opts.tolerance) return lambda;
        const Eigen::MatrixXd jac = mf.T * Eigen::MatrixXd::Identity(k, k) - mf.K * p.covariance;
        const Eigen::VectorXd d = -jac.colPivHouseholderQr().solve(F);
        if (!d.allFinite()) return std::nullopt;
        bool accepted = false;
        double t = 1.0;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            const Eigen::VectorXd trial = lambda + t * d;
            DualPoint q;
            try {
                q = dual_point(mf.model, trial);
            } catch (const NumericalError&) {
                continue;
            }
            const Eigen::VectorXd Fq = equation(mf, q);
            if (Fq.allFinite() && Fq.norm() < (1.0 - 1e-4 * t) * fn) {
                lambda = trial;
                p = std::move(q);
                F = Fq;
                accepted = true;
                break;
            }
        }
        if (!accepted || lambda.norm() > kLambdaLimit) return std::nullopt;
    }
    return std::nullopt;
}

CriticalPoint classify(const MeanFieldModel& mf, const Eigen::VectorXd& lambda) {
    const DualPoint p = dual_point(mf.model, lambda);
    CriticalPoint c;
    c.lambda = lambda;
    c.b = p.moments;
    c.energy = energy_at(mf, p);
    c.residual = critical_point_residual(mf, lambda);
    Eigen::MatrixXd hess = mf.T * p.covariance - p.covariance * mf.K * p.covariance;
    hess = 0.5 * (hess + hess.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess, Eigen::EigenvaluesOnly);
    c.hessian_eigenvalues = eig.eigenvalues();
    const double scale = std::max(1e-300, c.hessian_eigenvalues.cwiseAbs().maxCoeff());
    const double thr = 1e-9 * scale;
    const double lo = c.hessian_eigenvalues.minCoeff(), hi = c.hessian_eigenvalues.maxCoeff();
    if (c.hessian_eigenvalues.cwiseAbs().minCoeff() <= thr)
        c.kind = CriticalKind::Degenerate;
    else if (lo > 0.0)
        c.kind = CriticalKind::Minimum;
    else if (hi < 0.0)
        c.kind = CriticalKind::Maximum;
    else
        c.kind = CriticalKind::Saddle;
    return c;
}

}  // namespace

EquilibriumReport minimize_free_energy(const MeanFieldModel& mf, const MeanFieldOptions& opts) {
    mf.validate();
    const int k = mf.model.k();
    const int n_starts = opts.n_starts < 0 ? 8 * k : opts.n_starts;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> keig(mf.K, Eigen::EigenvaluesOnly);
    const double scale =
        std::max(1.0, keig.eigenvalues().maxCoeff() * mf.model.constraints.sup_vector_norm() / mf.T);

    std::vector<Eigen::VectorXd> starts{Eigen::VectorXd::Zero(k)};
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, scale);
    for (int s = 0; s < n_starts; ++s) {
        Eigen::VectorXd x(k);
        for (int i = 0; i < k; ++i) x(i) = normal(rng);
        starts.push_back(x);
    }

    EquilibriumReport report;
    report.starts = static_cast<int>(starts.size());
    std::vector<Eigen::VectorXd> found;
    const auto add = [&](const std::optional<Eigen::VectorXd>& x) {
        if (!x) return false;
        for (const auto& f : found)
            if ((f - *x).norm() <= opts.dedup_distance) return true;
        found.push_back(*x);
        return true;
    };
    for (const auto& s : starts) {
        bool ok = false;
        try {
            ok |= add(descend(mf, s, opts));
        } catch (const NumericalError&) {
        }
        try {
            ok |= add(newton_equation(mf, s, opts));
        } catch (const NumericalError&) {
        }
        if (ok) ++report.converged_starts;
    }
    if (found.empty()) throw NumericalError("minimize_free_energy: no start converged");

    for (const auto& x : found) report.points.push_back(classify(mf, x));
    std::sort(report.points.begin(), report.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (std::abs(a.energy - b.energy) > 1e-12 * (1.0 + std::abs(a.energy))) return a.energy < b.energy;
        return std::lexicographical_compare(a.lambda.data(), a.lambda.data() + a.lambda.size(), b.lambda.data(),
                                            b.lambda.data() + b.lambda.size());
    });
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const auto kind = report.points[i].kind;
        if (kind == CriticalKind::Minimum || kind == CriticalKind::Degenerate) {
            report.global_minimizer = static_cast<int>(i);
            break;
        }
    }
    return report;
}

StabilityReport stability_report(const MeanFieldModel& mf) {
    mf.validate();
    const auto& space = mf.model.space;
    const Eigen::MatrixXd gram = mf.model.constraints.gram(space);
    const int k = mf.model.k();
    const Eigen::VectorXd mean = gram.block(1, 0, k, 1);
    const Eigen::MatrixXd second = gram.block(1, 1, k, k);
    if (mean.cwiseAbs().maxCoeff() > 1e-8 ||
        (second - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-8)
        throw PreconditionError(
            "stability_report: constraints must be mean-free and L2-orthonormal; apply orthonormalize first");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mf.K, Eigen::EigenvaluesOnly);
    const double kmax = eig.eigenvalues().maxCoeff();
    StabilityReport r;
    r.T = mf.T;
    const double a_inf = mf.model.constraints.sup_vector_norm();
    r.global_bound = a_inf * a_inf * kmax;
    r.local_bound = kmax / space.total_mass();
    if (mf.T > r.global_bound)
        r.verdict = Stability::GloballyStable;
    else if (mf.T < r.local_bound)
        r.verdict = Stability::Unstable;
    else
        r.verdict = Stability::Indeterminate;
    return r;
}

double bifurcation_temperature(const MeanFieldModel& mf, double lo, double hi, double rel_tol, double b_floor,
                               const MeanFieldOptions& opts) {
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("bifurcation_temperature: need 0 < lo < hi");
    const auto nontrivial = [&](double T) {
        MeanFieldModel m = mf;
        m.T = T;
        const auto rep = minimize_free_energy(m, opts);
        return rep.global_minimizer >= 0 &&
               rep.points[static_cast<std::size_t>(rep.global_minimizer)].b.norm() > b_floor;
    };
    if (!nontrivial(lo)) throw NumericalError("bifurcation_temperature: no nontrivial minimiser at the lower T");
    if (nontrivial(hi)) throw NumericalError("bifurcation_temperature: nontrivial minimiser at the upper T");
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (nontrivial(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x) {
    const int k = static_cast<int>(x.size());
    Eigen::MatrixXd J(k, k);
    for (int i = 0; i < k; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return 0.5 * (J + J.transpose());
}

}  // namespace

ConstrainedResult constrained_max_entropy(const Model& model, const ScalarField& g, const VectorField& grad_g,
                                          unsigned seed, const SolverOptions& opts) {
    const int k = model.k();
    const DualPoint p0 = dual_point(model, Eigen::VectorXd::Zero(k));
    const Eigen::VectorXd b0 = p0.moments;
    const double g0 = g(b0);
    ConstrainedResult res;
    if (std::abs(g0) <= 1e-12) {
        res.b = b0;
        res.lambda = Eigen::VectorXd::Zero(k);
        res.psi = p0.psi;
        res.constraint_value = g0;
        return res;
    }

    // feasible start: a sign change of g on a segment from b0 (inside Q by convexity)
    std::optional<Eigen::VectorXd> far;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double s : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        for (int n = 0; n < 64 && !far; ++n) {
            Eigen::VectorXd lam(k);
            for (int i = 0; i < k; ++i) lam(i) = s * normal(rng);
            const Eigen::VectorXd b = dual_point(model, lam).moments;
            if (std::signbit(g(b)) != std::signbit(g0)) far = b;
        }
        if (far) break;
    }
    if (!far) throw ConfigError("constrained_max_entropy: no feasible point found by sampling");
    double tlo = 0.0, thi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (tlo + thi);
        const double gm = g(b0 + mid * (*far - b0));
        (std::signbit(gm) == std::signbit(g0) ? tlo : thi) = mid;
    }
    Eigen::VectorXd b = b0 + 0.5 * (tlo + thi) * (*far - b0);

    DualSolution sol = dual_solve(model, b, opts);
    Eigen::VectorXd dg = grad_g(b);
    double eta = dg.squaredNorm() > 0.0 ? sol.lambda.dot(dg) / dg.squaredNorm() : 0.0;

    const auto residual = [&](const DualSolution& s, const Eigen::VectorXd& bb, double e) {
        Eigen::VectorXd r(k + 1);
        r.head(k) = s.lambda - e * grad_g(bb);
        r(k) = g(bb);
        return r;
    };
    Eigen::VectorXd r = residual(sol, b, eta);
    int it = 0;
    for (; it < 100 && r.lpNorm<Eigen::Infinity>() > 1e-10; ++it) {
        const DualPoint p = dual_point(model, sol.lambda);
        const Eigen::MatrixXd hpsi = p.covariance.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
        kkt.topLeftCorner(k, k) = hpsi - eta * fd_jacobian(grad_g, b);
        kkt.block(0, k, k, 1) = -dg;
        kkt.block(k, 0, 1, k) = dg.transpose();
        const Eigen::VectorXd step = -kkt.completeOrthogonalDecomposition().solve(r);
        bool accepted = false;
        double t = 1.0;
        for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
            const Eigen::VectorXd bt = b + t * step.head(k);
            const double et = eta + t * step(k);
            try {
                const DualSolution st = dual_solve(model, bt, opts, sol.lambda);
                const Eigen::VectorXd rt = residual(st, bt, et);
                if (rt.norm() < (1.0 - 1e-4 * t) * r.norm()) {
                    b = bt;
                    eta = et;
                    sol = st;
                    r = rt;
                    dg = grad_g(b);
                    accepted = true;
                    break;
                }
            } catch (const NumericalError&) {
            }
        }
        if (!accepted) break;
    }
    if (r.lpNorm<Eigen::Infinity>() > 1e-8)
        throw NumericalError("constrained_max_entropy: KKT iteration stalled at residual " +
                             numerics::format_double(r.lpNorm<Eigen::Infinity>()));
    res.b = b;
    res.lambda = sol.lambda;
    res.eta = eta;
    res.psi = sol.psi_value;
    res.constraint_value = g(b);
    res.kkt_residual = r.lpNorm<Eigen::Infinity>();
    res.iterations = it;
    return res;
}

}  // namespace singpot
