#include "singpot/dual_solver.hpp"

#include "singpot/numerics.hpp"

#include <cmath>
#include <limits>

namespace singpot {

namespace {

// log int exp(y) dmu, stabilised
double log_partition(const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    const double m = y.maxCoeff();
    return m + std::log(w.dot((y.array() - m).exp().matrix()));
}

}  // namespace

double alpha_for_lambda(const Model& model, const Eigen::VectorXd& lambda) {
    const auto& w = model.space.weights();
    const Eigen::VectorXd y = model.constraints.values().transpose() * lambda;
    if (model.phi().is_shannon()) return 1.0 - log_partition(y, w);

    const auto& phi = model.phi();
    const double base = phi.derivative(1.0 / model.space.total_mass());
    const double lo = base - y.maxCoeff();
    const double hi = base - y.minCoeff();
    const auto mass_minus_one = [&](double alpha) {
        double s = 0.0;
        for (int j = 0; j < y.size(); ++j) s += w(j) * phi.inverse_derivative(alpha + y(j));
        return s - 1.0;
    };
    const auto dmass = [&](double alpha) {
        double s = 0.0;
        for (int j = 0; j < y.size(); ++j)
            s += w(j) / phi.second_derivative(phi.inverse_derivative(alpha + y(j)));
        return s;
    };
    if (lo == hi) return lo;
    try {
        return numerics::solve_increasing(mass_minus_one, dmass, lo, hi, 1e-15).root;
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("alpha_for_lambda: ") + e.what());
    }
}

DualPoint dual_point(const Model& model, const Eigen::VectorXd& lambda) {
    const auto& w = model.space.weights();
    const auto& A = model.constraints.values();
    const Eigen::VectorXd y = A.transpose() * lambda;
    DualPoint p;
    p.lambda = lambda;
    Eigen::VectorXd sigma;
    double conj_integral = 0.0;
    if (model.phi().is_shannon()) {
        const double log_z = log_partition(y, w);
        p.alpha = 1.0 - log_z;
        p.rho = (y.array() - log_z).exp().matrix();
        sigma = p.rho;
        p.mass = w.dot(p.rho);
        p.moments = A * w.cwiseProduct(p.rho);
        p.psi = lambda.dot(p.moments) - log_z;
    } else {
        const auto& phi = model.phi();
        p.alpha = alpha_for_lambda(model, lambda);
        p.rho.resize(y.size());
        sigma.resize(y.size());
        for (int j = 0; j < y.size(); ++j) {
            const double arg = p.alpha + y(j);
            const double r = phi.inverse_derivative(arg);
            p.rho(j) = r;
            sigma(j) = 1.0 / phi.second_derivative(r);
            conj_integral += w(j) * (arg * r - phi.value(r));
        }
        p.mass = w.dot(p.rho);
        p.moments = A * w.cwiseProduct(p.rho);
        p.psi = p.alpha + lambda.dot(p.moments) - conj_integral;
    }
    const Eigen::VectorXd ws = w.cwiseProduct(sigma);
    const Eigen::VectorXd first = A * ws;
    p.covariance = A * ws.asDiagonal() * A.transpose() - first * first.transpose() / ws.sum();
    return p;
}

std::pair<double, Eigen::VectorXd> forward_moment_map(const Model& model, double alpha,
                                                      const Eigen::VectorXd& lambda) {
    const auto& w = model.space.weights();
    const auto& A = model.constraints.values();
    const Eigen::VectorXd y = A.transpose() * lambda;
    Eigen::VectorXd rho(y.size());
    for (int j = 0; j < y.size(); ++j) rho(j) = model.phi().inverse_derivative(alpha + y(j));
    return {w.dot(rho), A * w.cwiseProduct(rho)};
}

namespace {

struct Iterate {
    DualPoint point;
    double value = 0.0;
    Eigen::VectorXd gradient;
};

Iterate make_iterate(const Model& model, const Eigen::VectorXd& lambda, const Eigen::VectorXd& b,
                     std::optional<double> yosida_j) {
    Iterate it;
    it.point = dual_point(model, lambda);
    it.value = it.point.psi + lambda.dot(b - it.point.moments);
    it.gradient = b - it.point.moments;
    if (yosida_j) {
        it.value -= lambda.squaredNorm() / (2.0 * *yosida_j);
        it.gradient -= lambda / *yosida_j;
    }
    return it;
}

DualSolution to_solution(const Iterate& it, const Eigen::VectorXd& b, int iterations,
                         int gradient_steps, bool converged) {
    DualSolution s;
    s.alpha = it.point.alpha;
    s.lambda = it.point.lambda;
    s.b = b;
    s.psi_value = it.value;
    s.moment_residual = it.gradient;
    s.normalization_residual = 1.0 - it.point.mass;
    s.iterations = iterations;
    s.gradient_steps = gradient_steps;
    s.converged = converged;
    return s;
}

bool finite_iterate(const Iterate& it) {
    return std::isfinite(it.value) && it.gradient.allFinite() && it.point.covariance.allFinite();
}

}  // namespace

DualSolution dual_solve(const Model& model, const Eigen::VectorXd& b, const SolverOptions& opts,
                        const std::optional<Eigen::VectorXd>& warm_start,
                        std::optional<double> yosida_j) {
    const int k = model.k();
    if (b.size() != k) throw std::invalid_argument("dual_solve: b has wrong dimension");
    if (yosida_j && !(*yosida_j > 0.0)) throw std::invalid_argument("dual_solve: J must be positive");
    const double tol = opts.tolerance * std::max(1.0, b.norm());

    Eigen::VectorXd lambda = warm_start ? *warm_start : Eigen::VectorXd::Zero(k);
    if (lambda.size() != k) throw std::invalid_argument("dual_solve: warm start has wrong dimension");
    Iterate cur = make_iterate(model, lambda, b, yosida_j);
    if (!finite_iterate(cur)) {
        lambda.setZero();
        cur = make_iterate(model, lambda, b, yosida_j);
    }
    const double norm_tol = std::max(tol, 1e-12);
    int gradient_steps = 0;
    const Eigen::MatrixXd shift =
        yosida_j ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(k, k) / *yosida_j)
                 : Eigen::MatrixXd(Eigen::MatrixXd::Zero(k, k));

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const double gnorm = cur.gradient.lpNorm<Eigen::Infinity>();
        if (gnorm <= tol && std::abs(1.0 - cur.point.mass) <= norm_tol)
            return to_solution(cur, b, iter, gradient_steps, true);

        // negative dual Hessian (reduced in lambda)
        const Eigen::MatrixXd neg_hessian = cur.point.covariance + shift;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(neg_hessian, Eigen::EigenvaluesOnly);
        const double emin = eig.eigenvalues().minCoeff(), emax = eig.eigenvalues().maxCoeff();
        Eigen::VectorXd direction;
        const Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);
        if (llt.info() == Eigen::Success && emin > 0.0 && emax / emin <= opts.condition_limit) {
            direction = llt.solve(cur.gradient);
        } else {
            direction = cur.gradient / std::max(emax, std::numeric_limits<double>::min());
            ++gradient_steps;
        }

        const double slope = cur.gradient.dot(direction);
        double t = 1.0;
        bool accepted = false;
        Iterate next;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            const Eigen::VectorXd trial = cur.point.lambda + t * direction;
            try {
                next = make_iterate(model, trial, b, yosida_j);
            } catch (const NumericalError&) {
                continue;
            }
            if (!finite_iterate(next)) continue;
            const double slack = 1e-14 * (1.0 + std::abs(cur.value));
            const bool armijo = next.value >= cur.value + 1e-4 * t * slope - slack;
            const bool residual_drop =
                next.gradient.lpNorm<Eigen::Infinity>() < 0.5 * gnorm && next.value >= cur.value - slack;
            if (armijo || residual_drop) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw SolverError(SolverError::Kind::NonConvergence,
                              "dual_solve: line search failed with residual " +
                                  numerics::format_double(gnorm),
                              to_solution(cur, b, iter, gradient_steps, false));
        }
        cur = std::move(next);
        if (cur.point.lambda.norm() > opts.lambda_cap) {
            throw SolverError(SolverError::Kind::UnattainedDual,
                              "dual_solve: |lambda| exceeded " + numerics::format_double(opts.lambda_cap) +
                                  "; b is on or outside the boundary of the moment set",
                              to_solution(cur, b, iter + 1, gradient_steps, false));
        }
    }
    const double gnorm = cur.gradient.lpNorm<Eigen::Infinity>();
    if (gnorm <= tol && std::abs(1.0 - cur.point.mass) <= norm_tol)
        return to_solution(cur, b, opts.max_iterations, gradient_steps, true);
    throw SolverError(SolverError::Kind::NonConvergence,
                      "dual_solve: no convergence after " + std::to_string(opts.max_iterations) +
                          " iterations (residual " + numerics::format_double(gnorm) + ")",
                      to_solution(cur, b, opts.max_iterations, gradient_steps, false));
}

Density density_from_dual(const Model& model, const DualSolution& sol, double tol) {
    if (!sol.converged) throw PreconditionError("density_from_dual: solution did not converge");
    const Eigen::VectorXd y = model.constraints.values().transpose() * sol.lambda;
    Density d;
    d.values.resize(y.size());
    for (int j = 0; j < y.size(); ++j) {
        const double r = model.phi().inverse_derivative(sol.alpha + y(j));
        // exact zeros are underflow of a positive density far from the mass
        if (!(r >= 0.0))
            throw ConsistencyError("density_from_dual: negative density at node " + std::to_string(j));
        d.values(j) = r;
    }
    d.mass = model.space.integrate(d.values);
    if (std::abs(d.mass - 1.0) > tol)
        throw ConsistencyError("density_from_dual: mass " + numerics::format_double(d.mass) + " != 1");
    return d;
}

}  // namespace singpot
