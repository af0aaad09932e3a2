#include "singpot/numerics.hpp"

#include "singpot/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace singpot::numerics {

QuadratureRule gauss_legendre(int n, double lo, double hi) {
    if (n < 1) throw ConfigError("gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (hi + lo);
    const double half = 0.5 * (hi - lo);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

QuadratureRule periodic_midpoint(int n, double lo, double hi) {
    if (n < 1) throw ConfigError("periodic_midpoint: need at least one node");
    QuadratureRule rule;
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        rule.nodes.push_back(lo + (i + 0.5) * h);
        rule.weights.push_back(h);
    }
    return rule;
}

RootResult solve_increasing(const std::function<double(double)>& f,
                            const std::function<double(double)>& df, double lo, double hi,
                            double xtol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0) {
        throw NumericalError("solve_increasing: invalid bracket [" + format_double(lo) + ", " +
                             format_double(hi) + "] with f = (" + format_double(flo) + ", " +
                             format_double(fhi) + ")");
    }
    if (flo == 0.0) return {lo, 0, lo, hi};
    if (fhi == 0.0) return {hi, 0, lo, hi};
    double x = 0.5 * (lo + hi);
    for (int it = 1; it <= max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return {x, it, lo, hi};
        if (fx < 0.0)
            lo = x;
        else
            hi = x;
        const double d = df ? df(x) : 0.0;
        double next = (d > 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step <= xtol * std::max(1.0, std::abs(x)) || hi - lo <= xtol * std::max(1.0, std::abs(x)))
            return {x, it, lo, hi};
    }
    throw NumericalError("solve_increasing: no convergence in bracket [" + format_double(lo) +
                         ", " + format_double(hi) + "]");
}

std::pair<double, double> grow_bracket(const std::function<double(double)>& f, double x0,
                                       bool positive_domain, int max_expansions) {
    double lo = x0, hi = x0;
    double step = positive_domain ? 2.0 : 1.0;
    for (int i = 0; i < max_expansions; ++i) {
        const bool lo_ok = f(lo) <= 0.0;
        const bool hi_ok = f(hi) >= 0.0;
        if (lo_ok && hi_ok) return {lo, hi};
        if (positive_domain) {
            if (!lo_ok) lo /= step;
            if (!hi_ok) hi *= step;
            step = std::min(step * 2.0, 1e8);
        } else {
            if (!lo_ok) lo -= step;
            if (!hi_ok) hi += step;
            step *= 2.0;
        }
    }
    throw NumericalError("grow_bracket: no sign change found around " + format_double(x0));
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double xtol) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - g * (hi - lo);
    double d = lo + g * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > xtol) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    // the endpoints themselves may be the max when f is monotone on [lo, hi]
    const double mid = 0.5 * (lo + hi);
    return mid;
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, double scale, double ftol,
                             int max_evaluations) {
    const int n = static_cast<int>(x0.size());
    std::vector<Eigen::VectorXd> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    for (int i = 0; i < n; ++i) simplex[i + 1](i) += scale;
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(x);
    };
    for (int i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    std::vector<int> order(n + 1);
    while (evals < max_evaluations) {
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
        const int best = order.front(), worst = order.back(), second = order[n - 1];
        if (std::abs(values[worst] - values[best]) <= ftol * (1.0 + std::abs(values[best]))) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += simplex[i];
        centroid /= n;

        const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
        const double fr = eval(reflected);
        if (fr < values[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const Eigen::VectorXd contracted =
            outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                    : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
        const double fc = eval(contracted);
        if (fc < std::min(fr, values[worst])) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        for (int i = 0; i <= n; ++i) {
            if (i == best) continue;
            simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
            values[i] = eval(simplex[i]);
        }
    }
    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    return {simplex[idx], *it, evals};
}

namespace {

double radical_inverse(int base, long index) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

std::vector<Eigen::VectorXd> sphere_directions(int k, int n) {
    std::vector<Eigen::VectorXd> dirs;
    if (k < 1) return dirs;
    if (k == 1) {
        dirs.emplace_back(Eigen::VectorXd::Constant(1, 1.0));
        dirs.emplace_back(Eigen::VectorXd::Constant(1, -1.0));
        return dirs;
    }
    if (k == 2) {
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * std::numbers::pi * i / n;
            Eigen::VectorXd u(2);
            u << std::cos(t), std::sin(t);
            dirs.push_back(u);
        }
        return dirs;
    }
    if (k > static_cast<int>(std::size(kPrimes)))
        throw ConfigError("sphere_directions: dimension too large");
    const boost::math::normal_distribution<double> normal;
    // coordinate directions first so axis-aligned facets are always probed
    for (int i = 0; i < k; ++i) {
        dirs.push_back(Eigen::VectorXd::Unit(k, i));
        dirs.push_back(-Eigen::VectorXd::Unit(k, i));
    }
    for (long i = 1; static_cast<int>(dirs.size()) < std::max(n, 2 * k); ++i) {
        Eigen::VectorXd u(k);
        for (int j = 0; j < k; ++j) u(j) = boost::math::quantile(normal, radical_inverse(kPrimes[j], i));
        const double norm = u.norm();
        if (norm < 1e-12) continue;
        dirs.push_back(u / norm);
    }
    return dirs;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

}  // namespace singpot::numerics
