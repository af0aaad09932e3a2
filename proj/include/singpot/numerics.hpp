#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace singpot::numerics {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n points on [lo, hi]; exact for polynomials of
/// degree <= 2n-1.
QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

/// Midpoint rule on a periodic interval; exact for trigonometric polynomials
/// of degree < n.
QuadratureRule periodic_midpoint(int n, double lo, double hi);

struct RootResult {
    double root = 0.0;
    int iterations = 0;
    double lo = 0.0;  // final bracket
    double hi = 0.0;
};

/// Safeguarded Newton on a strictly increasing function with a valid
/// bracket (f(lo) <= 0 <= f(hi)). Falls back to bisection whenever the Newton
/// step leaves the bracket. Throws NumericalError on failure.
RootResult solve_increasing(const std::function<double(double)>& f,
                            const std::function<double(double)>& df, double lo, double hi,
                            double xtol = 1e-15, int max_iter = 200);

/// Grows [x0 - s, x0 + s] geometrically until an increasing f changes sign.
/// Returns {lo, hi}. If positive_domain, the lower end shrinks toward 0
/// multiplicatively instead of going negative.
std::pair<double, double> grow_bracket(const std::function<double(double)>& f, double x0,
                                       bool positive_domain, int max_expansions = 200);

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Returns the argmax.
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double xtol = 1e-12);

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
};

/// Nelder-Mead minimisation starting from a simplex of size `scale` around x0.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, double scale, double ftol = 1e-13,
                             int max_evaluations = 2000);

/// Deterministic quasi-uniform unit vectors on S^{k-1}. k=1 gives {+1,-1};
/// k=2 equally spaced angles; k>=3 a Halton sequence pushed through the
/// Gaussian inverse CDF and normalised.
std::vector<Eigen::VectorXd> sphere_directions(int k, int n);

/// Shortest round-trip representation for CSV/JSON output; infinities are
/// spelled "inf"/"-inf".
std::string format_double(double x);

}  // namespace singpot::numerics
