#pragma once

#include <memory>
#include <string>
#include <vector>

namespace singpot {

/// Entropy-like objective phi: strictly convex and superlinear on (0, inf),
/// with phi' a bijection (0, inf) -> R.
///
/// Subclasses provide phi, phi' and phi''. The inverse derivative and the
/// convex conjugate default to a bracketed safeguarded Newton solve on phi'
/// (bracket grown geometrically from x = 1) followed by the Legendre identity
/// phi*(y) = y z - phi(z), z = (phi')^{-1}(y).
class EntropyFunction {
public:
    virtual ~EntropyFunction() = default;

    virtual std::string label() const = 0;
    /// phi(x) for x >= 0. x < 0 throws std::domain_error; phi(0) is the limit
    /// from the right and may be +inf.
    virtual double value(double x) const = 0;
    virtual double derivative(double x) const = 0;
    virtual double second_derivative(double x) const = 0;
    virtual double inverse_derivative(double y) const;
    virtual double conjugate(double y) const;

    /// True when phi(x) = x ln x; enables closed forms elsewhere.
    virtual bool is_shannon() const { return false; }
};

using EntropyPtr = std::shared_ptr<const EntropyFunction>;

/// phi(x) = x ln x.
EntropyPtr shannon();

/// phi(x) = 1/x + x^2 (infinite at 0).
EntropyPtr inverse_square();

/// Entropy reconstructed from tabulated samples (x_i, phi(x_i)) with strictly
/// increasing x and convex data. phi' is a monotone cubic (Fritsch-Carlson)
/// interpolant of the secant slopes, continued by a logarithmic tail toward 0
/// and a linear tail toward infinity so that phi' stays onto R.
EntropyPtr tabulated_entropy(std::vector<double> x, std::vector<double> phi,
                             std::string label = "table");

/// Loads a two-column CSV (x, phi) and builds a tabulated entropy.
EntropyPtr load_tabulated_entropy(const std::string& path);

/// Looks up "shannon" or "inverse_square".
EntropyPtr entropy_by_name(const std::string& name);

}  // namespace singpot
