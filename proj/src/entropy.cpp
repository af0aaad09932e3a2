#include "singpot/entropy.hpp"

#include "singpot/errors.hpp"
#include "singpot/numerics.hpp"

#include <cmath>

// Boost 1.74 pchip.hpp calls isnan unqualified
namespace boost::math::interpolators { using std::isnan; }

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace singpot {

namespace {

void require_nonnegative(double x, const char* what) {
    if (x < 0.0 || std::isnan(x))
        throw std::domain_error(std::string(what) + ": argument must be >= 0, got " +
                                numerics::format_double(x));
}

class Shannon final : public EntropyFunction {
public:
    std::string label() const override { return "shannon"; }
    double value(double x) const override {
        require_nonnegative(x, "shannon");
        return x == 0.0 ? 0.0 : x * std::log(x);
    }
    double derivative(double x) const override { return std::log(x) + 1.0; }
    double second_derivative(double x) const override { return 1.0 / x; }
    double inverse_derivative(double y) const override { return std::exp(y - 1.0); }
    double conjugate(double y) const override { return std::exp(y - 1.0); }
    bool is_shannon() const override { return true; }
};

class InverseSquare final : public EntropyFunction {
public:
    std::string label() const override { return "inverse_square"; }
    double value(double x) const override {
        require_nonnegative(x, "inverse_square");
        return x == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / x + x * x;
    }
    double derivative(double x) const override { return 2.0 * x - 1.0 / (x * x); }
    double second_derivative(double x) const override { return 2.0 + 2.0 / (x * x * x); }
};

}  // namespace

double EntropyFunction::inverse_derivative(double y) const {
    if (!std::isfinite(y))
        throw NumericalError("inverse_derivative: non-finite argument for " + label());
    const auto f = [&](double x) { return derivative(x) - y; };
    const auto df = [&](double x) { return second_derivative(x); };
    const auto [lo, hi] = numerics::grow_bracket(f, 1.0, true);
    if (lo == hi) return lo;
    return numerics::solve_increasing(f, df, lo, hi, 1e-15).root;
}

double EntropyFunction::conjugate(double y) const {
    const double z = inverse_derivative(y);
    return y * z - value(z);
}

EntropyPtr shannon() {
    static const auto instance = std::make_shared<const Shannon>();
    return instance;
}

EntropyPtr inverse_square() {
    static const auto instance = std::make_shared<const InverseSquare>();
    return instance;
}

namespace {

class Tabulated final : public EntropyFunction {
public:
    Tabulated(std::vector<double> x, std::vector<double> phi, std::string label)
        : label_(std::move(label)), x0_(x.front()), phi0_(phi.front()) {
        const std::size_t n = x.size();
        std::vector<double> mid, slope;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            mid.push_back(0.5 * (x[i] + x[i + 1]));
            slope.push_back((phi[i + 1] - phi[i]) / (x[i + 1] - x[i]));
            if (i > 0 && !(slope[i] > slope[i - 1]))
                throw ConfigError("tabulated entropy: samples are not strictly convex near x = " +
                                  numerics::format_double(x[i]));
        }
        knots_ = mid;
        slopes_ = slope;
        spline_ = std::make_unique<Spline>(std::vector<double>(mid), std::vector<double>(slope));
        lo_ = knots_.front();
        hi_ = knots_.back();
        const double d_lo = spline_->prime(lo_);
        const double d_hi = spline_->prime(hi_);
        const double fallback_lo = (slopes_[1] - slopes_[0]) / (knots_[1] - knots_[0]);
        const double fallback_hi = (slopes_[slopes_.size() - 1] - slopes_[slopes_.size() - 2]) /
                                   (knots_[knots_.size() - 1] - knots_[knots_.size() - 2]);
        tail_lo_ = lo_ * (d_lo > 0.0 ? d_lo : fallback_lo);
        tail_hi_ = d_hi > 0.0 ? d_hi : fallback_hi;
        // cumulative integral of phi' from lo_ to each knot
        cumulative_.assign(knots_.size(), 0.0);
        for (std::size_t i = 1; i < knots_.size(); ++i)
            cumulative_[i] = cumulative_[i - 1] + segment_integral(knots_[i - 1], knots_[i]);
        offset_ = phi0_ - antiderivative(x0_);
    }

    std::string label() const override { return label_; }

    double value(double x) const override {
        require_nonnegative(x, "tabulated entropy");
        return offset_ + antiderivative(x);
    }

    double derivative(double x) const override {
        if (x <= 0.0) return -std::numeric_limits<double>::infinity();
        if (x < lo_) return slopes_.front() + tail_lo_ * std::log(x / lo_);
        if (x > hi_) return slopes_.back() + tail_hi_ * (x - hi_);
        return (*spline_)(x);
    }

    double second_derivative(double x) const override {
        if (x < lo_) return tail_lo_ / x;
        if (x > hi_) return tail_hi_;
        return std::max(spline_->prime(x), std::numeric_limits<double>::min());
    }

private:
    using Spline = boost::math::interpolators::pchip<std::vector<double>>;

    // 2-point Gauss rule: exact for the cubic pieces of the spline
    double segment_integral(double a, double b) const {
        const double m = 0.5 * (a + b), h = 0.5 * (b - a);
        const double r = h / std::sqrt(3.0);
        return h * ((*spline_)(m - r) + (*spline_)(m + r));
    }

    // integral of phi' from lo_ to x
    double antiderivative(double x) const {
        if (x < lo_) {
            // s0 t + c (t ln(t/lo) - t), zero at t = lo
            const auto F = [&](double t) {
                const double tl = t > 0.0 ? t * std::log(t / lo_) : 0.0;
                return slopes_.front() * t + tail_lo_ * (tl - t);
            };
            return F(x) - F(lo_);
        }
        if (x > hi_) {
            const double d = x - hi_;
            return cumulative_.back() + slopes_.back() * d + 0.5 * tail_hi_ * d * d;
        }
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - knots_.begin() - 1));
        return cumulative_[i] + segment_integral(knots_[i], x);
    }

    std::string label_;
    double x0_, phi0_;
    std::vector<double> knots_, slopes_, cumulative_;
    std::unique_ptr<Spline> spline_;
    double lo_ = 0.0, hi_ = 0.0, tail_lo_ = 0.0, tail_hi_ = 0.0, offset_ = 0.0;
};

}  // namespace

EntropyPtr tabulated_entropy(std::vector<double> x, std::vector<double> phi, std::string label) {
    if (x.size() != phi.size()) throw ConfigError("tabulated entropy: column lengths differ");
    if (x.size() < 5) throw ConfigError("tabulated entropy: need at least 5 samples");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw ConfigError("tabulated entropy: x must be positive");
        if (i > 0 && !(x[i] > x[i - 1])) throw ConfigError("tabulated entropy: x must increase");
    }
    return std::make_shared<const Tabulated>(std::move(x), std::move(phi), std::move(label));
}

EntropyPtr load_tabulated_entropy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open entropy table: " + path);
    std::vector<double> x, phi;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a = 0.0, b = 0.0;
        if (!(ss >> a >> b)) continue;  // header row
        x.push_back(a);
        phi.push_back(b);
    }
    return tabulated_entropy(std::move(x), std::move(phi), "table:" + path);
}

EntropyPtr entropy_by_name(const std::string& name) {
    if (name == "shannon") return shannon();
    if (name == "inverse_square") return inverse_square();
    throw ConfigError("unknown entropy: " + name);
}

}  // namespace singpot
