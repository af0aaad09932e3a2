#include "cli.hpp"

#include "singpot/approximation.hpp"
#include "singpot/config.hpp"
#include "singpot/errors.hpp"
#include "singpot/mean_field.hpp"
#include "singpot/models.hpp"
#include "singpot/moment_geometry.hpp"
#include "singpot/numerics.hpp"
#include "singpot/singular_potential.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace singpot::cli {

namespace {

using json = nlohmann::ordered_json;
using numerics::format_double;

struct Common {
    std::string config;
    std::string model;
    int resolution = 0;
    std::string out;
    unsigned seed = 20240611;
    int threads = 1;
};

struct Loaded {
    Model model;
    ModelConfig cfg;
};

Loaded load(const Common& c) {
    if (!c.config.empty() && !c.model.empty()) throw ConfigError("give either --config or --model, not both");
    if (!c.config.empty()) {
        ModelConfig cfg = load_model_config(c.config);
        return {build_model(cfg), cfg};
    }
    if (c.model.empty()) throw ConfigError("a model is required (--config PATH or --model NAME)");
    Model m = builtin_model(c.model, c.resolution);
    ModelConfig cfg;
    cfg.name = c.model;
    return {std::move(m), cfg};
}

json jnum(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

json jvec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(jnum(v(i)));
    return a;
}

Eigen::VectorXd parse_vector(const std::string& text, int k, const std::string& what) {
    const auto vals = parse_number_list(text, what);
    if (vals.size() == 1 && k > 1 && vals[0] == 0.0) return Eigen::VectorXd::Zero(k);
    if (static_cast<int>(vals.size()) != k)
        throw ConfigError(what + " needs " + std::to_string(k) + " components, got " + std::to_string(vals.size()));
    return Eigen::VectorXd::Map(vals.data(), k);
}

int thread_count(int requested) {
    if (requested > 0) return requested;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs tasks 0..n-1 on a small pool. Tasks write to their own slots, so the
/// result does not depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& task) {
    const int t = std::min(thread_count(threads), std::max(n, 1));
    if (t <= 1) {
        for (int i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Writes to --out when given, else to the command's stream.
void emit(const Common& c, std::ostream& out, const std::string& text) {
    if (c.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + c.out + "'");
    f << text;
    if (!f) throw ConfigError("write failed for '" + c.out + "'");
}

// ---------------------------------------------------------------- grids

struct Axis {
    double lo = 0.0, hi = 1.0;
    int n = 2;
    double at(int i) const { return lo + (hi - lo) * i / (n - 1); }
};

Axis parse_axis(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("range '" + text + "' must look like min:max:count");
    Axis a;
    a.lo = parse_number_list(parts[0], "range min")[0];
    a.hi = parse_number_list(parts[1], "range max")[0];
    const double n = parse_number_list(parts[2], "range count")[0];
    if (n != std::floor(n) || n < 2) throw ConfigError("range count must be an integer >= 2");
    a.n = static_cast<int>(n);
    if (!(a.lo < a.hi)) throw ConfigError("range '" + text + "' needs min < max");
    return a;
}

struct GridOptions {
    std::vector<std::string> ranges;
    std::vector<int> counts;  // --nx, --ny, --nz
    double band = 1e-2;
};

/// Axes from explicit ranges, or the bounding box of Q from the support
/// function in the coordinate directions (padded by 10% for grids that cover
/// the exterior).
std::vector<Axis> grid_axes(const Model& m, const GridOptions& g, bool pad) {
    const int k = m.k();
    std::vector<Axis> axes;
    if (!g.ranges.empty()) {
        if (static_cast<int>(g.ranges.size()) != k)
            throw ConfigError("need one --range per constraint (" + std::to_string(k) + ")");
        for (const auto& r : g.ranges) axes.push_back(parse_axis(r));
        return axes;
    }
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
        e(i) = 1.0;
        Axis a;
        a.hi = support(m.space, m.constraints, e).value;
        a.lo = -support(m.space, m.constraints, -e).value;
        if (pad) {
            const double w = 0.1 * (a.hi - a.lo);
            a.lo -= w;
            a.hi += w;
        }
        a.n = i < static_cast<int>(g.counts.size()) && g.counts[static_cast<std::size_t>(i)] > 0
                  ? g.counts[static_cast<std::size_t>(i)]
                  : 41;
        if (a.n < 2) throw ConfigError("grid counts must be >= 2");
        axes.push_back(a);
    }
    return axes;
}

struct PointOutput {
    std::string row;  // empty when excluded
    bool excluded = false;
    bool outside = false;
    bool failed = false;
    std::optional<Eigen::VectorXd> lambda;  // warm start for the next point
};

using PointFn = std::function<PointOutput(const Eigen::VectorXd& b, const std::optional<Eigen::VectorXd>& warm)>;

struct GridSummary {
    std::string body;
    int total = 0, rows = 0, excluded = 0, outside = 0, failed = 0;
};

/// Row-major sweep (last axis fastest). The first column is solved in order,
/// each point warm-started from the previous row's first point; the rows are
/// then swept in parallel, each point warm-started from its left neighbour.
GridSummary run_grid(const std::vector<Axis>& axes, int threads, const PointFn& fn) {
    const int k = static_cast<int>(axes.size());
    const int row_len = axes.back().n;
    int n_rows = 1;
    for (int i = 0; i + 1 < k; ++i) n_rows *= axes[static_cast<std::size_t>(i)].n;

    const auto point = [&](int row, int col) {
        Eigen::VectorXd b(k);
        int r = row;
        for (int i = k - 2; i >= 0; --i) {
            const auto& ax = axes[static_cast<std::size_t>(i)];
            b(i) = ax.at(r % ax.n);
            r /= ax.n;
        }
        b(k - 1) = axes.back().at(col);
        return b;
    };

    std::vector<std::vector<PointOutput>> out(static_cast<std::size_t>(n_rows));
    std::optional<Eigen::VectorXd> warm;
    for (int r = 0; r < n_rows; ++r) {
        out[static_cast<std::size_t>(r)].resize(static_cast<std::size_t>(row_len));
        auto p = fn(point(r, 0), warm);
        if (p.lambda) warm = p.lambda;
        out[static_cast<std::size_t>(r)][0] = std::move(p);
    }
    parallel_for(n_rows, threads, [&](int r) {
        auto& row = out[static_cast<std::size_t>(r)];
        std::optional<Eigen::VectorXd> w = row[0].lambda;
        for (int c = 1; c < row_len; ++c) {
            row[static_cast<std::size_t>(c)] = fn(point(r, c), w);
            if (row[static_cast<std::size_t>(c)].lambda) w = row[static_cast<std::size_t>(c)].lambda;
        }
    });

    GridSummary s;
    std::string body;
    for (const auto& row : out)
        for (const auto& p : row) {
            ++s.total;
            if (p.excluded) {
                ++s.excluded;
                continue;
            }
            ++s.rows;
            s.outside += p.outside;
            s.failed += p.failed;
            body += p.row;
        }
    s.body = std::move(body);
    return s;
}

std::string join_row(const Eigen::VectorXd& b, const std::vector<std::string>& rest) {
    std::string s;
    for (int i = 0; i < b.size(); ++i) s += format_double(b(i)) + ",";
    for (std::size_t i = 0; i < rest.size(); ++i) s += rest[i] + (i + 1 < rest.size() ? "," : "\n");
    return s;
}

std::string b_header(int k) {
    std::string s;
    for (int i = 1; i <= k; ++i) s += "b_" + std::to_string(i) + ",";
    return s;
}

std::string lambda_header(int k) {
    std::string s;
    for (int i = 1; i <= k; ++i) s += ",lambda_" + std::to_string(i);
    return s;
}

/// Signed distance to the boundary of Q: closed form when known, else the
/// membership margin.
double boundary_margin(const Loaded& L, const Eigen::VectorXd& b) {
    if (L.model.closed_form_q) return L.model.closed_form_q->signed_distance(b);
    return membership(L.model.space, L.model.constraints, b, L.cfg.membership).margin;
}

/// Margin against the convex hull of the quadrature nodes' moment vectors.
/// That hull sits strictly inside Q, and the discrete dual has no solution
/// outside it, so points between the two count as boundary-band points.
class NodeHull {
public:
    explicit NodeHull(const Model& model) {
        const int k = model.k();
        for (const auto& u : numerics::sphere_directions(k, k == 1 ? 2 : 512)) {
            dirs_.push_back(u);
            support_.push_back((model.constraints.values().transpose() * u).maxCoeff());
        }
    }
    double margin(const Eigen::VectorXd& b) const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < dirs_.size(); ++i) m = std::min(m, support_[i] - dirs_[i].dot(b));
        return m;
    }

private:
    std::vector<Eigen::VectorXd> dirs_;
    std::vector<double> support_;
};

PointFn psi_point(const Loaded& L, double band) {
    auto hull = std::make_shared<const NodeHull>(L.model);
    return [&L, band, hull](const Eigen::VectorXd& b, const std::optional<Eigen::VectorXd>& warm) {
        PointOutput p;
        const int k = L.model.k();
        const double margin = boundary_margin(L, b);
        if (margin <= 0.0) {
            p.outside = true;
            p.row = join_row(b, {"inf"});
            p.row.pop_back();
            for (int i = 0; i < k; ++i) p.row += ",nan";
            p.row += ",0\n";
            return p;
        }
        if (margin <= band || hull->margin(b) <= band) {
            p.excluded = true;
            return p;
        }
        std::vector<std::string> cols;
        DualSolution sol;
        try {
            sol = dual_solve(L.model, b, L.cfg.solver, warm);
            p.lambda = sol.lambda;
        } catch (const SolverError& e) {
            sol = e.best();
            p.failed = true;
        }
        cols.push_back(format_double(sol.psi_value));
        for (int i = 0; i < k; ++i) cols.push_back(format_double(sol.lambda(i)));
        cols.push_back(sol.converged ? "1" : "0");
        p.row = join_row(b, cols);
        return p;
    };
}

PointFn yosida_point(const Loaded& L, double J) {
    return [&L, J](const Eigen::VectorXd& b, const std::optional<Eigen::VectorXd>& warm) {
        PointOutput p;
        const int k = L.model.k();
        std::vector<std::string> cols;
        DualSolution sol;
        try {
            const auto y = yosida(L.model, b, J, L.cfg.solver, warm);
            sol = y.solution;
            p.lambda = sol.lambda;
        } catch (const SolverError& e) {
            sol = e.best();
            p.failed = true;
        }
        cols.push_back(format_double(sol.psi_value));
        for (int i = 0; i < k; ++i) cols.push_back(format_double(sol.lambda(i)));
        cols.push_back(sol.converged ? "1" : "0");
        p.row = join_row(b, cols);
        return p;
    };
}

/// First n comma-separated fields of a CSV row.
std::string leading_fields(const std::string& row, int n) {
    std::size_t pos = 0;
    for (int i = 0; i < n; ++i) {
        pos = row.find(',', pos);
        if (pos == std::string::npos) return row.substr(0, row.find('\n'));
        ++pos;
    }
    return row.substr(0, pos - 1);
}

std::string footer(const GridSummary& s) {
    return "# points=" + std::to_string(s.total) + " rows=" + std::to_string(s.rows) +
           " excluded_band=" + std::to_string(s.excluded) + " outside=" + std::to_string(s.outside) +
           " nonconverged=" + std::to_string(s.failed) + "\n";
}

// ---------------------------------------------------------------- commands

int cmd_psi_eval(const Common& c, const std::string& b_text, std::ostream& out, std::ostream& err) {
    const Loaded L = load(c);
    const Eigen::VectorXd b = parse_vector(b_text, L.model.k(), "--b");
    const auto m = membership(L.model.space, L.model.constraints, b, L.cfg.membership);
    json j;
    j["model"] = L.cfg.name;
    j["b"] = jvec(b);
    j["verdict"] = to_string(m.verdict);
    if (m.verdict == Verdict::Outside) {
        j["psi"] = "inf";
        emit(c, out, j.dump(2) + "\n");
        return Ok;
    }
    int code = Ok;
    DualSolution sol;
    std::optional<PotentialValue> pv;
    try {
        pv = psi(L.model, b, L.cfg.solver);
        sol = pv->solution;
    } catch (const SolverError& e) {
        sol = e.best();
        code = SolverFailure;
        err << "error: " << e.what() << "\n";
    }
    j["alpha"] = jnum(sol.alpha);
    j["lambda"] = jvec(sol.lambda);
    j["psi"] = jnum(sol.psi_value);
    if (pv) {
        j["primal"] = jnum(pv->primal);
        j["duality_gap"] = jnum(pv->duality_gap);
    }
    j["moment_residual"] = jvec(sol.moment_residual);
    j["normalization_residual"] = jnum(sol.normalization_residual);
    j["iterations"] = sol.iterations;
    j["gradient_steps"] = sol.gradient_steps;
    j["converged"] = sol.converged;
    emit(c, out, j.dump(2) + "\n");
    return code;
}

int cmd_psi_grid(const Common& c, const GridOptions& g, std::ostream& out, std::ostream& err) {
    const Loaded L = load(c);
    const auto axes = grid_axes(L.model, g, false);
    const auto s = run_grid(axes, c.threads, psi_point(L, g.band));
    emit(c, out, b_header(L.model.k()) + "psi" + lambda_header(L.model.k()) + ",converged\n" + s.body + footer(s));
    if (s.failed > 0) {
        err << "error: " << s.failed << " grid points did not converge\n";
        return SolverFailure;
    }
    return Ok;
}

int cmd_membership(const Common& c, const std::string& b_text, int n_dirs, std::ostream& out) {
    const Loaded L = load(c);
    const Eigen::VectorXd b = parse_vector(b_text, L.model.k(), "--b");
    MembershipOptions opts = L.cfg.membership;
    if (n_dirs > 0) opts.n_directions = n_dirs;
    const auto m = membership(L.model.space, L.model.constraints, b, opts);
    json j;
    j["b"] = jvec(b);
    j["verdict"] = to_string(m.verdict);
    j["margin"] = jnum(m.margin);
    j["witness_u"] = jvec(m.witness);
    emit(c, out, j.dump(2) + "\n");
    return Ok;
}

int cmd_support(const Common& c, const std::string& u_text, std::ostream& out) {
    const Loaded L = load(c);
    const Eigen::VectorXd u = parse_vector(u_text, L.model.k(), "--u");
    if (u.norm() == 0.0) throw ConfigError("--u must be nonzero");
    const auto s = support(L.model.space, L.model.constraints, u);
    json j;
    j["u"] = jvec(u);
    j["support"] = jnum(s.value);
    j["argmax_point"] = jvec(s.argmax_point);
    emit(c, out, j.dump(2) + "\n");
    return Ok;
}

std::string polynomial_text(const TaylorQuartic& q) {
    const auto mono = q.monomials();
    std::vector<std::pair<std::vector<int>, double>> terms(mono.begin(), mono.end());
    std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        int da = 0, db = 0;
        for (int e : a.first) da += e;
        for (int e : b.first) db += e;
        return da > db;
    });
    double scale = 0.0;
    for (const auto& t : terms) scale = std::max(scale, std::abs(t.second));
    std::string s;
    char buf[64];
    for (const auto& [expo, coef] : terms) {
        if (std::abs(coef) <= 1e-12 * scale) continue;
        std::snprintf(buf, sizeof buf, "%.12g", std::abs(coef));
        s += s.empty() ? (coef < 0 ? "-" : "") : (coef < 0 ? " - " : " + ");
        s += buf;
        for (std::size_t i = 0; i < expo.size(); ++i) {
            if (expo[i] == 0) continue;
            s += " b" + std::to_string(i + 1);
            if (expo[i] > 1) s += "^" + std::to_string(expo[i]);
        }
    }
    return s;
}

int cmd_taylor(const Common& c, bool shape, const std::string& at_text, std::ostream& out) {
    const Loaded L = load(c);
    const auto q = taylor4(L.model);
    json j;
    j["model"] = L.cfg.name;
    j["polynomial"] = polynomial_text(q);
    j["constant"] = jnum(q.constant());
    json coeffs = json::array();
    for (const auto& [expo, coef] : q.monomials()) coeffs.push_back({{"exponents", expo}, {"value", jnum(coef)}});
    j["coefficients"] = coeffs;
    if (shape) {
        const int k = L.model.k();
        Eigen::VectorXd at = Eigen::VectorXd::Zero(k);
        at(0) = 1.0;
        if (!at_text.empty()) at = parse_vector(at_text, k, "--b");
        const auto r = quartic_shape_report(q, {at});
        json s;
        s["coercive"] = r.coercive;
        s["min_quartic_on_sphere"] = jnum(r.min_quartic_on_sphere);
        if (r.square_form_eigenvalues) s["square_form_eigenvalues"] = jvec(*r.square_form_eigenvalues);
        s["point"] = jvec(at);
        const Eigen::MatrixXd h = q.hessian(at);
        json hj = json::array();
        for (int i = 0; i < k; ++i) hj.push_back(jvec(h.row(i).transpose()));
        s["hessian"] = hj;
        s["hessian_eigenvalues"] = jvec(r.hessian_eigenvalues.front());
        s["convex_at_point"] = !r.nonconvexity_witness.has_value();
        j["shape"] = s;
    }
    emit(c, out, j.dump(2) + "\n");
    return Ok;
}

int cmd_yosida(const Common& c, const std::string& b_text, double J, std::ostream& out, std::ostream& err) {
    const Loaded L = load(c);
    const Eigen::VectorXd b = parse_vector(b_text, L.model.k(), "--b");
    if (!(J > 0.0)) throw ConfigError("--J must be positive");
    json j;
    j["b"] = jvec(b);
    j["J"] = J;
    try {
        const auto y = yosida(L.model, b, J, L.cfg.solver);
        j["value"] = jnum(y.value);
        j["prox"] = jvec(y.prox);
        j["gradient"] = jvec(y.gradient);
        j["converged"] = true;
        emit(c, out, j.dump(2) + "\n");
        return Ok;
    } catch (const SolverError& e) {
        j["value"] = jnum(e.best().psi_value);
        j["gradient"] = jvec(e.best().lambda);
        j["converged"] = false;
        emit(c, out, j.dump(2) + "\n");
        err << "error: " << e.what() << "\n";
        return SolverFailure;
    }
}

int cmd_yosida_grid(const Common& c, const GridOptions& g, double J, std::ostream& out, std::ostream& err) {
    if (!(J > 0.0)) throw ConfigError("--J must be positive");
    const Loaded L = load(c);
    const auto axes = grid_axes(L.model, g, true);
    const auto s = run_grid(axes, c.threads, yosida_point(L, J));
    emit(c, out, b_header(L.model.k()) + "psi_J" + lambda_header(L.model.k()) + ",converged\n" + s.body + footer(s));
    if (s.failed > 0) {
        err << "error: " << s.failed << " grid points did not converge\n";
        return SolverFailure;
    }
    return Ok;
}

/// Long-format CSV (b..., value, kind), one file per kind: <prefix>_<kind>.csv.
int cmd_contour(const Common& c, const GridOptions& g, double J, const std::vector<std::string>& kinds,
                std::ostream& out, std::ostream& err) {
    const Loaded L = load(c);
    const int k = L.model.k();
    const std::string prefix = c.out.empty() ? "contour" : c.out;
    int failed = 0;
    json written = json::array();
    for (const auto& kind : kinds) {
        GridSummary s;
        std::string tag = kind;
        if (kind == "psi") {
            const auto axes = grid_axes(L.model, g, false);
            const auto fn = psi_point(L, g.band);
            s = run_grid(axes, c.threads, [&](const Eigen::VectorXd& b, const std::optional<Eigen::VectorXd>& w) {
                auto p = fn(b, w);
                if (!p.excluded) p.row = leading_fields(p.row, k + 1) + ",psi\n";
                return p;
            });
        } else if (kind == "taylor4") {
            const auto q = taylor4(L.model);
            const auto axes = grid_axes(L.model, g, false);
            s = run_grid(axes, c.threads, [&](const Eigen::VectorXd& b, const std::optional<Eigen::VectorXd>&) {
                PointOutput p;
                p.row = join_row(b, {format_double(q.evaluate(b)), "taylor4"});
                return p;
            });
        } else if (kind == "yosida") {
            tag = "yosida" + format_double(J);
            const auto axes = grid_axes(L.model, g, true);
            const auto fn = yosida_point(L, J);
            s = run_grid(axes, c.threads, [&](const Eigen::VectorXd& b, const std::optional<Eigen::VectorXd>& w) {
                auto p = fn(b, w);
                p.row = leading_fields(p.row, k + 1) + "," + tag + "\n";
                return p;
            });
        } else {
            throw ConfigError("unknown contour kind '" + kind + "' (psi | taylor4 | yosida)");
        }
        failed += s.failed;
        const std::string path = prefix + "_" + tag + ".csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + path + "'");
        f << b_header(k) << "value,kind\n" << s.body << footer(s);
        if (!f) throw ConfigError("write failed for '" + path + "'");
        written.push_back({{"kind", tag}, {"path", path}, {"rows", s.rows}, {"excluded_band", s.excluded}});
    }
    out << written.dump(2) << "\n";
    if (failed > 0) {
        err << "error: " << failed << " grid points did not converge\n";
        return SolverFailure;
    }
    return Ok;
}

struct MeanFieldFlags {
    std::optional<double> T;
    std::string K, H;
    std::string T_range;
    int n_starts = -1;
};

MeanFieldModel mean_field_from(const Loaded& L, const MeanFieldFlags& f, std::optional<double> T) {
    ModelConfig cfg = L.cfg;
    if (!f.K.empty()) cfg.K = parse_number_list(f.K, "--K");
    if (!f.H.empty()) cfg.H = parse_number_list(f.H, "--H");
    return build_mean_field(L.model, cfg, T ? T : f.T);
}

json critical_json(const CriticalPoint& p) {
    json j;
    j["lambda"] = jvec(p.lambda);
    j["b"] = jvec(p.b);
    j["energy"] = jnum(p.energy);
    j["hessian_eigenvalues"] = jvec(p.hessian_eigenvalues);
    j["kind"] = to_string(p.kind);
    j["residual"] = jnum(p.residual);
    return j;
}

std::optional<StabilityReport> try_stability(const MeanFieldModel& mf) {
    try {
        return stability_report(mf);
    } catch (const PreconditionError&) {
        return std::nullopt;
    }
}

int cmd_meanfield_critical(const Common& c, const MeanFieldFlags& f, std::ostream& out) {
    const Loaded L = load(c);
    const MeanFieldModel mf = mean_field_from(L, f, std::nullopt);
    MeanFieldOptions opts;
    opts.seed = c.seed;
    opts.n_starts = f.n_starts;
    const auto rep = minimize_free_energy(mf, opts);
    json j;
    j["model"] = L.cfg.name;
    j["T"] = mf.T;
    json pts = json::array();
    for (const auto& p : rep.points) pts.push_back(critical_json(p));
    j["critical_points"] = pts;
    j["global_minimizer"] = rep.global_minimizer;
    j["starts"] = rep.starts;
    j["converged_starts"] = rep.converged_starts;
    if (const auto s = try_stability(mf)) {
        j["global_stable_bound"] = jnum(s->global_bound);
        j["local_stable_bound"] = jnum(s->local_bound);
        j["stability"] = to_string(s->verdict);
    }
    emit(c, out, j.dump(2) + "\n");
    return Ok;
}

int cmd_meanfield_scan(const Common& c, const MeanFieldFlags& f, std::ostream& out) {
    const Loaded L = load(c);
    if (f.T_range.empty()) throw ConfigError("--T-range min:max:count is required");
    const Axis ax = parse_axis(f.T_range);
    if (!(ax.lo > 0.0)) throw ConfigError("--T-range must be positive");
    const int k = L.model.k();
    std::vector<std::string> rows(static_cast<std::size_t>(ax.n));
    parallel_for(ax.n, c.threads, [&](int i) {
        const double T = ax.at(i);
        const MeanFieldModel mf = mean_field_from(L, f, T);
        MeanFieldOptions opts;
        opts.seed = c.seed;
        opts.n_starts = f.n_starts;
        const auto rep = minimize_free_energy(mf, opts);
        std::string row = format_double(T);
        if (rep.global_minimizer >= 0) {
            const auto& p = rep.points[static_cast<std::size_t>(rep.global_minimizer)];
            for (int q = 0; q < k; ++q) row += "," + format_double(p.b(q));
            for (int q = 0; q < k; ++q) row += "," + format_double(p.lambda(q));
            row += "," + format_double(p.energy) + "," + to_string(p.kind);
        } else {
            for (int q = 0; q < 2 * k + 1; ++q) row += ",nan";
            row += ",none";
        }
        const auto s = try_stability(mf);
        row += "," + std::to_string(rep.points.size()) + "," + (s ? to_string(s->verdict) : "n/a") + "\n";
        rows[static_cast<std::size_t>(i)] = row;
    });
    std::string text = "T";
    for (int q = 1; q <= k; ++q) text += ",b_" + std::to_string(q);
    text += lambda_header(k) + ",energy,kind,n_critical,stability\n";
    for (const auto& r : rows) text += r;
    emit(c, out, text);
    return Ok;
}

int cmd_tables(const Common& c, int order, std::ostream& out) {
    static const char* labels[] = {"x", "x^4-7x^3-2x^2+3x+7/15", "7x^3-x^2+x+1/3", "x^3"};
    std::string text = "a,m2,m3,m4,d1,coercive,d2,single_critical_point,d3,convex\n";
    const auto yes = [](bool v) { return std::string(v ? "Yes" : "No"); };
    int i = 0;
    for (const auto& m : table_models(order)) {
        const auto d = discriminants_1d(m);
        // odd moments of even-symmetric columns vanish up to rounding
        const double m3 = std::abs(d.m3) <= 1e-14 * std::pow(d.m2, 1.5) ? 0.0 : d.m3;
        text += std::string(labels[i++]) + "," + format_double(d.m2) + "," + format_double(m3) + "," +
                format_double(d.m4) + "," + format_double(d.d1) + "," + yes(d.coercive) + "," + format_double(d.d2) +
                "," + yes(d.single_critical_point) + "," + format_double(d.d3) + "," + yes(d.convex) + "\n";
    }
    emit(c, out, text);
    return Ok;
}

void add_common(CLI::App* sub, Common& c, bool needs_model = true) {
    if (needs_model) {
        sub->add_option("--config", c.config, "model config file");
        sub->add_option("--model", c.model, "built-in model name");
        sub->add_option("--resolution", c.resolution, "quadrature size for built-in models");
    }
    sub->add_option("--out", c.out, "output path (default stdout)");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

void add_grid(CLI::App* sub, GridOptions& g) {
    sub->add_option("--range", g.ranges, "min:max:count per axis (repeat)");
    g.counts.assign(3, 0);
    sub->add_option("--nx", g.counts[0], "points on axis 1 (default range from the support function)");
    sub->add_option("--ny", g.counts[1], "points on axis 2");
    sub->add_option("--nz", g.counts[2], "points on axis 3");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Maximum-entropy singular potential toolkit"};
    app.require_subcommand(1);
    Common c;
    GridOptions g;
    std::string b_text, u_text;
    double J = 100.0;
    int n_dirs = 0, order = 64;
    bool shape = false;
    MeanFieldFlags mf;
    std::vector<std::string> kinds{"psi", "taylor4", "yosida"};

    auto* psi_cmd = app.add_subcommand("psi", "singular potential");
    psi_cmd->require_subcommand(1);
    auto* psi_eval = psi_cmd->add_subcommand("eval", "evaluate psi_s at one b");
    add_common(psi_eval, c);
    psi_eval->add_option("--b", b_text, "moment vector b1,b2,...")->required();
    auto* psi_grid = psi_cmd->add_subcommand("grid", "psi_s on a grid (CSV)");
    add_common(psi_grid, c);
    add_grid(psi_grid, g);
    psi_grid->add_option("--band", g.band, "exclude interior points this close to the boundary");

    auto* mem = app.add_subcommand("membership", "is b in Q?");
    add_common(mem, c);
    mem->add_option("--b", b_text, "moment vector")->required();
    mem->add_option("--directions", n_dirs, "number of sampled directions");

    auto* sup = app.add_subcommand("support", "support function S_u");
    add_common(sup, c);
    sup->add_option("--u,--b", u_text, "direction u")->required();

    auto* tay = app.add_subcommand("taylor", "fourth-order Taylor polynomial at b = 0");
    add_common(tay, c);
    tay->add_flag("--shape", shape, "add the coercivity / convexity report");
    tay->add_option("--b", b_text, "point for the Hessian in the shape report");

    auto* yos = app.add_subcommand("yosida", "Yosida-Moreau envelope at one b");
    add_common(yos, c);
    yos->add_option("--b", b_text, "point")->required();
    yos->add_option("--J", J, "regularisation parameter")->required();

    auto* yos_grid = app.add_subcommand("yosida-grid", "Yosida-Moreau envelope on a grid (CSV)");
    add_common(yos_grid, c);
    add_grid(yos_grid, g);
    yos_grid->add_option("--J", J, "regularisation parameter")->required();

    auto* contour = app.add_subcommand("contour", "long-format contour data, one CSV per kind");
    add_common(contour, c);
    add_grid(contour, g);
    contour->add_option("--band", g.band, "boundary band for psi");
    contour->add_option("--J", J, "regularisation parameter for the yosida kind");
    contour->add_option("--kinds", kinds, "psi, taylor4, yosida")->delimiter(',');

    auto* mfc = app.add_subcommand("meanfield", "mean-field free energy");
    mfc->require_subcommand(1);
    auto* scan = mfc->add_subcommand("scan", "global minimiser over a temperature range (CSV)");
    add_common(scan, c);
    scan->add_option("--T-range", mf.T_range, "min:max:count")->required();
    scan->add_option("--K", mf.K, "interaction matrix (k diagonal or k*k row-major entries)");
    scan->add_option("--H", mf.H, "external field");
    scan->add_option("--starts", mf.n_starts, "multi-start count (default 8k)");
    auto* crit = mfc->add_subcommand("critical", "all critical points at one temperature (JSON)");
    add_common(crit, c);
    crit->add_option("--T", mf.T, "temperature");
    crit->add_option("--K", mf.K, "interaction matrix");
    crit->add_option("--H", mf.H, "external field");
    crit->add_option("--starts", mf.n_starts, "multi-start count (default 8k)");

    auto* tables = app.add_subcommand("tables", "discriminant table for the four 1-D examples (CSV)");
    add_common(tables, c, false);
    tables->add_option("--order", order, "Gauss-Legendre order")->check(CLI::Range(8, 4096));

    std::vector<std::string> argv_store{"singpot"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return ConfigFailure;
    }

    try {
        if (psi_eval->parsed()) return cmd_psi_eval(c, b_text, out, err);
        if (psi_grid->parsed()) return cmd_psi_grid(c, g, out, err);
        if (mem->parsed()) return cmd_membership(c, b_text, n_dirs, out);
        if (sup->parsed()) return cmd_support(c, u_text, out);
        if (tay->parsed()) return cmd_taylor(c, shape, b_text, out);
        if (yos->parsed()) return cmd_yosida(c, b_text, J, out, err);
        if (yos_grid->parsed()) return cmd_yosida_grid(c, g, J, out, err);
        if (contour->parsed()) return cmd_contour(c, g, J, kinds, out, err);
        if (scan->parsed()) return cmd_meanfield_scan(c, mf, out);
        if (crit->parsed()) return cmd_meanfield_critical(c, mf, out);
        if (tables->parsed()) return cmd_tables(c, order, out);
    } catch (const SolverError& e) {
        err << "error: " << e.what() << "\n";
        return SolverFailure;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return ConfigFailure;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return ConfigFailure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return ConfigFailure;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return SolverFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return Failure;
    }
    err << app.help();
    return ConfigFailure;
}

}  // namespace singpot::cli
