#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hedge/errors.hpp"
#include "hedge/rational.hpp"

namespace hedge::lp {

enum class Sense { minimize, maximize };
enum class Relation { eq, le, ge };
enum class LpStatus { optimal, infeasible, unbounded };

constexpr double kInf = std::numeric_limits<double>::infinity();

// Default tolerances for the double-precision path.
constexpr double kTolFeas = 1e-9;
constexpr double kTolGap = 1e-7;

// Standard-form linear program: sense, objective, sparse constraint matrix,
// one relation per row, interval bounds per variable.
struct LpProblem {
    struct Entry {
        int row = 0;
        int col = 0;
        double value = 0.0;
    };
    struct Row {
        Relation rel = Relation::eq;
        double rhs = 0.0;
    };
    struct Bounds {
        double lo = 0.0;
        double hi = kInf;
    };

    Sense sense = Sense::minimize;
    std::vector<double> objective;
    std::vector<Entry> entries;
    std::vector<Row> rows;
    std::vector<Bounds> bounds;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }
    int num_entries() const { return static_cast<int>(entries.size()); }

    int add_variable(double lo, double hi, double cost) {
        objective.push_back(cost);
        bounds.push_back({lo, hi});
        return num_vars() - 1;
    }

    // Adds a row from (col, coef) terms, merging duplicate columns and
    // dropping exact zeros. Returns the new row index.
    int add_row(Relation rel, double rhs, const std::vector<std::pair<int, double>>& terms) {
        const int r = num_rows();
        rows.push_back({rel, rhs});
        std::map<int, double> merged;
        for (const auto& [col, coef] : terms) merged[col] += coef;
        for (const auto& [col, coef] : merged)
            if (coef != 0.0) entries.push_back({r, col, coef});
        return r;
    }

    void validate() const {
        const int n = num_vars();
        const int m = num_rows();
        for (int j = 0; j < n; ++j) {
            if (std::isnan(objective[j]) || std::isinf(objective[j]))
                throw MalformedProblem("objective coefficient " + std::to_string(j) + " not finite");
            const auto& b = bounds[j];
            if (std::isnan(b.lo) || std::isnan(b.hi) || b.lo == kInf || b.hi == -kInf || b.lo > b.hi)
                throw MalformedProblem("invalid bounds on variable " + std::to_string(j));
        }
        for (int i = 0; i < m; ++i) {
            if (!std::isfinite(rows[i].rhs))
                throw MalformedProblem("rhs of row " + std::to_string(i) + " not finite");
        }
        std::vector<double> row_max(m, 0.0);
        std::vector<std::uint64_t> seen;
        seen.reserve(entries.size());
        for (const auto& e : entries) {
            if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n)
                throw MalformedProblem("entry index out of range at row " + std::to_string(e.row) +
                                       ", col " + std::to_string(e.col));
            if (std::isnan(e.value) || std::isinf(e.value))
                throw MalformedProblem("NaN or infinite coefficient at row " + std::to_string(e.row) +
                                       ", col " + std::to_string(e.col));
            seen.push_back((static_cast<std::uint64_t>(e.row) << 32) | static_cast<std::uint32_t>(e.col));
            row_max[e.row] = std::max(row_max[e.row], std::abs(e.value));
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw MalformedProblem("duplicate (row, col) entry");
        for (int i = 0; i < m; ++i)
            if (row_max[i] == 0.0)
                throw MalformedProblem("row " + std::to_string(i) + " has no nonzero coefficient");
    }

    // Debug text format, one line per row: "<relation> <b> : <col>:<coef> ..."
    std::string dump() const {
        std::vector<std::vector<std::pair<int, double>>> by_row(rows.size());
        for (const auto& e : entries) by_row[e.row].push_back({e.col, e.value});
        std::ostringstream os;
        os.precision(17);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto& terms = by_row[i];
            std::sort(terms.begin(), terms.end());
            switch (rows[i].rel) {
                case Relation::eq: os << "="; break;
                case Relation::le: os << "<="; break;
                case Relation::ge: os << ">="; break;
            }
            os << " " << rows[i].rhs << " :";
            for (const auto& [col, coef] : terms) os << " " << col << ":" << coef;
            os << "\n";
        }
        return os.str();
    }
};

struct LpSolution {
    LpStatus status = LpStatus::optimal;
    std::vector<double> primal;  // per variable (optimal; feasible point when unbounded)
    std::vector<double> dual;    // per row (optimal)
    double objective = 0.0;
    std::vector<double> farkas;  // per row (infeasible)
    std::vector<double> ray;     // per variable (unbounded), normalized to unit max-norm
};

// Exact-rational counterpart; objective and certificates carry no rounding.
struct RationalSolution {
    LpStatus status = LpStatus::optimal;
    std::vector<Rational> primal;
    std::vector<Rational> dual;
    Rational objective = 0;
    std::vector<Rational> farkas;
    std::vector<Rational> ray;
};

struct SolveOptions {
    bool exact = false;       // route through the rational engine
    int exact_max_nonzeros = 200;
};

// ---------------------------------------------------------------------------
// Independent certificate checks. These recompute everything directly from
// the problem data and never consult solver internals.

struct VerifyReport {
    double max_primal_residual = 0.0;  // row relations and variable bounds
    double max_dual_residual = 0.0;    // dual feasibility and complementary slackness
    double duality_gap = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    std::vector<double> row_residuals;
};

inline VerifyReport verify_solution(const LpProblem& p, const LpSolution& s,
                                    double tol = kTolFeas) {
    if (s.status != LpStatus::optimal)
        throw MalformedProblem("verify_solution requires an optimal solution");
    const int n = p.num_vars();
    const int m = p.num_rows();
    if (static_cast<int>(s.primal.size()) != n || static_cast<int>(s.dual.size()) != m)
        throw MalformedProblem("solution shape does not match problem");

    VerifyReport rep;
    rep.row_residuals.assign(m, 0.0);

    std::vector<double> activity(m, 0.0);
    std::vector<double> aty(n, 0.0);
    for (const auto& e : p.entries) {
        activity[e.row] += e.value * s.primal[e.col];
        aty[e.col] += e.value * s.dual[e.row];
    }

    double primal_res = 0.0;
    for (int i = 0; i < m; ++i) {
        const double d = activity[i] - p.rows[i].rhs;
        double r = 0.0;
        switch (p.rows[i].rel) {
            case Relation::eq: r = std::abs(d); break;
            case Relation::le: r = std::max(0.0, d); break;
            case Relation::ge: r = std::max(0.0, -d); break;
        }
        rep.row_residuals[i] = r;
        primal_res = std::max(primal_res, r);
    }
    for (int j = 0; j < n; ++j) {
        primal_res = std::max(primal_res, p.bounds[j].lo - s.primal[j]);
        primal_res = std::max(primal_res, s.primal[j] - p.bounds[j].hi);
    }
    rep.max_primal_residual = primal_res;

    const bool minimize = p.sense == Sense::minimize;
    double dual_res = 0.0;
    // Row dual signs and complementary slackness.
    for (int i = 0; i < m; ++i) {
        const double y = s.dual[i];
        switch (p.rows[i].rel) {
            case Relation::eq: break;
            case Relation::ge: dual_res = std::max(dual_res, minimize ? -y : y); break;
            case Relation::le: dual_res = std::max(dual_res, minimize ? y : -y); break;
        }
        if (p.rows[i].rel != Relation::eq)
            dual_res = std::max(dual_res, std::min(std::abs(y), std::abs(activity[i] - p.rows[i].rhs)));
    }
    // Reduced-cost conditions against the variable bounds; the effective bound
    // value also feeds the dual objective so the reported gap is exact.
    double dual_obj = 0.0;
    for (int i = 0; i < m; ++i) dual_obj += s.dual[i] * p.rows[i].rhs;
    const double at_bound_tol = 1e-7;
    for (int j = 0; j < n; ++j) {
        const double rc = p.objective[j] - aty[j];
        const double x = s.primal[j];
        const bool at_lo = std::isfinite(p.bounds[j].lo) && x - p.bounds[j].lo <= at_bound_tol * (1.0 + std::abs(x));
        const bool at_hi = std::isfinite(p.bounds[j].hi) && p.bounds[j].hi - x <= at_bound_tol * (1.0 + std::abs(x));
        double viol = 0.0;
        if (at_lo && at_hi) {
            // fixed variable: any reduced cost admissible
        } else if (at_lo) {
            viol = minimize ? -rc : rc;
        } else if (at_hi) {
            viol = minimize ? rc : -rc;
        } else {
            viol = std::abs(rc);
        }
        dual_res = std::max(dual_res, viol);
        const double xeff = at_lo ? p.bounds[j].lo : (at_hi ? p.bounds[j].hi : x);
        dual_obj += rc * xeff;
    }
    rep.max_dual_residual = dual_res;

    double primal_obj = 0.0;
    for (int j = 0; j < n; ++j) primal_obj += p.objective[j] * s.primal[j];
    rep.primal_objective = primal_obj;
    rep.dual_objective = dual_obj;
    rep.duality_gap = std::abs(primal_obj - dual_obj);
    (void)tol;
    return rep;
}

struct FarkasReport {
    bool valid = false;
    double margin = 0.0;  // aggregated lower bound minus box supremum; > 0 proves infeasibility
};

// Checks a Farkas certificate y for the system {Ax rel b, lo <= x <= hi}:
// scaling >= rows by y_i >= 0 and <= rows by y_i <= 0 yields (A'y)'x >= y'b
// for every feasible x, so sup over the box below y'b is a contradiction.
// The certificate is normalized and tolerances follow the data scale.
inline FarkasReport verify_farkas(const LpProblem& p, const std::vector<double>& y_raw,
                                  double tol = kTolFeas) {
    FarkasReport rep;
    if (static_cast<int>(y_raw.size()) != p.num_rows()) return rep;
    double norm = 0.0;
    for (double v : y_raw) norm = std::max(norm, std::abs(v));
    if (norm == 0.0) return rep;
    std::vector<double> y(y_raw);
    for (double& v : y) v /= norm;
    for (int i = 0; i < p.num_rows(); ++i) {
        if (p.rows[i].rel == Relation::ge && y[i] < -tol) return rep;
        if (p.rows[i].rel == Relation::le && y[i] > tol) return rep;
    }
    std::vector<double> d(p.num_vars(), 0.0), dabs(p.num_vars(), 0.0);
    double yb = 0.0, scale = 1.0;
    for (const auto& e : p.entries) {
        d[e.col] += e.value * y[e.row];
        dabs[e.col] += std::abs(e.value * y[e.row]);
    }
    for (int i = 0; i < p.num_rows(); ++i) {
        yb += y[i] * p.rows[i].rhs;
        scale += std::abs(y[i] * p.rows[i].rhs);
    }
    double sup = 0.0;
    for (int j = 0; j < p.num_vars(); ++j) {
        const double cut = tol * (1.0 + dabs[j]);
        if (d[j] > cut) {
            if (!std::isfinite(p.bounds[j].hi)) return rep;
            sup += d[j] * p.bounds[j].hi;
            scale += std::abs(d[j] * p.bounds[j].hi);
        } else if (d[j] < -cut) {
            if (!std::isfinite(p.bounds[j].lo)) return rep;
            sup += d[j] * p.bounds[j].lo;
            scale += std::abs(d[j] * p.bounds[j].lo);
        }
    }
    rep.margin = yb - sup;
    rep.valid = rep.margin > tol * scale;
    return rep;
}

struct RayReport {
    bool valid = false;
    double max_direction_residual = 0.0;
    double improvement = 0.0;  // objective change per unit step, in the improving direction
};

inline RayReport verify_ray(const LpProblem& p, const std::vector<double>& ray_raw,
                            double tol = kTolFeas) {
    RayReport rep;
    if (static_cast<int>(ray_raw.size()) != p.num_vars()) return rep;
    double norm = 0.0;
    for (double v : ray_raw) norm = std::max(norm, std::abs(v));
    if (norm == 0.0) return rep;
    std::vector<double> ray(ray_raw);
    for (double& v : ray) v /= norm;
    std::vector<double> rowdir(p.num_rows(), 0.0), rowabs(p.num_rows(), 0.0);
    for (const auto& e : p.entries) {
        rowdir[e.row] += e.value * ray[e.col];
        rowabs[e.row] += std::abs(e.value * ray[e.col]);
    }
    double res = 0.0;
    for (int i = 0; i < p.num_rows(); ++i) {
        const double s = 1.0 + rowabs[i];
        switch (p.rows[i].rel) {
            case Relation::eq: res = std::max(res, std::abs(rowdir[i]) / s); break;
            case Relation::le: res = std::max(res, rowdir[i] / s); break;
            case Relation::ge: res = std::max(res, -rowdir[i] / s); break;
        }
    }
    for (int j = 0; j < p.num_vars(); ++j) {
        if (std::isfinite(p.bounds[j].lo)) res = std::max(res, -ray[j]);
        if (std::isfinite(p.bounds[j].hi)) res = std::max(res, ray[j]);
    }
    double cr = 0.0;
    for (int j = 0; j < p.num_vars(); ++j) cr += p.objective[j] * ray[j];
    rep.max_direction_residual = res;
    rep.improvement = p.sense == Sense::minimize ? -cr : cr;
    rep.valid = res <= tol && rep.improvement > tol;
    return rep;
}

} // namespace hedge::lp

#include "hedge/detail/simplex.hpp"

namespace hedge::lp {

// Every verdict must carry a checkable certificate. When the double engine's
// certificate fails its own verification (or the engine gives up), the exact
// engine settles the instance; Bland's rule guarantees it terminates.
inline LpSolution solve(const LpProblem& p) {
    p.validate();
    const bool can_fall_back = p.num_entries() <= 20000;
    LpSolution s;
    try {
        s = detail::Simplex<double>(p).run();
    } catch (const SolverFailure&) {
        if (!can_fall_back) throw;
        return detail::Simplex<Rational>(p).run();
    }
    if (can_fall_back) {
        bool suspicious = false;
        switch (s.status) {
            case LpStatus::optimal: {
                const VerifyReport rep = verify_solution(p, s);
                suspicious = rep.max_primal_residual > 1e-6 * (1.0 + std::abs(rep.primal_objective)) ||
                             rep.duality_gap > 1e-5 * (1.0 + std::abs(rep.primal_objective));
                break;
            }
            case LpStatus::infeasible: suspicious = !verify_farkas(p, s.farkas).valid; break;
            case LpStatus::unbounded: suspicious = !verify_ray(p, s.ray).valid; break;
        }
        if (suspicious) return detail::Simplex<Rational>(p).run();
    }
    return s;
}

inline RationalSolution solve_rational(const LpProblem& p, int max_nonzeros = 200) {
    p.validate();
    if (p.num_entries() > max_nonzeros)
        throw ExactModeTooLarge("rational mode limited to " + std::to_string(max_nonzeros) +
                                " nonzeros, problem has " + std::to_string(p.num_entries()));
    return detail::Simplex<Rational>(p).run_rational();
}

inline LpSolution solve_with(const LpProblem& p, const SolveOptions& opt) {
    if (!opt.exact) return solve(p);
    const RationalSolution rs = solve_rational(p, opt.exact_max_nonzeros);
    LpSolution s;
    s.status = rs.status;
    s.objective = to_double(rs.objective);
    auto conv = [](const std::vector<Rational>& v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
        return out;
    };
    s.primal = conv(rs.primal);
    s.dual = conv(rs.dual);
    s.farkas = conv(rs.farkas);
    s.ray = conv(rs.ray);
    if (rs.status == LpStatus::unbounded)
        s.objective = p.sense == Sense::minimize ? -kInf : kInf;
    return s;
}

} // namespace hedge::lp
