#pragma once

// Reference bounded-variable primal simplex, Bland's rule, two phases with
// explicit artificials. Templated so the same pivoting code runs in double
// precision and in exact rational arithmetic.

#include <cstddef>
#include <cstdint>
#include <type_traits>
#include <vector>

namespace hedge::lp::detail {

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static double from_double(double d) { return d; }
    static double eps_cost() { return 1e-10; }
    static double eps_pivot() { return 1e-11; }
    static double eps_tiny() { return 1e-12; }
    static double eps_harris() { return 1e-9; }
    static double tie() { return 1e-12; }
};

template <>
struct ScalarTraits<Rational> {
    static Rational from_double(double d) { return Rational(d); }
    static Rational eps_cost() { return Rational(0); }
    static Rational eps_pivot() { return Rational(0); }
    static Rational eps_tiny() { return Rational(0); }
    static Rational eps_harris() { return Rational(0); }
    static Rational tie() { return Rational(0); }
};

template <class S>
class Simplex {
public:
    explicit Simplex(const LpProblem& p) : sense_(p.sense) {
        n_ = p.num_vars();
        m_ = p.num_rows();
        total_ = n_ + 2 * m_;

        // CSC of the structural columns.
        std::vector<int> count(n_, 0);
        for (const auto& e : p.entries) ++count[e.col];
        cptr_.assign(n_ + 1, 0);
        for (int j = 0; j < n_; ++j) cptr_[j + 1] = cptr_[j] + count[j];
        rowi_.resize(p.entries.size());
        val_.resize(p.entries.size());
        std::vector<int> fill(cptr_.begin(), cptr_.end() - 1);
        for (const auto& e : p.entries) {
            rowi_[fill[e.col]] = e.row;
            val_[fill[e.col]] = ScalarTraits<S>::from_double(e.value);
            ++fill[e.col];
        }

        const double flip = p.sense == Sense::maximize ? -1.0 : 1.0;
        cost_.assign(total_, S(0));
        for (int j = 0; j < n_; ++j) cost_[j] = ScalarTraits<S>::from_double(flip * p.objective[j]);

        has_lo_.assign(total_, false);
        has_hi_.assign(total_, false);
        lo_.assign(total_, S(0));
        hi_.assign(total_, S(0));
        for (int j = 0; j < n_; ++j) {
            if (p.bounds[j].lo != -kInf) { has_lo_[j] = true; lo_[j] = ScalarTraits<S>::from_double(p.bounds[j].lo); }
            if (p.bounds[j].hi != kInf) { has_hi_[j] = true; hi_[j] = ScalarTraits<S>::from_double(p.bounds[j].hi); }
        }
        for (int i = 0; i < m_; ++i) {
            const int s = n_ + i;
            switch (p.rows[i].rel) {
                case Relation::le: has_lo_[s] = true; break;                       // s in [0, inf)
                case Relation::ge: has_hi_[s] = true; break;                       // s in (-inf, 0]
                case Relation::eq: has_lo_[s] = true; has_hi_[s] = true; break;    // s pinned at 0
            }
        }
        rhs_.resize(m_);
        for (int i = 0; i < m_; ++i) rhs_[i] = ScalarTraits<S>::from_double(p.rows[i].rhs);
    }

    LpSolution run() {
        const Outcome out = solve_core();
        LpSolution sol;
        sol.status = out.status;
        const double flip = sense_ == Sense::maximize ? -1.0 : 1.0;
        auto to_dbl = [](const std::vector<S>& v) {
            std::vector<double> r(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) r[i] = scalar_to_double(v[i]);
            return r;
        };
        switch (out.status) {
            case LpStatus::optimal:
                sol.primal = to_dbl(out.x);
                sol.dual = to_dbl(out.y);
                if (sense_ == Sense::maximize)
                    for (double& y : sol.dual) y = -y;
                sol.objective = flip * scalar_to_double(out.obj_min);
                break;
            case LpStatus::infeasible:
                sol.farkas = to_dbl(out.farkas);
                break;
            case LpStatus::unbounded:
                sol.primal = to_dbl(out.x);
                sol.ray = to_dbl(out.ray);
                sol.objective = sense_ == Sense::maximize ? kInf : -kInf;
                break;
        }
        return sol;
    }

    RationalSolution run_rational() {
        static_assert(std::is_same_v<S, Rational>);
        const Outcome out = solve_core();
        RationalSolution sol;
        sol.status = out.status;
        switch (out.status) {
            case LpStatus::optimal:
                sol.primal = out.x;
                sol.dual = out.y;
                if (sense_ == Sense::maximize)
                    for (auto& y : sol.dual) y = -y;
                sol.objective = sense_ == Sense::maximize ? -out.obj_min : out.obj_min;
                break;
            case LpStatus::infeasible:
                sol.farkas = out.farkas;
                break;
            case LpStatus::unbounded:
                sol.primal = out.x;
                sol.ray = out.ray;
                break;
        }
        return sol;
    }

private:
    enum State : std::int8_t { kAtLower = 0, kAtUpper = 1, kFreeZero = 2, kBasic = 3 };

    struct Outcome {
        LpStatus status = LpStatus::optimal;
        std::vector<S> x;       // structural values
        std::vector<S> y;       // row duals, min-sense
        S obj_min = S(0);
        std::vector<S> farkas;  // row certificate when infeasible
        std::vector<S> ray;     // structural improving direction when unbounded
    };

    static double scalar_to_double(const S& v) {
        if constexpr (std::is_same_v<S, double>) return v;
        else return to_double(v);
    }

    static S abs_val(const S& v) { return v < S(0) ? S(-v) : v; }

    // Column j of [A | I_slack | I_art] as (row, value) pairs.
    template <class F>
    void for_col(int j, F&& f) const {
        if (j < n_) {
            for (int k = cptr_[j]; k < cptr_[j + 1]; ++k) f(rowi_[k], val_[k]);
        } else {
            f(j >= n_ + m_ ? j - n_ - m_ : j - n_, S(1));
        }
    }

    bool pinned(int j) const { return has_lo_[j] && has_hi_[j] && lo_[j] == hi_[j]; }

    S nonbasic_value(int j) const {
        switch (state_[j]) {
            case kAtLower: return lo_[j];
            case kAtUpper: return hi_[j];
            default: return S(0);
        }
    }

    std::vector<S> ftran(int j) const {
        std::vector<S> u(m_, S(0));
        for_col(j, [&](int i, const S& a) {
            for (int r = 0; r < m_; ++r) {
                const S& b = binv_[static_cast<std::size_t>(r) * m_ + i];
                if (b != S(0)) u[r] += b * a;
            }
        });
        return u;
    }

    std::vector<S> row_duals(const std::vector<S>& cost) const {
        std::vector<S> y(m_, S(0));
        for (int r = 0; r < m_; ++r) {
            const S& cb = cost[basis_[r]];
            if (cb == S(0)) continue;
            const S* row = binv_.data() + static_cast<std::size_t>(r) * m_;
            for (int k = 0; k < m_; ++k)
                if (row[k] != S(0)) y[k] += cb * row[k];
        }
        return y;
    }

    S reduced_cost(int j, const std::vector<S>& cost, const std::vector<S>& y) const {
        S rc = cost[j];
        for_col(j, [&](int i, const S& a) { rc -= y[i] * a; });
        return rc;
    }

    void pivot(int row, int enter, const std::vector<S>& u) {
        const S piv = u[row];
        S* prow = binv_.data() + static_cast<std::size_t>(row) * m_;
        for (int k = 0; k < m_; ++k) prow[k] /= piv;
        for (int r = 0; r < m_; ++r) {
            if (r == row || u[r] == S(0)) continue;
            S* trow = binv_.data() + static_cast<std::size_t>(r) * m_;
            const S f = u[r];
            for (int k = 0; k < m_; ++k)
                if (prow[k] != S(0)) trow[k] -= f * prow[k];
        }
        basis_[row] = enter;
        state_[enter] = kBasic;
    }

    // One simplex iteration against the given cost vector.
    // Returns: 0 pivoted/flipped, 1 optimal, 2 unbounded (fills ray info).
    int iterate(const std::vector<S>& cost, bool allow_artificial, int& ray_enter, int& ray_dir,
                std::vector<S>& ray_u) {
        const std::vector<S> y = row_duals(cost);
        const S eps_c = ScalarTraits<S>::eps_cost();

        int enter = -1, dir = 0;
        const int limit = allow_artificial ? total_ : n_ + m_;
        for (int j = 0; j < limit; ++j) {
            if (state_[j] == kBasic || pinned(j)) continue;
            const S rc = reduced_cost(j, cost, y);
            if (state_[j] == kAtLower) {
                if (rc < -eps_c) { enter = j; dir = 1; break; }
            } else if (state_[j] == kAtUpper) {
                if (rc > eps_c) { enter = j; dir = -1; break; }
            } else {  // free at zero
                if (rc < -eps_c) { enter = j; dir = 1; break; }
                if (rc > eps_c) { enter = j; dir = -1; break; }
            }
        }
        if (enter < 0) return 1;

        const std::vector<S> u = ftran(enter);
        const S tiny = ScalarTraits<S>::eps_tiny();
        const S relax = ScalarTraits<S>::eps_harris();

        // Two-pass (Harris) ratio test. Pass 1 relaxes every blocking ratio by
        // a feasibility tolerance; pass 2 picks, among blockers inside the
        // relaxed minimum, the largest pivot magnitude. Tiny-magnitude blockers
        // are overridden at a bound violation of at most `relax`, which keeps
        // near-singular bases out. Bland mode pivots by least variable index.
        S t_rel = S(0);
        bool have_rel = false;
        if (dir > 0 && has_hi_[enter]) {
            t_rel = hi_[enter] - nonbasic_value(enter);
            have_rel = true;
        } else if (dir < 0 && has_lo_[enter]) {
            t_rel = nonbasic_value(enter) - lo_[enter];
            have_rel = true;
        }
        const S t_own = have_rel ? t_rel : S(0);
        const bool has_own = have_rel;

        auto blocker = [&](int r, S& slack) {
            const int bi = basis_[r];
            const S delta = dir > 0 ? u[r] : S(-u[r]);
            if (delta > tiny && has_lo_[bi]) slack = xb_[r] - lo_[bi];
            else if (delta < -tiny && has_hi_[bi]) slack = hi_[bi] - xb_[r];
            else return false;
            if (slack < S(0)) slack = S(0);
            return true;
        };

        for (int r = 0; r < m_; ++r) {
            S slack;
            if (!blocker(r, slack)) continue;
            const S t = (slack + relax) / abs_val(u[r]);
            if (!have_rel || t < t_rel) {
                t_rel = t;
                have_rel = true;
            }
        }
        if (!have_rel) {
            ray_enter = enter;
            ray_dir = dir;
            ray_u = u;
            return 2;
        }

        int best_row = -1;
        S best_mag = S(0);
        S best_t = S(0);
        int best_var = -1;
        if (!bland_mode_) {
            for (int r = 0; r < m_; ++r) {
                S slack;
                if (!blocker(r, slack)) continue;
                const S mag = abs_val(u[r]);
                const S t = slack / mag;
                if (t > t_rel) continue;
                if (best_row < 0 || mag > best_mag || (mag == best_mag && basis_[r] < best_var)) {
                    best_row = r;
                    best_mag = mag;
                    best_t = t;
                    best_var = basis_[r];
                }
            }
        } else {
            // Bland requires least index among the exact minimum ratios; the
            // Harris relaxation would break its termination argument.
            S t_min = t_own;
            bool have_min = has_own;
            for (int r = 0; r < m_; ++r) {
                S slack;
                if (!blocker(r, slack)) continue;
                const S t = slack / abs_val(u[r]);
                if (!have_min || t < t_min) {
                    t_min = t;
                    have_min = true;
                }
            }
            const S window = ScalarTraits<S>::tie() * (S(1) + abs_val(t_min));
            for (int r = 0; r < m_; ++r) {
                S slack;
                if (!blocker(r, slack)) continue;
                const S t = slack / abs_val(u[r]);
                if (t > t_min + window) continue;
                if (best_row < 0 || basis_[r] < best_var) {
                    best_row = r;
                    best_mag = abs_val(u[r]);
                    best_t = t;
                    best_var = basis_[r];
                }
            }
            if (has_own && t_own <= t_min + window && (best_row < 0 || enter < best_var)) {
                best_row = -1;  // the entering variable's own bound wins by index
                best_t = t_own;
            }
        }

        const bool flip = bland_mode_ ? (best_row < 0)
                                      : (has_own && (best_row < 0 || t_own <= best_t));
        const S step = flip ? t_own : best_t;

        if (step > ScalarTraits<S>::tie() * (S(1) + abs_val(nonbasic_value(enter)))) {
            stall_ = 0;
        } else if (++stall_ > 2000) {
            bland_mode_ = true;  // strict least-index selection until the phase ends
        }
        const S venter = nonbasic_value(enter) + (dir > 0 ? step : S(-step));
        for (int r = 0; r < m_; ++r) {
            if (u[r] == S(0)) continue;
            xb_[r] -= (dir > 0 ? step : S(-step)) * u[r];
        }
        if (flip) {
            state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
            return 0;
        }
        const int leave = basis_[best_row];
        const S delta = dir > 0 ? u[best_row] : S(-u[best_row]);
        state_[leave] = delta > S(0) ? kAtLower : kAtUpper;
        if (leave >= n_ + m_) {
            // an artificial never comes back
            has_lo_[leave] = has_hi_[leave] = true;
            lo_[leave] = hi_[leave] = S(0);
            state_[leave] = kAtLower;
        }
        pivot(best_row, enter, u);
        xb_[best_row] = venter;
        return 0;
    }

    Outcome solve_core() {
        // Nonbasic start for structural and slack columns.
        state_.assign(total_, kAtLower);
        for (int j = 0; j < n_ + m_; ++j) {
            if (has_lo_[j]) state_[j] = kAtLower;
            else if (has_hi_[j]) state_[j] = kAtUpper;
            else state_[j] = kFreeZero;
        }

        // Residuals b - A v decide the artificial signs.
        std::vector<S> resid(rhs_);
        for (int j = 0; j < n_; ++j) {
            const S v = nonbasic_value(j);
            if (v == S(0)) continue;
            for (int k = cptr_[j]; k < cptr_[j + 1]; ++k) resid[rowi_[k]] -= val_[k] * v;
        }

        std::vector<S> cost1(total_, S(0));
        basis_.resize(m_);
        xb_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            const int a = n_ + m_ + i;
            if (resid[i] < S(0)) { has_hi_[a] = true; cost1[a] = S(-1); }
            else { has_lo_[a] = true; cost1[a] = S(1); }
            basis_[i] = a;
            state_[a] = kBasic;
            xb_[i] = resid[i];
        }
        binv_.assign(static_cast<std::size_t>(m_) * m_, S(0));
        for (int i = 0; i < m_; ++i) binv_[static_cast<std::size_t>(i) * m_ + i] = S(1);

        const long max_iter = 20000L + 200L * (m_ + n_);
        long iters = 0;
        int ray_enter = -1, ray_dir = 0;
        std::vector<S> ray_u;

        // Phase 1.
        int confirm = 0;
        while (true) {
            if (++iters > max_iter) throw SolverFailure("simplex iteration limit (phase 1)");
            if (iters % 64 == 0) refactorize();
            const int rc = iterate(cost1, true, ray_enter, ray_dir, ray_u);
            if (rc == 0) { confirm = 0; continue; }
            if (rc == 2) throw SolverFailure("phase-1 objective unbounded");
            if (!std::is_same_v<S, Rational> && confirm == 0) { refactorize(); confirm = 1; continue; }
            break;
        }

        S infeas = S(0);
        for (int r = 0; r < m_; ++r)
            if (basis_[r] >= n_ + m_) infeas += abs_val(xb_[r]);

        S bscale = S(1);
        for (int i = 0; i < m_; ++i)
            if (abs_val(rhs_[i]) > bscale) bscale = abs_val(rhs_[i]);
        const S cut = std::is_same_v<S, Rational> ? S(0) : S(ScalarTraits<S>::from_double(1e-9)) * bscale;

        Outcome out;
        if (infeas > cut) {
            out.status = LpStatus::infeasible;
            out.farkas = row_duals(cost1);
            return out;
        }

        // Drive leftover artificials out of the basis on the strongest pivot
        // available; a row with no usable pivot is redundant and its artificial
        // stays pinned at zero.
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < n_ + m_) continue;
            int enter = -1;
            S best = ScalarTraits<S>::eps_pivot();
            for (int j = 0; j < n_ + m_; ++j) {
                if (state_[j] == kBasic || pinned(j)) continue;
                S ur = S(0);
                for_col(j, [&](int i, const S& a) {
                    ur += binv_[static_cast<std::size_t>(r) * m_ + i] * a;
                });
                if (abs_val(ur) > best) {
                    best = abs_val(ur);
                    enter = j;
                }
            }
            const int art = basis_[r];
            if (enter >= 0) {
                const std::vector<S> u = ftran(enter);
                const S venter = nonbasic_value(enter);
                pivot(r, enter, u);
                xb_[r] = venter;
                state_[art] = kAtLower;
            } else {
                xb_[r] = S(0);  // redundant row; the artificial can never move again
            }
            has_lo_[art] = has_hi_[art] = true;
            lo_[art] = hi_[art] = S(0);
        }
        for (int a = n_ + m_; a < total_; ++a) {
            if (state_[a] == kBasic) continue;
            has_lo_[a] = has_hi_[a] = true;
            lo_[a] = hi_[a] = S(0);
            state_[a] = kAtLower;
        }

        // Phase 2.
        confirm = 0;
        stall_ = 0;
        if constexpr (!std::is_same_v<S, Rational>) bland_mode_ = false;
        while (true) {
            if (++iters > max_iter) throw SolverFailure("simplex iteration limit (phase 2)");
            if (iters % 64 == 0) refactorize();
            const int rc = iterate(cost_, false, ray_enter, ray_dir, ray_u);
            if (rc == 0) { confirm = 0; continue; }
            if (!std::is_same_v<S, Rational> && confirm == 0) { refactorize(); confirm = 1; continue; }
            if (rc == 1) {
                check_basic_feasibility(bscale);
                out.status = LpStatus::optimal;
                out.x = extract_structural();
                out.y = row_duals(cost_);
                out.obj_min = S(0);
                for (int j = 0; j < n_; ++j) out.obj_min += cost_[j] * out.x[j];
                return out;
            }
            // Unbounded: direction = dir on the entering column, -dir * u on the basics.
            out.status = LpStatus::unbounded;
            out.x = extract_structural();
            out.ray.assign(n_, S(0));
            if (ray_enter < n_) out.ray[ray_enter] = S(ray_dir);
            for (int r = 0; r < m_; ++r) {
                if (basis_[r] < n_ && ray_u[r] != S(0))
                    out.ray[basis_[r]] = (ray_dir > 0 ? S(-ray_u[r]) : ray_u[r]);
            }
            S norm = S(0);
            for (const S& v : out.ray)
                if (abs_val(v) > norm) norm = abs_val(v);
            if (norm > S(0))
                for (S& v : out.ray) v /= norm;
            return out;
        }
    }

    // A confirmed optimum must have basics inside their bounds; anything else
    // is a numerical breakdown better surfaced than returned.
    void check_basic_feasibility(const S& bscale) const {
        if constexpr (std::is_same_v<S, Rational>) return;
        double scale = scalar_to_double(bscale);
        for (int r = 0; r < m_; ++r) {
            const int bi = basis_[r];
            const double v = scalar_to_double(xb_[r]);
            scale = std::max(scale, std::abs(v));
            double viol = 0.0;
            if (has_lo_[bi]) viol = std::max(viol, scalar_to_double(lo_[bi]) - v);
            if (has_hi_[bi]) viol = std::max(viol, v - scalar_to_double(hi_[bi]));
            if (viol > 1e-7 * (1.0 + scale))
                throw SolverFailure("basic variable outside bounds at a declared optimum");
        }
    }

    // Rebuilds B^{-1} and the basic values from scratch, discarding the drift
    // accumulated by product-form updates. No-op in rational arithmetic.
    void refactorize() {
        if constexpr (std::is_same_v<S, Rational>) return;
        if (m_ == 0) return;
        std::vector<S> B(static_cast<std::size_t>(m_) * m_, S(0));
        for (int r = 0; r < m_; ++r)
            for_col(basis_[r], [&](int i, const S& a) { B[static_cast<std::size_t>(i) * m_ + r] = a; });
        std::vector<S> inv(static_cast<std::size_t>(m_) * m_, S(0));
        for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = S(1);
        for (int col = 0; col < m_; ++col) {
            int piv = -1;
            S best = S(0);
            for (int r = col; r < m_; ++r) {
                const S v = abs_val(B[static_cast<std::size_t>(r) * m_ + col]);
                if (v > best) { best = v; piv = r; }
            }
            if (piv < 0 || !(best > ScalarTraits<S>::eps_pivot())) return;  // keep current factors
            if (piv != col) {
                for (int k = 0; k < m_; ++k) {
                    std::swap(B[static_cast<std::size_t>(piv) * m_ + k], B[static_cast<std::size_t>(col) * m_ + k]);
                    std::swap(inv[static_cast<std::size_t>(piv) * m_ + k], inv[static_cast<std::size_t>(col) * m_ + k]);
                }
            }
            const S d = B[static_cast<std::size_t>(col) * m_ + col];
            for (int k = 0; k < m_; ++k) {
                B[static_cast<std::size_t>(col) * m_ + k] /= d;
                inv[static_cast<std::size_t>(col) * m_ + k] /= d;
            }
            for (int r = 0; r < m_; ++r) {
                if (r == col) continue;
                const S f = B[static_cast<std::size_t>(r) * m_ + col];
                if (f == S(0)) continue;
                for (int k = 0; k < m_; ++k) {
                    B[static_cast<std::size_t>(r) * m_ + k] -= f * B[static_cast<std::size_t>(col) * m_ + k];
                    inv[static_cast<std::size_t>(r) * m_ + k] -= f * inv[static_cast<std::size_t>(col) * m_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        // xb = B^{-1} (b - N x_N)
        std::vector<S> r2(rhs_);
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == kBasic) continue;
            const S v = nonbasic_value(j);
            if (v == S(0)) continue;
            for_col(j, [&](int i, const S& a) { r2[i] -= a * v; });
        }
        for (int r = 0; r < m_; ++r) {
            S acc = S(0);
            const S* row = binv_.data() + static_cast<std::size_t>(r) * m_;
            for (int k = 0; k < m_; ++k)
                if (row[k] != S(0)) acc += row[k] * r2[k];
            xb_[r] = acc;
        }
    }

    std::vector<S> extract_structural() const {
        std::vector<S> x(n_, S(0));
        for (int j = 0; j < n_; ++j)
            if (state_[j] != kBasic) x[j] = nonbasic_value(j);
        for (int r = 0; r < m_; ++r)
            if (basis_[r] < n_) x[basis_[r]] = xb_[r];
        return x;
    }

    Sense sense_;
    int n_ = 0, m_ = 0, total_ = 0;
    std::vector<int> cptr_, rowi_;
    std::vector<S> val_;
    std::vector<S> cost_;
    std::vector<std::uint8_t> has_lo_, has_hi_;
    std::vector<S> lo_, hi_;
    std::vector<S> rhs_;

    std::vector<int> basis_;
    std::vector<std::int8_t> state_;
    std::vector<S> xb_;
    std::vector<S> binv_;
    bool bland_mode_ = std::is_same_v<S, Rational>;  // exact mode pivots by least index throughout
    long stall_ = 0;
};

} // namespace hedge::lp::detail
