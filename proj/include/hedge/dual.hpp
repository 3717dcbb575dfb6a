#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hedge/lp.hpp"
#include "hedge/wealth.hpp"

namespace hedge {

// Robust consistent price system: nonnegative terminal densities for finitely
// many models, a martingale m evolving inside the aggregated bid-ask corridor,
// and a witness (theta, A) carrying strictly positive mass.
struct ConsistentPriceSystem {
    struct Witness {
        std::string theta;
        std::vector<std::string> leaves;
    };

    std::map<std::string, std::map<std::string, double>> z_terminal;  // theta -> leaf -> Z_T
    std::map<std::string, double> m;                                  // node -> martingale value
    Witness witness;
};

// Single-model consistent price system, the pasting ingredient.
struct SingleModelCps {
    std::map<std::string, double> z_terminal;  // leaf -> Z_T
    std::map<std::string, double> m;           // node -> M
};

namespace detail {

// Density processes Z^theta at every node by backward probability-weighted
// averaging of the terminal values; absent models are identically zero.
inline std::vector<std::vector<double>> cps_densities(const ModelFamily& family,
                                                      const ConsistentPriceSystem& cps) {
    const auto& tree = family.tree();
    std::vector<std::vector<double>> z(family.num_models());
    for (int m = 0; m < family.num_models(); ++m)
        z[m].assign(tree.size(), 0.0);
    for (const auto& [theta, leaf_map] : cps.z_terminal) {
        const int m = family.theta_index(theta);
        std::vector<double> leaf_vals(tree.num_leaves(), 0.0);
        for (const auto& [leaf_id, v] : leaf_map) {
            const int node = tree.index(leaf_id);
            if (!tree.is_leaf(node))
                throw UnknownNode("z entry at non-leaf node '" + leaf_id + "'");
            leaf_vals[tree.leaf_ordinal(node)] = v;
        }
        z[m] = tree.expect_at_nodes(leaf_vals);
    }
    return z;
}

} // namespace detail

struct CpsViolation {
    std::string kind;   // "nonnegative" | "witness" | "coverage" | "martingale" | "sandwich" | "tower"
    std::string theta;  // empty when not model-specific
    std::string node;   // empty when global
    double amount = 0.0;
};

struct CpsReport {
    bool valid = true;
    std::vector<CpsViolation> violations;
    double mass = 0.0;  // E[sum_theta Z_T]
};

inline CpsReport validate_cps(const ModelFamily& family, const ConsistentPriceSystem& cps,
                              double tol = lp::kTolFeas) {
    const auto& tree = family.tree();
    CpsReport rep;
    auto flag = [&](std::string kind, std::string theta, std::string node, double amount) {
        rep.valid = false;
        rep.violations.push_back({std::move(kind), std::move(theta), std::move(node), amount});
    };

    for (const auto& [theta, leaf_map] : cps.z_terminal) {
        family.theta_index(theta);  // throws UnknownModel
        for (const auto& [leaf_id, v] : leaf_map) {
            if (!std::isfinite(v) || v < -tol) flag("nonnegative", theta, leaf_id, v);
        }
    }
    const auto z = detail::cps_densities(family, cps);
    for (int m = 0; m < family.num_models(); ++m) rep.mass += z[m][tree.root()];

    // witness positivity E[Z 1_A] > 0
    {
        double wmass = 0.0;
        bool ok = true;
        try {
            const int m = family.theta_index(cps.witness.theta);
            for (const auto& leaf_id : cps.witness.leaves) {
                const int node = tree.index(leaf_id);
                if (!tree.is_leaf(node)) { ok = false; break; }
                wmass += tree.prob(node) * z[m][node];
            }
        } catch (const Error&) {
            ok = false;
        }
        if (!ok || !(wmass > tol)) flag("witness", cps.witness.theta, "", wmass);
    }

    // martingale and sandwich require m at every node
    std::vector<double> mval(tree.size(), 0.0);
    std::vector<bool> have(tree.size(), false);
    for (const auto& [id, v] : cps.m) {
        const int i = tree.index(id);
        mval[i] = v;
        have[i] = true;
        if (!std::isfinite(v)) flag("coverage", "", id, v);
    }
    for (int i = 0; i < tree.size(); ++i) {
        if (!have[i]) {
            flag("coverage", "", tree.id(i), 0.0);
            return rep;
        }
    }

    for (int i = 0; i < tree.size(); ++i) {
        if (!tree.is_leaf(i)) {
            double acc = 0.0;
            for (int c : tree.children(i)) acc += tree.branch_prob(c) * mval[c];
            if (std::abs(mval[i] - acc) > tol) flag("martingale", "", tree.id(i), mval[i] - acc);
            for (int m = 0; m < family.num_models(); ++m) {
                double zc = 0.0;
                for (int c : tree.children(i)) zc += tree.branch_prob(c) * z[m][c];
                if (std::abs(z[m][i] - zc) > tol)
                    flag("tower", family.field(m).theta(), tree.id(i), z[m][i] - zc);
            }
        }
        double corridor = 0.0;
        for (int m = 0; m < family.num_models(); ++m) corridor += z[m][i] * family.field(m).at(i);
        const double lo = (1.0 - family.lambda()) * corridor;
        const double hi = (1.0 + family.lambda()) * corridor;
        if (mval[i] < lo - tol) flag("sandwich", "", tree.id(i), lo - mval[i]);
        if (mval[i] > hi + tol) flag("sandwich", "", tree.id(i), mval[i] - hi);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Sandwich martingale fitting (backward achievable intervals, forward affine
// selection). Feasible iff no achievable interval empties.

struct SandwichResult {
    bool feasible = false;
    std::map<std::string, double> m;
    std::string witness_node;  // where the corridor emptied
};

inline SandwichResult fit_sandwich_martingale(const ScenarioTree& tree,
                                              const std::map<std::string, double>& lower,
                                              const std::map<std::string, double>& upper) {
    const int n = tree.size();
    std::vector<double> lo(n), hi(n);
    std::vector<bool> have(n, false);
    for (const auto& [id, v] : lower) lo[tree.index(id)] = v;
    for (const auto& [id, v] : upper) {
        const int i = tree.index(id);
        hi[i] = v;
        have[i] = true;
    }
    for (int i = 0; i < n; ++i) {
        if (!have[i] || lower.find(tree.id(i)) == lower.end())
            throw InvariantViolation("corridor missing node '" + tree.id(i) + "'");
        if (lo[i] > hi[i])
            throw BoundsOutOfOrder("lower > upper at node '" + tree.id(i) + "'");
    }

    // Backward pass: the interval of martingale values achievable at each node.
    std::vector<double> alo(lo), ahi(hi);
    SandwichResult out;
    for (int t = tree.horizon() - 1; t >= 0; --t) {
        for (int i = 0; i < n; ++i) {
            if (tree.time(i) != t || tree.is_leaf(i)) continue;
            double clo = 0.0, chi = 0.0;
            for (int c : tree.children(i)) {
                clo += tree.branch_prob(c) * alo[c];
                chi += tree.branch_prob(c) * ahi[c];
            }
            alo[i] = std::max(lo[i], clo);
            ahi[i] = std::min(hi[i], chi);
            if (alo[i] > ahi[i]) {
                out.witness_node = tree.id(i);
                return out;
            }
        }
    }

    // Forward pass: midpoint at the root, children scaled affinely from their
    // midpoints toward the needed endpoint to meet each conditional mean.
    std::vector<double> m(n, 0.0);
    m[tree.root()] = 0.5 * (alo[tree.root()] + ahi[tree.root()]);
    for (int t = 0; t < tree.horizon(); ++t) {
        for (int i = 0; i < n; ++i) {
            if (tree.time(i) != t || tree.is_leaf(i)) continue;
            double cmid = 0.0, cl = 0.0, ch = 0.0;
            for (int c : tree.children(i)) {
                cmid += tree.branch_prob(c) * 0.5 * (alo[c] + ahi[c]);
                cl += tree.branch_prob(c) * alo[c];
                ch += tree.branch_prob(c) * ahi[c];
            }
            const double v = m[i];
            if (v < cmid) {
                const double span = cmid - cl;
                const double f = span > 0.0 ? (cmid - v) / span : 0.0;
                for (int c : tree.children(i)) {
                    const double mid = 0.5 * (alo[c] + ahi[c]);
                    m[c] = mid - f * (mid - alo[c]);
                }
            } else {
                const double span = ch - cmid;
                const double f = span > 0.0 ? (v - cmid) / span : 0.0;
                for (int c : tree.children(i)) {
                    const double mid = 0.5 * (alo[c] + ahi[c]);
                    m[c] = mid + f * (ahi[c] - mid);
                }
            }
        }
    }
    out.feasible = true;
    for (int i = 0; i < n; ++i) out.m[tree.id(i)] = m[i];
    return out;
}

// ---------------------------------------------------------------------------
// Single-model strictly positive CPS by LP feasibility. Variables are the
// probability-scaled densities y_l = P(l) Z_T(l) >= P(l) (so Z_T >= 1) and the
// subtree masses mhat(n) = P(n) M(n); both keep coefficients at price scale.

struct FitCpsResult {
    std::optional<SingleModelCps> cps;
    std::vector<double> farkas;  // row certificate when none exists
};

inline FitCpsResult fit_positive_cps(const ModelFamily& family, const std::string& theta) {
    const auto& tree = family.tree();
    const PriceField& prices = family.field(family.theta_index(theta));
    const int L = tree.num_leaves();
    const double lam = family.lambda();

    lp::LpProblem p;
    for (int k = 0; k < L; ++k)
        p.add_variable(tree.prob(tree.leaves()[k]), lp::kInf, 1.0);  // min E[Z] keeps it bounded
    const int mass_base = L;
    for (int i = 0; i < tree.size(); ++i) p.add_variable(-lp::kInf, lp::kInf, 0.0);

    for (int i = 0; i < tree.size(); ++i) {
        if (!tree.is_leaf(i)) {
            std::vector<std::pair<int, double>> terms{{mass_base + i, 1.0}};
            for (int c : tree.children(i)) terms.push_back({mass_base + c, -1.0});
            p.add_row(lp::Relation::eq, 0.0, terms);
        }
        const auto [kb, ke] = tree.leaf_range(i);
        std::vector<std::pair<int, double>> lo_terms{{mass_base + i, 1.0}};
        std::vector<std::pair<int, double>> hi_terms{{mass_base + i, -1.0}};
        for (int k = kb; k < ke; ++k) {
            lo_terms.push_back({k, -(1.0 - lam) * prices.at(i)});
            hi_terms.push_back({k, (1.0 + lam) * prices.at(i)});
        }
        p.add_row(lp::Relation::ge, 0.0, lo_terms);
        p.add_row(lp::Relation::ge, 0.0, hi_terms);
    }

    const lp::LpSolution sol = lp::solve(p);
    FitCpsResult out;
    if (sol.status == lp::LpStatus::infeasible) {
        out.farkas = sol.farkas;
        return out;
    }
    if (sol.status != lp::LpStatus::optimal)
        throw SolverFailure("positive-CPS feasibility program neither optimal nor infeasible");
    SingleModelCps cps;
    for (int k = 0; k < L; ++k) {
        const int leaf = tree.leaves()[k];
        cps.z_terminal[tree.id(leaf)] = sol.primal[k] / tree.prob(leaf);
    }
    for (int i = 0; i < tree.size(); ++i)
        cps.m[tree.id(i)] = sol.primal[mass_base + i] / tree.prob(i);
    out.cps = std::move(cps);
    return out;
}

// Validates a single-model CPS against its own corridor; used by pasting.
inline void require_valid_part(const ModelFamily& family, const std::string& theta,
                               const SingleModelCps& part, double tol = lp::kTolFeas) {
    const auto& tree = family.tree();
    const PriceField& prices = family.field(family.theta_index(theta));
    std::vector<double> leaf_vals(tree.num_leaves(), 0.0);
    for (const auto& [leaf_id, v] : part.z_terminal) {
        const int node = tree.index(leaf_id);
        if (!tree.is_leaf(node))
            throw InvalidPart("part for '" + theta + "' has z at non-leaf '" + leaf_id + "'");
        if (!std::isfinite(v) || v < -tol)
            throw InvalidPart("part for '" + theta + "' has negative density at '" + leaf_id + "'");
        leaf_vals[tree.leaf_ordinal(node)] = v;
    }
    const auto z = tree.expect_at_nodes(leaf_vals);
    if (!(z[tree.root()] > tol))
        throw InvalidPart("part for '" + theta + "' carries no mass");
    std::vector<double> mval(tree.size(), 0.0);
    std::vector<bool> have(tree.size(), false);
    for (const auto& [id, v] : part.m) {
        mval[tree.index(id)] = v;
        have[tree.index(id)] = true;
    }
    const double lam = family.lambda();
    for (int i = 0; i < tree.size(); ++i) {
        if (!have[i]) throw InvalidPart("part for '" + theta + "' missing m at '" + tree.id(i) + "'");
        const double scale = 1.0 + std::abs(mval[i]);
        if (!tree.is_leaf(i)) {
            double acc = 0.0;
            for (int c : tree.children(i)) acc += tree.branch_prob(c) * mval[c];
            if (std::abs(mval[i] - acc) > tol * scale)
                throw InvalidPart("part for '" + theta + "' not a martingale at '" + tree.id(i) + "'");
        }
        const double zs = z[i] * prices.at(i);
        if (mval[i] < (1.0 - lam) * zs - tol * scale || mval[i] > (1.0 + lam) * zs + tol * scale)
            throw InvalidPart("part for '" + theta + "' leaves its corridor at '" + tree.id(i) + "'");
    }
}

// Pasting: convex weights on per-model systems; the weighted sum of the
// individual martingales stays inside the aggregated corridor.
inline ConsistentPriceSystem paste_cps(const ModelFamily& family,
                                       const std::map<std::string, SingleModelCps>& parts,
                                       const std::map<std::string, double>& weights) {
    double wsum = 0.0;
    for (const auto& [theta, w] : weights) {
        if (!(w >= 0.0)) throw InvalidPart("weight for '" + theta + "' must be >= 0");
        if (parts.find(theta) == parts.end())
            throw InvalidPart("weight given for '" + theta + "' without a part");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw InvalidPart("weights must sum to 1");

    ConsistentPriceSystem cps;
    std::vector<double> msum(family.tree().size(), 0.0);
    double best_mass = -1.0;
    for (const auto& [theta, part] : parts) {
        const auto it = weights.find(theta);
        const double w = it == weights.end() ? 0.0 : it->second;
        require_valid_part(family, theta, part);
        if (w == 0.0) continue;
        auto& zmap = cps.z_terminal[theta];
        double mass = 0.0;
        for (const auto& [leaf_id, v] : part.z_terminal) {
            zmap[leaf_id] = w * v;
            mass += family.tree().prob(family.tree().index(leaf_id)) * w * v;
        }
        for (const auto& [id, v] : part.m) msum[family.tree().index(id)] += w * v;
        if (mass > best_mass) {
            best_mass = mass;
            cps.witness.theta = theta;
            cps.witness.leaves.clear();
            for (const auto& [leaf_id, v] : part.z_terminal)
                if (v > 0.0) cps.witness.leaves.push_back(leaf_id);
        }
    }
    if (best_mass <= 0.0) throw InvalidPart("pasted system carries no mass");
    for (int i = 0; i < family.tree().size(); ++i) cps.m[family.tree().id(i)] = msum[i];
    return cps;
}

// ---------------------------------------------------------------------------
// The dual program: maximize E[sum_theta Z_T^theta G^theta] over normalized
// consistent price systems. Variables are y^theta(leaf) = P(leaf) Z^theta_T
// and subtree masses mhat(node) = P(node) M(node).

struct DualLayout {
    int num_models = 0;
    int num_leaves = 0;
    int mass_base = 0;
    int y_index(int model, int leaf_ordinal) const { return model * num_leaves + leaf_ordinal; }
    int mass_index(int node) const { return mass_base + node; }
};

struct DualProgram {
    lp::LpProblem problem;
    DualLayout layout;
};

inline DualProgram build_dual(const ModelFamily& family, const ClaimFamily& claims) {
    if (claims.num_models() != family.num_models())
        throw CoverageError("claims do not cover the family");
    const auto& tree = family.tree();
    const int L = tree.num_leaves();
    const int M = family.num_models();
    const double lam = family.lambda();

    DualProgram out;
    out.layout.num_models = M;
    out.layout.num_leaves = L;
    out.layout.mass_base = M * L;

    lp::LpProblem& p = out.problem;
    p.sense = lp::Sense::maximize;
    for (int m = 0; m < M; ++m)
        for (int k = 0; k < L; ++k) p.add_variable(0.0, lp::kInf, claims.at(m, k));
    for (int i = 0; i < tree.size(); ++i) p.add_variable(-lp::kInf, lp::kInf, 0.0);

    {
        std::vector<std::pair<int, double>> terms;
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < L; ++k) terms.push_back({out.layout.y_index(m, k), 1.0});
        p.add_row(lp::Relation::eq, 1.0, terms);  // E[sum Z_T] = 1
    }
    for (int i = 0; i < tree.size(); ++i) {
        if (!tree.is_leaf(i)) {
            std::vector<std::pair<int, double>> terms{{out.layout.mass_index(i), 1.0}};
            for (int c : tree.children(i)) terms.push_back({out.layout.mass_index(c), -1.0});
            p.add_row(lp::Relation::eq, 0.0, terms);
        }
        const auto [kb, ke] = tree.leaf_range(i);
        std::vector<std::pair<int, double>> lo_terms{{out.layout.mass_index(i), 1.0}};
        std::vector<std::pair<int, double>> hi_terms{{out.layout.mass_index(i), -1.0}};
        for (int m = 0; m < M; ++m) {
            const double s = family.field(m).at(i);
            for (int k = kb; k < ke; ++k) {
                lo_terms.push_back({out.layout.y_index(m, k), -(1.0 - lam) * s});
                hi_terms.push_back({out.layout.y_index(m, k), (1.0 + lam) * s});
            }
        }
        p.add_row(lp::Relation::ge, 0.0, lo_terms);
        p.add_row(lp::Relation::ge, 0.0, hi_terms);
    }
    return out;
}

struct DualCertificate {
    double value = 0.0;
    ConsistentPriceSystem cps;
    double normalization_residual = 0.0;
};

inline DualCertificate decode_dual(const ModelFamily& family, const DualLayout& layout,
                                   const std::vector<double>& x) {
    const auto& tree = family.tree();
    DualCertificate cert;
    double mass = 0.0;
    double best = -1.0;
    for (int m = 0; m < family.num_models(); ++m) {
        double model_mass = 0.0;
        std::map<std::string, double> zmap;
        for (int k = 0; k < tree.num_leaves(); ++k) {
            const int leaf = tree.leaves()[k];
            const double y = std::max(0.0, x[layout.y_index(m, k)]);
            model_mass += y;
            if (y > 0.0) zmap[tree.id(leaf)] = y / tree.prob(leaf);
        }
        mass += model_mass;
        if (!zmap.empty()) {
            if (model_mass > best) {
                best = model_mass;
                cert.cps.witness.theta = family.field(m).theta();
                cert.cps.witness.leaves.clear();
                for (const auto& [id, v] : zmap) cert.cps.witness.leaves.push_back(id);
            }
            cert.cps.z_terminal[family.field(m).theta()] = std::move(zmap);
        }
    }
    for (int i = 0; i < tree.size(); ++i)
        cert.cps.m[tree.id(i)] = x[layout.mass_index(i)] / tree.prob(i);
    cert.normalization_residual = std::abs(mass - 1.0);
    return cert;
}

// Solves the dual program and returns the optimal CPS with its value.
// A free lunch (no normalized CPS at all) surfaces as infeasibility.
inline DualCertificate solve_dual_cps(const ModelFamily& family, const ClaimFamily& claims,
                                      const lp::SolveOptions& opts = {}) {
    const DualProgram prog = build_dual(family, claims);
    const lp::LpSolution sol = lp::solve_with(prog.problem, opts);
    if (sol.status == lp::LpStatus::infeasible)
        throw FreeLunch("no consistent price system exists: the family admits a free lunch");
    if (sol.status != lp::LpStatus::optimal)
        throw SolverFailure("dual program unbounded; the normalization row should prevent this");
    DualCertificate cert = decode_dual(family, prog.layout, sol.primal);
    cert.value = sol.objective;
    return cert;
}

// Weak duality report: E[sum Z W0_T] <= 0 for every strategy against every
// valid CPS, and E[sum Z G] <= z * E[sum Z] once (z, strategy) superhedges.
struct WeakDualityReport {
    double wealth_expectation = 0.0;  // E[sum_theta Z^theta_T W^0_T(theta)]
    double claim_expectation = 0.0;   // E[sum_theta Z^theta_T G^theta]
    double mass = 0.0;                // E[sum_theta Z^theta_T]
    double z = 0.0;
    bool wealth_ok = false;
    bool price_ok = false;
};

inline WeakDualityReport weak_duality_check(const ModelFamily& family, const ClaimFamily& claims,
                                            const Strategy& strategy, double z,
                                            const ConsistentPriceSystem& cps,
                                            double tol = lp::kTolFeas) {
    const auto& tree = family.tree();
    const auto zfield = detail::cps_densities(family, cps);
    const auto wealth = wealth_report(family, strategy, 0.0);
    WeakDualityReport rep;
    rep.z = z;
    for (int m = 0; m < family.num_models(); ++m) {
        for (int k = 0; k < tree.num_leaves(); ++k) {
            const int leaf = tree.leaves()[k];
            const double weight = tree.prob(leaf) * zfield[m][leaf];
            rep.wealth_expectation += weight * wealth.values[m][leaf];
            rep.claim_expectation += weight * claims.at(m, k);
            rep.mass += weight;
        }
    }
    rep.wealth_ok = rep.wealth_expectation <= tol;
    rep.price_ok = rep.claim_expectation <= z * rep.mass + tol;
    return rep;
}

} // namespace hedge
