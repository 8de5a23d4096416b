#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "flet/time.hpp"

namespace flet {

enum class VarKind { Offset, Deadline, Aux };

struct VarId {
    VarKind kind = VarKind::Aux;
    int index = 0;
    auto operator<=>(const VarId&) const = default;
};

inline VarId offset_var(int task_ix) { return {VarKind::Offset, task_ix}; }
inline VarId deadline_var(int task_ix) { return {VarKind::Deadline, task_ix}; }
inline VarId aux_var(int n) { return {VarKind::Aux, n}; }

/// x - y <= bound. Either side may be absent, giving the box forms
/// x <= bound and -y <= bound (i.e. y >= -bound).
struct LinConstraint {
    std::optional<VarId> plus;
    std::optional<VarId> minus;
    Time bound = 0;
};

inline LinConstraint diff_le(VarId x, VarId y, Time c) { return {x, y, c}; }
inline LinConstraint upper(VarId x, Time c) { return {x, std::nullopt, c}; }
inline LinConstraint lower(VarId x, Time c) { return {std::nullopt, x, -c}; }

/// An affine term x - y + constant.
struct Term {
    VarId plus;
    VarId minus;
    Time constant = 0;
};

struct MaxGroup {
    std::vector<Term> terms;
};

/// Objective: sum over max_groups of max(terms) minus sum over min_groups of
/// min(terms). Every group must be nonempty.
struct MinMaxObjective {
    std::vector<MaxGroup> max_groups;
    std::vector<MaxGroup> min_groups;
};

using Witness = std::map<VarId, Time>;

inline Time eval_term(const Term& t, const Witness& w) {
    return w.at(t.plus) - w.at(t.minus) + t.constant;
}

inline Time eval_group_max(const MaxGroup& g, const Witness& w) {
    Time v = eval_term(g.terms.front(), w);
    for (std::size_t i = 1; i < g.terms.size(); ++i)
        v = std::max(v, eval_term(g.terms[i], w));
    return v;
}

inline Time eval_group_min(const MaxGroup& g, const Witness& w) {
    Time v = eval_term(g.terms.front(), w);
    for (std::size_t i = 1; i < g.terms.size(); ++i)
        v = std::min(v, eval_term(g.terms[i], w));
    return v;
}

inline Time eval_objective(const MinMaxObjective& obj, const Witness& w) {
    Time v = 0;
    for (const MaxGroup& g : obj.max_groups)
        v += eval_group_max(g, w);
    for (const MaxGroup& g : obj.min_groups)
        v -= eval_group_min(g, w);
    return v;
}

// ---------------------------------------------------------------------------
// Difference-constraint graph with Bellman-Ford feasibility.
// Constraint x - y <= c becomes arc y -> x of weight c; the virtual node 0
// stands for the constant zero, so shortest-path potentials shifted to make
// it zero are a witness.
// ---------------------------------------------------------------------------
class DiffGraph {
public:
    explicit DiffGraph(const std::vector<LinConstraint>& cs) {
        node_of_.clear();
        arcs_.clear();
        n_ = 1; // node 0 is the zero node
        for (const LinConstraint& c : cs) {
            int u = c.minus ? node(*c.minus) : 0;
            int v = c.plus ? node(*c.plus) : 0;
            arcs_.push_back({u, v, c.bound});
        }
    }

    int node(VarId v) {
        auto it = node_of_.find(v);
        if (it != node_of_.end())
            return it->second;
        int ix = n_++;
        node_of_.emplace(v, ix);
        vars_.push_back(v);
        return ix;
    }

    std::optional<int> node_if_present(VarId v) const {
        auto it = node_of_.find(v);
        if (it == node_of_.end())
            return std::nullopt;
        return it->second;
    }

    /// Feasibility with an integral witness, or nullopt on a negative cycle.
    std::optional<Witness> feasible() const {
        std::vector<Time> d(n_, 0); // implicit super-source at distance 0
        if (!relax_all(d))
            return std::nullopt;
        Witness w;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            w[vars_[i]] = d[i + 1] - d[0];
        return w;
    }

    /// max(x - y) over the feasible region, assuming the system is feasible.
    /// nullopt means the difference is unbounded above.
    std::optional<Time> max_difference(VarId x, VarId y) const {
        auto sx = node_if_present(x);
        auto sy = node_if_present(y);
        if (!sx || !sy)
            return std::nullopt;
        constexpr Time kInf = std::numeric_limits<Time>::max() / 4;
        std::vector<Time> d(n_, kInf);
        d[*sy] = 0;
        relax_all(d, kInf);
        if (d[*sx] >= kInf)
            return std::nullopt;
        return d[*sx];
    }

private:
    struct Arc {
        int from, to;
        Time w;
    };

    bool relax_all(std::vector<Time>& d, Time inf = 0) const {
        bool changed = true;
        for (int pass = 0; pass < n_ && changed; ++pass) {
            changed = false;
            for (const Arc& a : arcs_) {
                if (inf != 0 && d[a.from] >= inf)
                    continue;
                if (d[a.from] + a.w < d[a.to]) {
                    d[a.to] = d[a.from] + a.w;
                    changed = true;
                }
            }
        }
        return !changed; // still changing after n passes => negative cycle
    }

    std::map<VarId, int> node_of_;
    std::vector<VarId> vars_;
    std::vector<Arc> arcs_;
    int n_ = 1;
};

inline std::optional<Witness> feasibility(const std::vector<LinConstraint>& cs) {
    return DiffGraph(cs).feasible();
}

// ---------------------------------------------------------------------------
// Exact rational simplex (dense tableau, two phases, Bland's rule).
// Free variables are split as x = u - v at the call site below.
// ---------------------------------------------------------------------------
namespace detail {

using Rat = boost::multiprecision::cpp_rational;

struct SimplexLp {
    // minimize cost . x  s.t.  rows: sum coef*x <= rhs, x free
    int nvars = 0;
    std::vector<Rat> cost;
    std::vector<std::vector<std::pair<int, Rat>>> rows;
    std::vector<Rat> rhs;

    struct Result {
        bool feasible = false;
        Rat value;
        std::vector<Rat> x;
    };

    Result solve() const {
        const int m = int(rows.size());
        const int nstruct = 2 * nvars + m; // u, v, slacks
        const int ncols = nstruct + m;     // + artificials
        std::vector<std::vector<Rat>> a(m, std::vector<Rat>(ncols + 1));
        for (int i = 0; i < m; ++i) {
            for (auto& [j, c] : rows[i]) {
                a[i][j] += c;          // u_j
                a[i][nvars + j] -= c;  // v_j
            }
            a[i][2 * nvars + i] = 1; // slack
            a[i][ncols] = rhs[i];
            if (a[i][ncols] < 0)
                for (auto& e : a[i])
                    e = -e;
            a[i][nstruct + i] = 1; // artificial
        }
        std::vector<int> basis(m);
        for (int i = 0; i < m; ++i)
            basis[i] = nstruct + i;

        // Phase 1: minimize sum of artificials.
        std::vector<Rat> z(ncols + 1);
        for (int j = nstruct; j < ncols; ++j)
            z[j] = 1;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j <= ncols; ++j)
                z[j] -= a[i][j];
        if (!iterate(a, z, basis, nstruct, ncols))
            throw std::runtime_error("phase-1 unbounded");
        if (-z[ncols] != 0)
            return {false, 0, {}};

        // Phase 2: real costs; artificial columns are barred from entering.
        std::fill(z.begin(), z.end(), Rat(0));
        for (int j = 0; j < nvars; ++j) {
            z[j] = cost[j];
            z[nvars + j] = -cost[j];
        }
        for (int i = 0; i < m; ++i)
            if (z[basis[i]] != 0) {
                Rat f = z[basis[i]];
                for (int j = 0; j <= ncols; ++j)
                    z[j] -= f * a[i][j];
            }
        if (!iterate(a, z, basis, nstruct, ncols))
            throw std::runtime_error("objective unbounded below");

        Result res;
        res.feasible = true;
        res.value = -z[ncols];
        res.x.assign(nvars, 0);
        std::vector<Rat> col(nstruct, 0);
        for (int i = 0; i < m; ++i)
            if (basis[i] < nstruct)
                col[basis[i]] = a[i][ncols];
        for (int j = 0; j < nvars; ++j)
            res.x[j] = col[j] - col[nvars + j];
        return res;
    }

private:
    // Bland's rule; entering restricted to columns < enter_limit.
    static bool iterate(std::vector<std::vector<Rat>>& a, std::vector<Rat>& z,
                        std::vector<int>& basis, int enter_limit, int ncols) {
        const int m = int(a.size());
        for (;;) {
            int enter = -1;
            for (int j = 0; j < enter_limit; ++j)
                if (z[j] < 0) {
                    enter = j;
                    break;
                }
            if (enter < 0)
                return true;
            int leave = -1;
            Rat best;
            for (int i = 0; i < m; ++i) {
                if (a[i][enter] <= 0)
                    continue;
                Rat ratio = a[i][ncols] / a[i][enter];
                if (leave < 0 || ratio < best ||
                    (ratio == best && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0)
                return false; // unbounded
            pivot(a, z, basis, leave, enter, ncols);
        }
    }

    static void pivot(std::vector<std::vector<Rat>>& a, std::vector<Rat>& z,
                      std::vector<int>& basis, int row, int col, int ncols) {
        Rat p = a[row][col];
        for (int j = 0; j <= ncols; ++j)
            a[row][j] /= p;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (int(i) == row || a[i][col] == 0)
                continue;
            Rat f = a[i][col];
            for (int j = 0; j <= ncols; ++j)
                a[i][j] -= f * a[row][j];
        }
        if (z[col] != 0) {
            Rat f = z[col];
            for (int j = 0; j <= ncols; ++j)
                z[j] -= f * a[row][j];
        }
        basis[row] = col;
    }
};

inline Time rat_floor(const Rat& r) {
    using boost::multiprecision::cpp_int;
    cpp_int num = numerator(r);
    cpp_int den = denominator(r);
    cpp_int q = num / den;
    if (num % den != 0 && num < 0)
        --q;
    return q.convert_to<Time>();
}

} // namespace detail

/// Feasibility via the simplex phase 1; used to cross-check the
/// negative-cycle route.
inline bool lp_feasible(const std::vector<LinConstraint>& cs) {
    detail::SimplexLp lp;
    std::map<VarId, int> ix;
    auto var = [&](VarId v) {
        auto it = ix.find(v);
        if (it != ix.end())
            return it->second;
        int j = int(ix.size());
        ix.emplace(v, j);
        return j;
    };
    for (const LinConstraint& c : cs) {
        std::vector<std::pair<int, detail::Rat>> row;
        if (c.plus)
            row.emplace_back(var(*c.plus), 1);
        if (c.minus)
            row.emplace_back(var(*c.minus), -1);
        lp.rows.push_back(std::move(row));
        lp.rhs.emplace_back(c.bound);
    }
    lp.nvars = int(ix.size());
    lp.cost.assign(lp.nvars, 0);
    return lp.solve().feasible;
}

struct Solution {
    Time value = 0;
    Witness witness;
};

namespace detail {

// Collapse terms sharing a variable pair; for a max group only the largest
// constant can ever realize the max, for a min group only the smallest.
inline std::vector<Term> collapse_terms(const std::vector<Term>& ts, bool keep_max) {
    std::map<std::pair<VarId, VarId>, Time> best;
    for (const Term& t : ts) {
        auto key = std::make_pair(t.plus, t.minus);
        auto [it, fresh] = best.emplace(key, t.constant);
        if (!fresh)
            it->second = keep_max ? std::max(it->second, t.constant)
                                  : std::min(it->second, t.constant);
    }
    std::vector<Term> out;
    out.reserve(best.size());
    for (auto& [k, c] : best)
        out.push_back({k.first, k.second, c});
    return out;
}

// Minimal integer t such that the system plus {term <= t for all terms} is
// feasible, found by exponential descent plus binary search.
inline std::optional<Solution> solve_single_group(const std::vector<LinConstraint>& cs,
                                                  const std::vector<Term>& terms) {
    auto base = feasibility(cs);
    if (!base)
        return std::nullopt;
    // Make sure every term variable has a witness entry.
    Witness w0 = *base;
    for (const Term& t : terms) {
        w0.try_emplace(t.plus, 0);
        w0.try_emplace(t.minus, 0);
    }
    MaxGroup g{terms};
    Time hi = eval_group_max(g, w0);

    auto probe = [&](Time t) -> std::optional<Witness> {
        std::vector<LinConstraint> all = cs;
        for (const Term& tm : terms)
            all.push_back(diff_le(tm.plus, tm.minus, t - tm.constant));
        return feasibility(all);
    };

    Time lo = hi;
    Time step = 1;
    std::optional<Witness> best = w0;
    for (int guard = 0;; ++guard) {
        if (guard > 60)
            throw std::runtime_error("objective unbounded below");
        auto w = probe(lo - step);
        if (!w)
            break;
        lo -= step;
        best = std::move(w);
        step *= 2;
    }
    // Invariant: feasible at lo, infeasible at lo - step.
    Time bad = lo - step;
    while (bad + 1 < lo) {
        Time mid = bad + (lo - bad) / 2;
        auto w = probe(mid);
        if (w) {
            lo = mid;
            best = std::move(w);
        } else {
            bad = mid;
        }
    }
    Witness w = *best;
    for (const Term& t : terms) {
        w.try_emplace(t.plus, 0);
        w.try_emplace(t.minus, 0);
    }
    return Solution{eval_group_max(g, w), std::move(w)};
}

} // namespace detail

/// Exact min of the objective over the constraint system, with an integral
/// witness. Objectives whose groups collapse to single terms and objectives
/// with one max group are solved exactly over the integers; the general
/// sum-of-groups case returns the value realized by an integral witness
/// obtained from the rational optimum (floored, which preserves feasibility
/// because all bounds are integers).
inline std::optional<Solution> solve_min_max(const std::vector<LinConstraint>& cs,
                                             const MinMaxObjective& objective) {
    for (const MaxGroup& g : objective.max_groups)
        if (g.terms.empty())
            throw std::invalid_argument("empty objective group");
    for (const MaxGroup& g : objective.min_groups)
        if (g.terms.empty())
            throw std::invalid_argument("empty objective group");

    std::vector<std::vector<Term>> maxg, ming;
    for (const MaxGroup& g : objective.max_groups)
        maxg.push_back(detail::collapse_terms(g.terms, true));
    for (const MaxGroup& g : objective.min_groups)
        ming.push_back(detail::collapse_terms(g.terms, false));

    if (maxg.empty() && ming.empty()) {
        auto w = feasibility(cs);
        if (!w)
            return std::nullopt;
        return Solution{0, std::move(*w)};
    }

    if (maxg.size() == 1 && ming.empty() && maxg[0].size() > 1)
        return detail::solve_single_group(cs, maxg[0]);

    bool all_single = true;
    for (auto& g : maxg)
        all_single = all_single && g.size() == 1;
    for (auto& g : ming)
        all_single = all_single && g.size() == 1;

    // Assemble the LP: variables are the structural VarIds plus one
    // auxiliary per multi-term group.
    std::map<VarId, int> ix;
    auto var = [&](VarId v) {
        auto it = ix.find(v);
        if (it != ix.end())
            return it->second;
        int j = int(ix.size());
        ix.emplace(v, j);
        return j;
    };
    for (const LinConstraint& c : cs) {
        if (c.plus)
            var(*c.plus);
        if (c.minus)
            var(*c.minus);
    }
    for (auto* side : {&maxg, &ming})
        for (auto& g : *side)
            for (const Term& t : g) {
                var(t.plus);
                var(t.minus);
            }

    detail::Rat const_off = 0;
    int naux = 0;

    detail::SimplexLp builder;
    auto add_row = [&](std::vector<std::pair<int, detail::Rat>> row, detail::Rat b) {
        builder.rows.push_back(std::move(row));
        builder.rhs.push_back(std::move(b));
    };
    for (const LinConstraint& c : cs) {
        std::vector<std::pair<int, detail::Rat>> row;
        if (c.plus)
            row.emplace_back(var(*c.plus), 1);
        if (c.minus)
            row.emplace_back(var(*c.minus), -1);
        add_row(std::move(row), detail::Rat(c.bound));
    }
    std::vector<detail::Rat> cost;
    auto ensure_cost = [&](int n) {
        if (int(cost.size()) < n)
            cost.resize(n, 0);
    };
    auto aux_col = [&]() {
        int j = int(ix.size()) + naux;
        ++naux;
        return j;
    };
    for (auto& g : maxg) {
        if (g.size() == 1) {
            const Term& t = g[0];
            ensure_cost(int(ix.size()));
            cost[var(t.plus)] += 1;
            cost[var(t.minus)] -= 1;
            const_off += t.constant;
        } else {
            int m = aux_col();
            ensure_cost(m + 1);
            cost[m] += 1;
            for (const Term& t : g) // x_p - x_m - M <= -const
                add_row({{var(t.plus), 1}, {var(t.minus), -1}, {m, -1}},
                        detail::Rat(-t.constant));
        }
    }
    for (auto& g : ming) {
        if (g.size() == 1) {
            const Term& t = g[0];
            ensure_cost(int(ix.size()));
            cost[var(t.plus)] -= 1;
            cost[var(t.minus)] += 1;
            const_off -= t.constant;
        } else {
            int m = aux_col();
            ensure_cost(m + 1);
            cost[m] -= 1;
            for (const Term& t : g) // m - x_p + x_m <= const
                add_row({{m, 1}, {var(t.plus), -1}, {var(t.minus), 1}},
                        detail::Rat(t.constant));
        }
    }
    builder.nvars = int(ix.size()) + naux;
    ensure_cost(builder.nvars);
    builder.cost = cost;

    auto res = builder.solve();
    if (!res.feasible)
        return std::nullopt;

    Witness w;
    for (auto& [v, j] : ix)
        w[v] = detail::rat_floor(res.x[j]);
    Solution sol;
    sol.witness = std::move(w);
    sol.value = eval_objective(objective, sol.witness);
    if (all_single) {
        // Linear objective over a totally unimodular system: the simplex
        // vertex is integral and the floored witness realizes the optimum.
        detail::Rat expect = res.value + const_off;
        if (detail::Rat(sol.value) != expect)
            throw std::runtime_error("integral optimum mismatch");
    }
    return sol;
}

} // namespace flet
