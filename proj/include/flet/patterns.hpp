#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "flet/linear_system.hpp"
#include "flet/response_time.hpp"
#include "flet/task_model.hpp"

namespace flet {

enum class PatternKind { LastReading, FirstReacting };

/// One edge communication pattern: the job map over a super-period together
/// with the raw breakpoint interval [shift_lo, shift_hi) of the shift
/// s = (O_j + ro_j) - (D_i + ro_i) that realizes it. Schedulability clipping
/// of the interval is left to the LP, which carries the box constraints.
struct EdgePattern {
    int edge_ix = 0;
    PatternKind kind = PatternKind::LastReading;
    Time shift_lo = 0;
    Time shift_hi = 0;
    // LastReading: job_map[q_j] = last-reading producer index for consumer
    // job q_j in [0, Hs/T_j). FirstReacting: job_map[q_i] = first-reacting
    // consumer index for producer job q_i in [0, Hs/T_i).
    std::vector<long long> job_map;
    long long partner_per_super = 0; // job count of the mapped-to task per Hs

    long long window() const { return (long long)job_map.size(); }

    // Periodic extension of the job map to any job index.
    long long map_at(long long q) const {
        long long w = window();
        long long cycle = floor_div(q, w);
        return job_map[q - cycle * w] + cycle * partner_per_super;
    }
};

struct EdgePatternSet {
    int edge_ix = 0;
    PatternKind kind = PatternKind::LastReading;
    Time granularity = 0;  // gcd of the two periods; intervals are g-aligned
    Time feasible_lo = 0;  // closed feasible shift range from Eq. boxes
    Time feasible_hi = 0;
    std::vector<EdgePattern> patterns; // descending shift order

    bool empty() const { return patterns.empty(); }

    /// Pattern whose raw interval contains the shift, if enumerated.
    const EdgePattern* containing(Time shift) const {
        for (const EdgePattern& p : patterns)
            if (p.shift_lo <= shift && shift < p.shift_hi)
                return &p;
        return nullptr;
    }
};

namespace detail {

inline EdgePattern make_edge_pattern(const TaskDag& dag, int edge_ix, PatternKind kind, Time k,
                                     Time g) {
    const Edge& e = dag.edges[edge_ix];
    const Task& prod = dag.task(e.from);
    const Task& cons = dag.task(e.to);
    Time hs = lcm_time(prod.period, cons.period);
    Time s0 = k * g;

    EdgePattern p;
    p.edge_ix = edge_ix;
    p.kind = kind;
    p.shift_lo = s0;
    p.shift_hi = s0 + g;
    if (kind == PatternKind::LastReading) {
        long long w = hs / cons.period;
        p.partner_per_super = hs / prod.period;
        p.job_map.reserve(w);
        for (long long q = 0; q < w; ++q)
            p.job_map.push_back(floor_div(s0 + q * cons.period, prod.period));
    } else {
        long long w = hs / prod.period;
        p.partner_per_super = hs / cons.period;
        p.job_map.reserve(w);
        for (long long q = 0; q < w; ++q)
            p.job_map.push_back(ceil_div(q * prod.period - s0, cons.period));
    }
    return p;
}

} // namespace detail

/// All edge patterns whose shift interval meets the feasible shift range
///   s in [-D_i^org, (D_j^org - R_j) - R_i]   (shifted by release offsets),
/// ordered by descending shift. The job map changes exactly at multiples of
/// gcd(T_i, T_j), so intervals are the g-aligned cells. For last-reading
/// patterns descending shift puts the largest job maps first; first-reacting
/// maps decrease with the shift, so the smallest maps come first.
inline EdgePatternSet enumerate_edge_patterns(const TaskDag& dag, const ResponseTimes& rt,
                                              int edge_ix, PatternKind kind) {
    const Edge& e = dag.edges[edge_ix];
    int pix = dag.index_of(e.from);
    int cix = dag.index_of(e.to);
    const Task& prod = dag.tasks[pix];
    const Task& cons = dag.tasks[cix];
    Time g = gcd_time(prod.period, cons.period);
    Time dro = cons.release_offset - prod.release_offset;

    EdgePatternSet set;
    set.edge_ix = edge_ix;
    set.kind = kind;
    set.granularity = g;
    set.feasible_lo = -prod.deadline_org + dro;
    set.feasible_hi = (cons.deadline_org - rt.r[cix]) - rt.r[pix] + dro;
    if (set.feasible_lo > set.feasible_hi)
        return set; // edge unsatisfiable: caller reports unschedulable

    Time k_hi = floor_div(set.feasible_hi, g);
    Time k_lo = floor_div(set.feasible_lo, g);
    for (Time k = k_hi; k >= k_lo; --k)
        set.patterns.push_back(detail::make_edge_pattern(dag, edge_ix, kind, k, g));
    return set;
}

/// Def-16-style comparison: every job map entry of `a` at most the
/// corresponding entry of `b`.
inline bool edge_pattern_leq(const EdgePattern& a, const EdgePattern& b) {
    if (a.edge_ix != b.edge_ix || a.kind != b.kind)
        throw std::invalid_argument("edge pattern comparison across edges or kinds");
    if (a.job_map.size() != b.job_map.size())
        throw std::invalid_argument("edge pattern window mismatch");
    for (std::size_t i = 0; i < a.job_map.size(); ++i)
        if (a.job_map[i] > b.job_map[i])
            return false;
    return true;
}

/// A (possibly partial) graph pattern: one edge pattern per covered edge.
struct GraphPattern {
    PatternKind kind = PatternKind::LastReading;
    std::map<int, EdgePattern> edges; // by dag edge index

    bool covers(int edge_ix) const { return edges.count(edge_ix) != 0; }
};

inline bool graph_pattern_leq(const GraphPattern& a, const GraphPattern& b) {
    if (a.kind != b.kind)
        throw std::invalid_argument("graph pattern comparison across kinds");
    if (a.edges.size() != b.edges.size())
        throw std::invalid_argument("graph pattern comparison needs equal edge sets");
    for (auto& [ix, pa] : a.edges) {
        auto it = b.edges.find(ix);
        if (it == b.edges.end())
            throw std::invalid_argument("graph pattern comparison needs equal edge sets");
        if (!edge_pattern_leq(pa, it->second))
            return false;
    }
    return true;
}

/// inner is contained in outer iff every edge assigned in inner is assigned
/// identically in outer.
inline bool contains(const GraphPattern& inner, const GraphPattern& outer) {
    if (inner.kind != outer.kind)
        throw std::invalid_argument("containment across kinds");
    for (auto& [ix, p] : inner.edges) {
        auto it = outer.edges.find(ix);
        if (it == outer.edges.end())
            return false;
        if (it->second.shift_lo != p.shift_lo || it->second.shift_hi != p.shift_hi)
            return false;
    }
    return true;
}

/// Box constraints 0 <= O_i, O_i + R_i <= D_i, D_i <= D_i^org.
inline void add_schedulability_constraints(const TaskDag& dag, const ResponseTimes& rt,
                                           const std::vector<int>& task_ixs,
                                           std::vector<LinConstraint>& out) {
    for (int ix : task_ixs) {
        out.push_back(lower(offset_var(ix), 0));
        out.push_back(diff_le(offset_var(ix), deadline_var(ix), -rt.r[ix]));
        out.push_back(upper(deadline_var(ix), dag.tasks[ix].deadline_org));
    }
}

/// Two difference constraints per covered edge pinning the shift to the
/// pattern interval: lo <= (O_j - D_i) + dro <= hi - 1 on the integer grid.
inline void add_pattern_constraints(const TaskDag& dag, const GraphPattern& p,
                                    std::vector<LinConstraint>& out) {
    for (auto& [edge_ix, ep] : p.edges) {
        const Edge& e = dag.edges[edge_ix];
        int pix = dag.index_of(e.from);
        int cix = dag.index_of(e.to);
        Time dro = dag.tasks[cix].release_offset - dag.tasks[pix].release_offset;
        out.push_back(diff_le(offset_var(cix), deadline_var(pix), ep.shift_hi - 1 - dro));
        out.push_back(diff_le(deadline_var(pix), offset_var(cix), -(ep.shift_lo - dro)));
    }
}

inline std::vector<int> pattern_task_ixs(const TaskDag& dag, const GraphPattern& p) {
    std::vector<int> ixs;
    auto add = [&](int ix) {
        if (std::find(ixs.begin(), ixs.end(), ix) == ixs.end())
            ixs.push_back(ix);
    };
    for (auto& [edge_ix, ep] : p.edges) {
        add(dag.index_of(dag.edges[edge_ix].from));
        add(dag.index_of(dag.edges[edge_ix].to));
    }
    return ixs;
}

/// Feasibility of a (partial) graph pattern under the schedulability boxes;
/// returns a full witness assignment (uncovered tasks at default LET).
inline std::optional<Assignment> feasible(const TaskDag& dag, const ResponseTimes& rt,
                                          const GraphPattern& p) {
    std::vector<LinConstraint> cs;
    std::vector<int> ixs = pattern_task_ixs(dag, p);
    add_schedulability_constraints(dag, rt, ixs, cs);
    add_pattern_constraints(dag, p, cs);
    auto w = feasibility(cs);
    if (!w)
        return std::nullopt;
    Assignment a = default_let(dag);
    for (int ix : ixs) {
        a.offset[ix] = w->at(offset_var(ix));
        a.deadline[ix] = w->at(deadline_var(ix));
    }
    return a;
}

inline Time realized_shift(const TaskDag& dag, const Assignment& a, int edge_ix) {
    const Edge& e = dag.edges[edge_ix];
    int pix = dag.index_of(e.from);
    int cix = dag.index_of(e.to);
    return (a.offset[cix] + dag.tasks[cix].release_offset) -
           (a.deadline[pix] + dag.tasks[pix].release_offset);
}

/// The edge pattern realized by a concrete assignment.
inline EdgePattern realized_edge_pattern(const TaskDag& dag, const Assignment& a, int edge_ix,
                                         PatternKind kind) {
    const Edge& e = dag.edges[edge_ix];
    Time g = gcd_time(dag.task(e.from).period, dag.task(e.to).period);
    Time k = floor_div(realized_shift(dag, a, edge_ix), g);
    return detail::make_edge_pattern(dag, edge_ix, kind, k, g);
}

/// Debug dump of one edge's pattern table: raw interval plus job pairs.
inline void dump_pattern_table(const TaskDag& dag, const EdgePatternSet& set, std::ostream& os) {
    const Edge& e = dag.edges[set.edge_ix];
    os << "edge " << e.from << "->" << e.to << " (" << (set.kind == PatternKind::LastReading ? "last-reading" : "first-reacting")
       << "), feasible shift [" << set.feasible_lo << ", " << set.feasible_hi << "]\n";
    for (std::size_t n = 0; n < set.patterns.size(); ++n) {
        const EdgePattern& p = set.patterns[n];
        os << "  [" << n << "] " << "D_" << e.from << (p.shift_lo >= 0 ? "+" : "")
           << p.shift_lo << " <= O_" << e.to << " < D_" << e.from << (p.shift_hi >= 0 ? "+" : "")
           << p.shift_hi << " :";
        for (long long q = 0; q < p.window(); ++q) {
            if (set.kind == PatternKind::LastReading)
                os << "  J(" << e.from << "," << p.job_map[q] << ")->J(" << e.to << "," << q << ")";
            else
                os << "  J(" << e.from << "," << q << ")->J(" << e.to << "," << p.job_map[q] << ")";
        }
        os << '\n';
    }
}

} // namespace flet
