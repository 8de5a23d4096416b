#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flet/chain_metrics.hpp"
#include "flet/linear_system.hpp"
#include "flet/patterns.hpp"
#include "flet/response_time.hpp"
#include "flet/task_model.hpp"

namespace flet {

enum class SearchMethod { Enumerate, Backtrack, Symbolic };

struct SearchConfig {
    SearchMethod method = SearchMethod::Symbolic;
    ObjectiveSpec objective;
    double time_limit_s = 1e9;
    int fifo_capacity = 50;
    std::function<void(const std::string&)> log; // optional progress sink
};

struct Counters {
    long long combinations_total = 0; // saturated product of per-edge counts
    long long evaluated = 0;          // complete patterns solved by LP
    long long pruned_infeasible = 0;
    long long pruned_dominated = 0;
};

struct OptimizationResult {
    bool found = false;
    Assignment assignment;
    GraphPattern pattern;
    Time objective = 0;           // sum over chains (DART) or merges (TD)
    std::vector<Time> per_chain;  // per chain values (DART)
    std::vector<Time> per_merge_td;
    std::vector<Time> per_merge_jitter;
    Time bound_total = 0; // suboptimality bound, symbolic DART only
    std::vector<Time> bound_per_chain;
    Counters counters;
    bool timed_out = false;
    bool refined = false;
    double runtime_s = 0.0;
};

namespace detail {

class Deadline {
public:
    explicit Deadline(double seconds)
        : end_(std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                      std::chrono::duration<double>(seconds))) {}
    bool expired() const { return std::chrono::steady_clock::now() >= end_; }

private:
    std::chrono::steady_clock::time_point end_;
};

/// Shared state for one optimization run over one relevant-edge set.
struct SearchSpace {
    const TaskDag* dag = nullptr;
    const ResponseTimes* rt = nullptr;
    Metric metric = Metric::DataAge;
    PatternKind kind = PatternKind::LastReading;

    std::vector<int> edge_order;        // dag edge indices, sources first
    std::vector<EdgePatternSet> sets;   // aligned with edge_order
    std::vector<int> involved;          // task indices
    std::vector<LinConstraint> boxes;

    // Chains as index sequences plus, per chain, the position (into
    // edge_order) of each of its edges.
    struct ChainInfo {
        Chain chain;
        std::vector<int> edge_pos;
    };
    std::vector<ChainInfo> chains; // chains for DART, merge groups for TD
    std::vector<Merge> merges;

    mutable std::map<std::pair<int, std::vector<Time>>, Time> const_cache;

    bool unschedulable_edge = false;

    long long combinations() const {
        long long total = 1;
        for (const EdgePatternSet& s : sets) {
            long long n = (long long)s.patterns.size();
            if (n == 0)
                return 0;
            if (total > std::numeric_limits<long long>::max() / n)
                return std::numeric_limits<long long>::max();
            total *= n;
        }
        return total;
    }
};

inline std::vector<int> chain_edge_indices(const TaskDag& dag, const Chain& c) {
    std::vector<int> out;
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        out.push_back(dag.edge_index(c[i], c[i + 1]));
    return out;
}

inline SearchSpace build_space(const TaskDag& dag, const ResponseTimes& rt, Metric metric) {
    SearchSpace sp;
    sp.dag = &dag;
    sp.rt = &rt;
    sp.metric = metric;
    sp.kind = metric == Metric::ReactionTime ? PatternKind::FirstReacting : PatternKind::LastReading;

    // Relevant edges: those appearing in the objective, ordered closest to
    // the chain sources first (minimum source distance, tie by edge index).
    std::map<int, int> dist;
    if (metric == Metric::TimeDisparity) {
        for (const Merge& m : dag.merges)
            for (int src : m.sources)
                dist.try_emplace(dag.edge_index(src, m.sink), 0);
    } else {
        for (const Chain& c : dag.chains) {
            std::vector<int> eix = chain_edge_indices(dag, c);
            for (std::size_t i = 0; i < eix.size(); ++i) {
                auto [it, fresh] = dist.try_emplace(eix[i], int(i));
                if (!fresh)
                    it->second = std::min(it->second, int(i));
            }
        }
    }
    std::vector<std::pair<int, int>> order; // (dist, edge_ix)
    for (auto& [e, d] : dist)
        order.emplace_back(d, e);
    std::sort(order.begin(), order.end());
    for (auto& [d, e] : order)
        sp.edge_order.push_back(e);

    for (int e : sp.edge_order) {
        sp.sets.push_back(enumerate_edge_patterns(dag, rt, e, sp.kind));
        if (sp.sets.back().empty())
            sp.unschedulable_edge = true;
    }

    auto add_task = [&](int ix) {
        if (std::find(sp.involved.begin(), sp.involved.end(), ix) == sp.involved.end())
            sp.involved.push_back(ix);
    };
    for (int e : sp.edge_order) {
        add_task(dag.index_of(dag.edges[e].from));
        add_task(dag.index_of(dag.edges[e].to));
    }
    if (metric == Metric::TimeDisparity) {
        sp.merges = dag.merges;
        for (const Merge& m : dag.merges) {
            add_task(dag.index_of(m.sink));
            for (int s : m.sources)
                add_task(dag.index_of(s));
        }
    } else {
        for (const Chain& c : dag.chains) {
            SearchSpace::ChainInfo ci;
            ci.chain = c;
            for (int e : chain_edge_indices(dag, c)) {
                auto it = std::find(sp.edge_order.begin(), sp.edge_order.end(), e);
                ci.edge_pos.push_back(int(it - sp.edge_order.begin()));
            }
            for (int id : c)
                add_task(dag.index_of(id));
            sp.chains.push_back(std::move(ci));
        }
    }
    add_schedulability_constraints(dag, rt, sp.involved, sp.boxes);
    return sp;
}

/// Longest covered source-anchored prefix of a chain (number of covered
/// leading edges); single-task chains are always fully covered.
inline int covered_prefix_edges(const SearchSpace& sp, const SearchSpace::ChainInfo& ci,
                                const GraphPattern& p) {
    int n = 0;
    for (int pos : ci.edge_pos) {
        if (!p.covers(sp.edge_order[pos]))
            break;
        ++n;
    }
    return n;
}

/// Worst-case window constant of a covered prefix: the job-map composition
/// term max_q (q*T_sink - q0(q)*T_source) plus release-offset skew. The
/// prefix data-age (reaction-time) then equals D_sink - O_source + K.
inline Time prefix_const(const SearchSpace& sp, int chain_index, int covered_edges,
                         const GraphPattern& p) {
    const TaskDag& dag = *sp.dag;
    const SearchSpace::ChainInfo& ci = sp.chains[chain_index];
    std::vector<Time> key;
    key.reserve(covered_edges);
    for (int i = 0; i < covered_edges; ++i)
        key.push_back(p.edges.at(sp.edge_order[ci.edge_pos[i]]).shift_lo);
    auto cached = sp.const_cache.find({chain_index, key});
    if (cached != sp.const_cache.end())
        return cached->second;

    std::vector<int> tasks(ci.chain.begin(), ci.chain.begin() + covered_edges + 1);
    Time h = hyper_period(dag, tasks);
    const Task& src = dag.task(tasks.front());
    const Task& snk = dag.task(tasks.back());

    Time best = std::numeric_limits<Time>::min();
    if (sp.metric == Metric::ReactionTime) {
        long long window = h / src.period;
        for (long long q0 = 0; q0 < window; ++q0) {
            long long q = q0;
            for (int i = 0; i < covered_edges; ++i)
                q = p.edges.at(sp.edge_order[ci.edge_pos[i]]).map_at(q);
            best = std::max(best, q * snk.period - q0 * src.period);
        }
    } else {
        long long window = h / snk.period;
        for (long long qn = 0; qn < window; ++qn) {
            long long q = qn;
            for (int i = covered_edges - 1; i >= 0; --i)
                q = p.edges.at(sp.edge_order[ci.edge_pos[i]]).map_at(q);
            best = std::max(best, qn * snk.period - q * src.period);
        }
    }
    best += snk.release_offset - src.release_offset;
    sp.const_cache.emplace(std::make_pair(chain_index, std::move(key)), best);
    return best;
}

struct MergeGroup {
    int merge_index = 0;
    MaxGroup group; // pairwise write-time differences over the sink window
};

/// TD objective groups for all merges fully covered by the pattern.
inline std::vector<MergeGroup> merge_groups(const SearchSpace& sp, const GraphPattern& p) {
    const TaskDag& dag = *sp.dag;
    std::vector<MergeGroup> out;
    for (std::size_t mi = 0; mi < sp.merges.size(); ++mi) {
        const Merge& m = sp.merges[mi];
        if (m.sources.size() < 2)
            continue; // disparity identically zero
        bool covered = true;
        for (int src : m.sources)
            if (!p.covers(dag.edge_index(src, m.sink)))
                covered = false;
        if (!covered)
            continue;
        std::vector<int> all = m.sources;
        all.push_back(m.sink);
        Time h = hyper_period(dag, all);
        long long window = h / dag.task(m.sink).period;
        MergeGroup g;
        g.merge_index = int(mi);
        for (long long q = 0; q < window; ++q) {
            for (int u : m.sources)
                for (int w : m.sources) {
                    if (u == w)
                        continue;
                    const EdgePattern& pu = p.edges.at(dag.edge_index(u, m.sink));
                    const EdgePattern& pw = p.edges.at(dag.edge_index(w, m.sink));
                    int uix = dag.index_of(u);
                    int wix = dag.index_of(w);
                    Time cu = pu.map_at(q) * dag.tasks[uix].period + dag.tasks[uix].release_offset;
                    Time cw = pw.map_at(q) * dag.tasks[wix].period + dag.tasks[wix].release_offset;
                    g.group.terms.push_back({deadline_var(uix), deadline_var(wix), cu - cw});
                }
        }
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace detail

struct PatternEval {
    Time total = 0;
    std::vector<Time> per_chain; // chains (DART) or merge disparities (TD)
    Assignment assignment;
};

/// Def-15 evaluation of a (possibly partial) pattern: the minimum of the
/// objective restricted to the pattern's constraints, with a witness.
/// Chains whose source-anchored prefix is uncovered score 0.
inline std::optional<PatternEval> evaluate_pattern_in_space(const detail::SearchSpace& sp,
                                                            const GraphPattern& p) {
    const TaskDag& dag = *sp.dag;
    std::vector<LinConstraint> cs = sp.boxes;
    // Patterns may cover edges beyond the objective-relevant set; their
    // endpoints still need boxes and witness entries.
    std::vector<int> involved = sp.involved;
    for (int ix : pattern_task_ixs(dag, p))
        if (std::find(involved.begin(), involved.end(), ix) == involved.end()) {
            involved.push_back(ix);
            add_schedulability_constraints(dag, *sp.rt, {ix}, cs);
        }
    add_pattern_constraints(dag, p, cs);

    MinMaxObjective obj;
    std::vector<int> chain_of_group; // chain/merge index per group
    if (sp.metric == Metric::TimeDisparity) {
        for (auto& mg : detail::merge_groups(sp, p)) {
            obj.max_groups.push_back(mg.group);
            chain_of_group.push_back(mg.merge_index);
        }
    } else {
        for (std::size_t c = 0; c < sp.chains.size(); ++c) {
            int covered = detail::covered_prefix_edges(sp, sp.chains[c], p);
            if (covered == 0 && sp.chains[c].chain.size() > 1)
                continue; // source not covered: scores 0
            int src = dag.index_of(sp.chains[c].chain.front());
            int snk = dag.index_of(sp.chains[c].chain[covered]);
            Time k = detail::prefix_const(sp, int(c), covered, p);
            obj.max_groups.push_back({{Term{deadline_var(snk), offset_var(src), k}}});
            chain_of_group.push_back(int(c));
        }
    }

    auto sol = solve_min_max(cs, obj);
    if (!sol)
        return std::nullopt;

    PatternEval ev;
    ev.assignment = default_let(dag);
    for (int ix : involved) {
        ev.assignment.offset[ix] = sol->witness.at(offset_var(ix));
        ev.assignment.deadline[ix] = sol->witness.at(deadline_var(ix));
    }
    std::size_t n = sp.metric == Metric::TimeDisparity ? sp.merges.size() : sp.chains.size();
    ev.per_chain.assign(n, 0);
    for (std::size_t gi = 0; gi < obj.max_groups.size(); ++gi)
        ev.per_chain[chain_of_group[gi]] = eval_group_max(obj.max_groups[gi], sol->witness);
    ev.total = 0;
    for (Time v : ev.per_chain)
        ev.total += v;
    return ev;
}

/// Public Def-15 evaluation against a caller-supplied pattern.
inline std::optional<PatternEval> evaluate_pattern(const TaskDag& dag, const ResponseTimes& rt,
                                                   const GraphPattern& p, Metric metric) {
    if (metric == Metric::ReactionTime && p.kind != PatternKind::FirstReacting)
        throw std::invalid_argument("reaction time needs a first-reacting pattern");
    if (metric != Metric::ReactionTime && p.kind != PatternKind::LastReading)
        throw std::invalid_argument("data age / disparity need a last-reading pattern");
    detail::SearchSpace sp = detail::build_space(dag, rt, metric);
    return evaluate_pattern_in_space(sp, p);
}

namespace detail {

/// The pattern realized by the default LET assignment, always feasible for a
/// schedulable task set; evaluated first by every search method.
inline GraphPattern default_pattern(const SearchSpace& sp) {
    GraphPattern p;
    p.kind = sp.kind;
    const TaskDag& dag = *sp.dag;
    Assignment def = default_let(dag);
    for (std::size_t i = 0; i < sp.edge_order.size(); ++i) {
        int e = sp.edge_order[i];
        const EdgePattern* ep = sp.sets[i].containing(realized_shift(dag, def, e));
        if (!ep)
            throw std::logic_error("default pattern outside enumerated range");
        p.edges.emplace(e, *ep);
    }
    return p;
}

struct BestTracker {
    bool found = false;
    Time total = 0;
    std::vector<Time> per_chain;
    GraphPattern pattern;
    Assignment assignment;

    bool offer(const GraphPattern& p, const PatternEval& ev) {
        if (found && ev.total >= total)
            return false;
        found = true;
        total = ev.total;
        per_chain = ev.per_chain;
        pattern = p;
        assignment = ev.assignment;
        return true;
    }
};

inline void finish_result(const SearchSpace& sp, const BestTracker& best, OptimizationResult& out) {
    out.found = best.found;
    if (best.found) {
        out.assignment = best.assignment;
        out.pattern = best.pattern;
        out.objective = best.total;
        out.per_chain = best.per_chain;
    }
}

inline std::vector<Time> pattern_shifts(const SearchSpace& sp, const GraphPattern& p) {
    std::vector<Time> s;
    s.reserve(sp.edge_order.size());
    for (int e : sp.edge_order)
        s.push_back(p.edges.at(e).shift_lo);
    return s;
}

} // namespace detail

/// Exhaustive evaluation of the pattern product (Theorem-3 exact).
inline OptimizationResult optimize_enumerate(const TaskDag& dag, const ResponseTimes& rt,
                                             Metric metric, const SearchConfig& cfg = {}) {
    auto t0 = std::chrono::steady_clock::now();
    detail::Deadline deadline(cfg.time_limit_s);
    detail::SearchSpace sp = detail::build_space(dag, rt, metric);
    OptimizationResult out;
    out.counters.combinations_total = sp.combinations();
    detail::BestTracker best;
    if (sp.unschedulable_edge)
        throw UnschedulableError(-1);

    GraphPattern def = detail::default_pattern(sp);
    std::vector<Time> def_shifts = detail::pattern_shifts(sp, def);
    if (auto ev = evaluate_pattern_in_space(sp, def)) {
        ++out.counters.evaluated;
        best.offer(def, *ev);
    }

    std::vector<std::size_t> pick(sp.sets.size(), 0);
    bool done = sp.sets.empty();
    while (!done) {
        if (deadline.expired()) {
            out.timed_out = true;
            break;
        }
        GraphPattern p;
        p.kind = sp.kind;
        for (std::size_t i = 0; i < sp.sets.size(); ++i)
            p.edges.emplace(sp.edge_order[i], sp.sets[i].patterns[pick[i]]);
        std::vector<LinConstraint> cs = sp.boxes;
        add_pattern_constraints(dag, p, cs);
        if (detail::pattern_shifts(sp, p) == def_shifts) {
            // already evaluated up front
        } else if (!feasibility(cs)) {
            ++out.counters.pruned_infeasible;
        } else if (auto ev = evaluate_pattern_in_space(sp, p)) {
            ++out.counters.evaluated;
            best.offer(p, *ev);
        } else {
            ++out.counters.pruned_infeasible;
        }
        // Advance the odometer.
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < sp.sets[i].patterns.size())
                break;
            pick[i] = 0;
        }
        done = i == pick.size();
        if (cfg.log && out.counters.evaluated % 1000 == 0 && out.counters.evaluated > 0) {
            std::ostringstream os;
            os << "enumerate: evaluated " << out.counters.evaluated;
            cfg.log(os.str());
        }
    }
    detail::finish_result(sp, best, out);
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

/// Depth-first search with feasibility pruning of partial patterns; finds
/// the same optimum as enumeration.
inline OptimizationResult optimize_backtrack(const TaskDag& dag, const ResponseTimes& rt,
                                             Metric metric, const SearchConfig& cfg = {}) {
    auto t0 = std::chrono::steady_clock::now();
    detail::Deadline deadline(cfg.time_limit_s);
    detail::SearchSpace sp = detail::build_space(dag, rt, metric);
    OptimizationResult out;
    out.counters.combinations_total = sp.combinations();
    detail::BestTracker best;
    if (sp.unschedulable_edge)
        throw UnschedulableError(-1);

    GraphPattern def = detail::default_pattern(sp);
    std::vector<Time> def_shifts = detail::pattern_shifts(sp, def);
    if (auto ev = evaluate_pattern_in_space(sp, def)) {
        ++out.counters.evaluated;
        best.offer(def, *ev);
    }

    GraphPattern cur;
    cur.kind = sp.kind;
    std::vector<LinConstraint> cs = sp.boxes;

    std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
        if (out.timed_out)
            return;
        if (deadline.expired()) {
            out.timed_out = true;
            return;
        }
        if (depth == sp.sets.size()) {
            if (detail::pattern_shifts(sp, cur) == def_shifts)
                return; // already evaluated up front
            if (auto ev = evaluate_pattern_in_space(sp, cur)) {
                ++out.counters.evaluated;
                best.offer(cur, *ev);
            } else {
                ++out.counters.pruned_infeasible;
            }
            return;
        }
        for (const EdgePattern& ep : sp.sets[depth].patterns) {
            cur.edges.emplace(sp.edge_order[depth], ep);
            std::size_t mark = cs.size();
            GraphPattern one;
            one.kind = sp.kind;
            one.edges.emplace(sp.edge_order[depth], ep);
            add_pattern_constraints(dag, one, cs);
            if (feasibility(cs))
                dfs(depth + 1);
            else
                ++out.counters.pruned_infeasible;
            cs.resize(mark);
            cur.edges.erase(sp.edge_order[depth]);
            if (out.timed_out)
                return;
        }
    };
    if (!sp.sets.empty())
        dfs(0);
    else if (!best.found) {
        // no relevant edges at all: the default pattern evaluation above
        // already covers single-task chains
    }
    detail::finish_result(sp, best, out);
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

/// Symbolic dominance-pruned search for data age or reaction time with the
/// bounded-suboptimality guarantee sum_C (T_sink + T_source).
inline OptimizationResult optimize_symbolic(const TaskDag& dag, const ResponseTimes& rt,
                                            Metric metric, const SearchConfig& cfg = {}) {
    if (metric == Metric::TimeDisparity)
        throw std::invalid_argument("symbolic search supports data age and reaction time only");
    auto t0 = std::chrono::steady_clock::now();
    detail::Deadline deadline(cfg.time_limit_s);
    detail::SearchSpace sp = detail::build_space(dag, rt, metric);
    OptimizationResult out;
    out.counters.combinations_total = sp.combinations();
    detail::BestTracker best;
    if (sp.unschedulable_edge)
        throw UnschedulableError(-1);

    for (const auto& ci : sp.chains) {
        Time b = dag.task(ci.chain.front()).period + dag.task(ci.chain.back()).period;
        out.bound_per_chain.push_back(b);
        out.bound_total += b;
    }

    const Time kInf = std::numeric_limits<Time>::max() / 4;
    std::vector<Time> best_yet(sp.chains.size(), kInf);

    GraphPattern def = detail::default_pattern(sp);
    std::vector<Time> def_shifts = detail::pattern_shifts(sp, def);
    if (auto ev = evaluate_pattern_in_space(sp, def)) {
        ++out.counters.evaluated;
        best.offer(def, *ev);
        best_yet = ev->per_chain;
    }

    // worsePatterns FIFO: shift_lo per edge position for the covered prefix.
    std::deque<std::vector<Time>> worse;
    const std::size_t capacity = std::size_t(std::max(1, cfg.fifo_capacity));

    GraphPattern cur;
    cur.kind = sp.kind;
    std::vector<LinConstraint> cs = sp.boxes;
    std::vector<Time> chosen; // shift_lo per covered edge position

    // In shift space the worse side is the same for both kinds: lower shift
    // means a smaller last-reading map (older data) and a larger
    // first-reacting map (later reaction).

    auto lower_bounds = [&](const GraphPattern& p, const std::vector<LinConstraint>& all) {
        DiffGraph g(all);
        std::vector<Time> lb(sp.chains.size(), 0);
        for (std::size_t c = 0; c < sp.chains.size(); ++c) {
            int covered = detail::covered_prefix_edges(sp, sp.chains[c], p);
            if (covered == 0 && sp.chains[c].chain.size() > 1)
                continue;
            int src = dag.index_of(sp.chains[c].chain.front());
            int snk = dag.index_of(sp.chains[c].chain[covered]);
            Time k = detail::prefix_const(sp, int(c), covered, p);
            auto up = g.max_difference(offset_var(src), deadline_var(snk));
            lb[c] = up ? k - *up : -kInf;
        }
        return lb;
    };

    std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
        if (out.timed_out)
            return;
        if (deadline.expired()) {
            out.timed_out = true;
            return;
        }
        if (depth == sp.sets.size()) {
            if (detail::pattern_shifts(sp, cur) == def_shifts)
                return; // already evaluated up front
            if (auto ev = evaluate_pattern_in_space(sp, cur)) {
                ++out.counters.evaluated;
                if (best.offer(cur, *ev))
                    best_yet = ev->per_chain;
            } else {
                ++out.counters.pruned_infeasible;
            }
            return;
        }
        std::deque<const EdgePattern*> list;
        for (const EdgePattern& ep : sp.sets[depth].patterns)
            list.push_back(&ep);
        while (!list.empty() && !out.timed_out) {
            const EdgePattern* ep = list.front();
            list.pop_front();
            cur.edges.emplace(sp.edge_order[depth], *ep);
            chosen.push_back(ep->shift_lo);
            std::size_t mark = cs.size();
            GraphPattern one;
            one.kind = sp.kind;
            one.edges.emplace(sp.edge_order[depth], *ep);
            add_pattern_constraints(dag, one, cs);
            if (!feasibility(cs)) {
                ++out.counters.pruned_infeasible;
            } else {
                std::vector<Time> obj = lower_bounds(cur, cs);
                bool dominated = true;
                for (std::size_t c = 0; c < obj.size(); ++c)
                    if (obj[c] < best_yet[c]) {
                        dominated = false;
                        break;
                    }
                if (dominated) {
                    ++out.counters.pruned_dominated;
                    worse.push_back(chosen);
                    if (worse.size() > capacity)
                        worse.pop_front();
                } else {
                    dfs(depth + 1);
                }
                // RemoveWorseELP: drop unvisited sibling patterns whose
                // partial pattern would be dominated by a stored one.
                if (!list.empty() && !worse.empty()) {
                    std::deque<const EdgePattern*> keep;
                    for (const EdgePattern* cand : list) {
                        bool drop = false;
                        for (const std::vector<Time>& w : worse) {
                            if (w.size() != depth + 1)
                                continue;
                            bool cmp = true;
                            for (std::size_t i = 0; i < depth && cmp; ++i)
                                cmp = chosen[i] <= w[i];
                            if (cmp && cand->shift_lo <= w[depth]) {
                                drop = true;
                                break;
                            }
                        }
                        if (drop)
                            ++out.counters.pruned_dominated;
                        else
                            keep.push_back(cand);
                    }
                    list.swap(keep);
                }
            }
            cs.resize(mark);
            chosen.pop_back();
            cur.edges.erase(sp.edge_order[depth]);
        }
    };
    if (!sp.sets.empty())
        dfs(0);
    detail::finish_result(sp, best, out);
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

/// Time-disparity + weighted-jitter optimization: backtracking over the
/// merge edges, disparity-only LP per feasible pattern, realized jitter from
/// the witness, selection by sum of (max TD + omega * jitter).
inline OptimizationResult optimize_td_jitter(const TaskDag& dag, const ResponseTimes& rt,
                                             JitterWeight omega, const SearchConfig& cfg = {}) {
    if (dag.merges.empty())
        throw std::invalid_argument("time-disparity optimization needs merges");
    auto t0 = std::chrono::steady_clock::now();
    detail::Deadline deadline(cfg.time_limit_s);
    detail::SearchSpace sp = detail::build_space(dag, rt, Metric::TimeDisparity);
    OptimizationResult out;
    out.counters.combinations_total = sp.combinations();
    if (sp.unschedulable_edge)
        throw UnschedulableError(-1);

    struct TdBest {
        bool found = false;
        // exact comparison of td + omega*jitter via cross-multiplication
        Time score_num = 0;
        GraphPattern pattern;
        Assignment assignment;
        Time td_total = 0, jitter_total = 0;
        std::vector<Time> td, jitter;
    } best;

    auto score_and_offer = [&](const GraphPattern& p, const PatternEval& ev) {
        Time td_total = 0, jit_total = 0;
        std::vector<Time> tds, jits;
        RwOracle oracle = flet_oracle(dag, ev.assignment);
        for (const Merge& m : dag.merges) {
            DisparityResult d = time_disparity(dag, m, oracle);
            tds.push_back(d.max_td);
            jits.push_back(d.jitter);
            td_total += d.max_td;
            jit_total += d.jitter;
        }
        Time score = td_total * omega.den + jit_total * omega.num;
        if (!best.found || score < best.score_num) {
            best.found = true;
            best.score_num = score;
            best.pattern = p;
            best.assignment = ev.assignment;
            best.td_total = td_total;
            best.jitter_total = jit_total;
            best.td = tds;
            best.jitter = jits;
        }
    };

    GraphPattern def = detail::default_pattern(sp);
    std::vector<Time> def_shifts = detail::pattern_shifts(sp, def);
    if (auto ev = evaluate_pattern_in_space(sp, def)) {
        ++out.counters.evaluated;
        score_and_offer(def, *ev);
    }

    GraphPattern cur;
    cur.kind = sp.kind;
    std::vector<LinConstraint> cs = sp.boxes;
    std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
        if (out.timed_out)
            return;
        if (deadline.expired()) {
            out.timed_out = true;
            return;
        }
        if (depth == sp.sets.size()) {
            if (detail::pattern_shifts(sp, cur) == def_shifts)
                return; // already evaluated up front
            if (auto ev = evaluate_pattern_in_space(sp, cur)) {
                ++out.counters.evaluated;
                score_and_offer(cur, *ev);
            } else {
                ++out.counters.pruned_infeasible;
            }
            return;
        }
        for (const EdgePattern& ep : sp.sets[depth].patterns) {
            cur.edges.emplace(sp.edge_order[depth], ep);
            std::size_t mark = cs.size();
            GraphPattern one;
            one.kind = sp.kind;
            one.edges.emplace(sp.edge_order[depth], ep);
            add_pattern_constraints(dag, one, cs);
            if (feasibility(cs))
                dfs(depth + 1);
            else
                ++out.counters.pruned_infeasible;
            cs.resize(mark);
            cur.edges.erase(sp.edge_order[depth]);
            if (out.timed_out)
                return;
        }
    };
    if (!sp.sets.empty())
        dfs(0);

    out.found = best.found;
    if (best.found) {
        out.assignment = best.assignment;
        out.pattern = best.pattern;
        out.per_merge_td = best.td;
        out.per_merge_jitter = best.jitter;
        out.objective = best.td_total;
    }
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

/// Second optimization step with offset-aware exact response times: tighten
/// virtual deadlines to the worst observed relative finish where the pattern
/// constraints allow it (data age / reaction time), or re-solve the winning
/// disparity LP with the tighter response times. Never worsens the result.
inline OptimizationResult refine(const TaskDag& dag, const ResponseTimes& rt, Metric metric,
                                 JitterWeight omega, const OptimizationResult& result) {
    if (!result.found)
        return result;
    OptimizationResult out = result;
    ResponseTimes exact = exact_response_times(dag, result.assignment.offset);

    detail::SearchSpace sp = detail::build_space(dag, rt, metric);
    if (metric == Metric::TimeDisparity) {
        std::vector<LinConstraint> cs;
        add_schedulability_constraints(dag, exact, sp.involved, cs);
        // keep the already chosen offsets: O fixed, deadlines re-solved
        for (int ix : sp.involved) {
            cs.push_back(upper(offset_var(ix), result.assignment.offset[ix]));
            cs.push_back(lower(offset_var(ix), result.assignment.offset[ix]));
        }
        add_pattern_constraints(dag, result.pattern, cs);
        MinMaxObjective obj;
        for (auto& mg : detail::merge_groups(sp, result.pattern))
            obj.max_groups.push_back(mg.group);
        if (auto sol = solve_min_max(cs, obj)) {
            Assignment cand = result.assignment;
            for (int ix : sp.involved) {
                cand.offset[ix] = sol->witness.at(offset_var(ix));
                cand.deadline[ix] = sol->witness.at(deadline_var(ix));
            }
            Time td_total = 0, jit_total = 0;
            std::vector<Time> tds, jits;
            RwOracle oracle = flet_oracle(dag, cand);
            for (const Merge& m : dag.merges) {
                DisparityResult d = time_disparity(dag, m, oracle);
                tds.push_back(d.max_td);
                jits.push_back(d.jitter);
                td_total += d.max_td;
                jit_total += d.jitter;
            }
            Time old_score = 0, new_score = td_total * omega.den + jit_total * omega.num;
            for (std::size_t i = 0; i < result.per_merge_td.size(); ++i)
                old_score += result.per_merge_td[i] * omega.den + result.per_merge_jitter[i] * omega.num;
            if (new_score < old_score) {
                out.assignment = cand;
                out.per_merge_td = tds;
                out.per_merge_jitter = jits;
                out.objective = td_total;
                out.refined = true;
            }
        }
        return out;
    }

    // DART: Maia23-style tightening of virtual deadlines on tasks involved
    // in the objective, kept only where the pattern constraints still hold.
    Assignment cand = result.assignment;
    for (int ix : sp.involved) {
        Time tightened = cand.offset[ix] + exact.r[ix];
        if (tightened >= cand.deadline[ix])
            continue;
        Time saved = cand.deadline[ix];
        cand.deadline[ix] = tightened;
        bool ok = true;
        for (auto& [edge_ix, ep] : result.pattern.edges) {
            Time s = realized_shift(dag, cand, edge_ix);
            if (s < ep.shift_lo || s >= ep.shift_hi) {
                ok = false;
                break;
            }
        }
        if (!ok)
            cand.deadline[ix] = saved;
    }
    RwOracle oracle = flet_oracle(dag, cand);
    Time total = 0;
    std::vector<Time> per;
    for (const Chain& c : dag.chains) {
        ChainResult r = metric == Metric::DataAge ? data_age(dag, c, oracle)
                                                  : reaction_time(dag, c, oracle);
        per.push_back(r.value);
        total += r.value;
    }
    if (total <= result.objective) {
        out.assignment = cand;
        out.objective = total;
        out.per_chain = per;
        out.refined = total < result.objective;
    }
    return out;
}

} // namespace flet
