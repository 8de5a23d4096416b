#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flet/time.hpp"

namespace flet {

/// A periodic task. `deadline_org` is the original relative deadline the
/// task must keep under any interval assignment; lower `priority` value
/// means higher priority.
struct Task {
    int id = 0;
    Time wcet = 1;
    Time period = 1;
    Time deadline_org = 1;
    int priority = 0;
    int processor = 0;
    Time release_offset = 0;

    double utilization() const { return double(wcet) / double(period); }
};

struct Edge {
    int from = 0; // producer task id
    int to = 0;   // consumer task id
    bool operator==(const Edge&) const = default;
};

using Chain = std::vector<int>; // task ids, source first

struct Merge {
    int sink = 0;
    std::vector<int> sources;
};

// Job q of a task; q may be negative (released |q| periods before time 0).
struct Job {
    int task = 0; // task id
    long long q = 0;
    bool operator==(const Job&) const = default;
};

struct TaskDag {
    std::vector<Task> tasks;
    std::vector<Edge> edges;
    std::vector<Chain> chains;
    std::vector<Merge> merges;

    int index_of(int task_id) const {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            if (tasks[i].id == task_id)
                return int(i);
        throw std::invalid_argument("unknown task id " + std::to_string(task_id));
    }

    const Task& task(int task_id) const { return tasks[index_of(task_id)]; }

    bool has_edge(int from, int to) const {
        for (const Edge& e : edges)
            if (e.from == from && e.to == to)
                return true;
        return false;
    }

    int edge_index(int from, int to) const {
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (edges[i].from == from && edges[i].to == to)
                return int(i);
        throw std::invalid_argument("unknown edge");
    }
};

/// Per-task virtual offset and virtual deadline, aligned with dag.tasks.
/// Job (i, q) reads at ro_i + O_i + q*T_i and writes at ro_i + q*T_i + D_i.
struct Assignment {
    std::vector<Time> offset;
    std::vector<Time> deadline;
};

enum class Metric { DataAge, ReactionTime, TimeDisparity };

// Nonnegative rational weight for the jitter term of the time-disparity
// objective; exact comparisons use cross-multiplication.
struct JitterWeight {
    long long num = 0;
    long long den = 1;
};

struct ObjectiveSpec {
    Metric kind = Metric::DataAge;
    JitterWeight omega; // only meaningful with TimeDisparity
};

inline Time hyper_period(const std::vector<Time>& periods) {
    if (periods.empty())
        throw std::invalid_argument("hyper_period of empty task subset");
    Time h = 1;
    for (Time p : periods)
        h = lcm_time(h, p);
    return h;
}

inline Time hyper_period(const TaskDag& dag, const std::vector<int>& task_ids) {
    std::vector<Time> ps;
    ps.reserve(task_ids.size());
    for (int id : task_ids)
        ps.push_back(dag.task(id).period);
    return hyper_period(ps);
}

inline Time super_period(const TaskDag& dag, const Edge& e) {
    if (!dag.has_edge(e.from, e.to))
        throw std::invalid_argument("super_period of unknown edge");
    return lcm_time(dag.task(e.from).period, dag.task(e.to).period);
}

struct ReadWrite {
    Time read = 0;
    Time write = 0;
    bool operator==(const ReadWrite&) const = default;
};

inline ReadWrite read_write_times(const TaskDag& dag, const Assignment& a, const Job& job) {
    int ix = dag.index_of(job.task);
    const Task& t = dag.tasks[ix];
    Time base = t.release_offset + job.q * t.period;
    return {base + a.offset[ix], base + a.deadline[ix]};
}

/// Default LET assignment: O = 0, D = D^org.
inline Assignment default_let(const TaskDag& dag) {
    Assignment a;
    a.offset.assign(dag.tasks.size(), 0);
    for (const Task& t : dag.tasks)
        a.deadline.push_back(t.deadline_org);
    return a;
}

struct Violation {
    std::string message;
};

/// Structural validation; collects violations instead of aborting.
inline std::vector<Violation> validate(const TaskDag& dag) {
    std::vector<Violation> out;
    auto fail = [&](std::string m) { out.push_back({std::move(m)}); };

    std::set<int> ids;
    for (const Task& t : dag.tasks) {
        if (!ids.insert(t.id).second)
            fail("duplicate task id " + std::to_string(t.id));
        if (t.wcet <= 0)
            fail("task " + std::to_string(t.id) + ": wcet must be positive");
        if (!(t.wcet <= t.deadline_org && t.deadline_org <= t.period))
            fail("task " + std::to_string(t.id) + ": requires C <= D^org <= T");
        if (t.release_offset < 0)
            fail("task " + std::to_string(t.id) + ": negative release offset");
    }

    std::map<int, std::set<int>> prio_per_proc;
    for (const Task& t : dag.tasks)
        if (!prio_per_proc[t.processor].insert(t.priority).second)
            fail("duplicate priority " + std::to_string(t.priority) +
                 " on processor " + std::to_string(t.processor));

    auto known = [&](int id) { return ids.count(id) != 0; };
    for (const Edge& e : dag.edges) {
        if (!known(e.from) || !known(e.to))
            fail("edge references unknown task");
        else if (e.from == e.to)
            fail("self-loop on task " + std::to_string(e.from));
    }

    // Cycle check via Kahn's algorithm over task ids.
    {
        std::map<int, int> indeg;
        std::map<int, std::vector<int>> succ;
        for (int id : ids)
            indeg[id] = 0;
        for (const Edge& e : dag.edges)
            if (known(e.from) && known(e.to) && e.from != e.to) {
                ++indeg[e.to];
                succ[e.from].push_back(e.to);
            }
        std::vector<int> queue;
        for (auto& [id, d] : indeg)
            if (d == 0)
                queue.push_back(id);
        std::size_t seen = 0;
        while (!queue.empty()) {
            int u = queue.back();
            queue.pop_back();
            ++seen;
            for (int v : succ[u])
                if (--indeg[v] == 0)
                    queue.push_back(v);
        }
        if (seen != ids.size())
            fail("cycle detected");
    }

    for (const Chain& c : dag.chains) {
        if (c.empty()) {
            fail("empty chain");
            continue;
        }
        for (int id : c)
            if (!known(id))
                fail("chain references unknown task");
        for (std::size_t i = 0; known(c[0]) && i + 1 < c.size(); ++i)
            if (!known(c[i + 1]) || !dag.has_edge(c[i], c[i + 1]))
                fail("chain step not an edge: " + std::to_string(c[i]) + "->" +
                     (i + 1 < c.size() ? std::to_string(c[i + 1]) : "?"));
    }

    for (const Merge& m : dag.merges) {
        if (!known(m.sink))
            fail("merge sink unknown");
        if (m.sources.empty())
            fail("merge without sources");
        std::set<int> uniq(m.sources.begin(), m.sources.end());
        if (uniq.size() != m.sources.size())
            fail("merge with duplicate sources");
        for (int s : m.sources)
            if (!known(s) || !known(m.sink) || !dag.has_edge(s, m.sink))
                fail("merge pair not an edge: " + std::to_string(s) + "->" +
                     std::to_string(m.sink));
    }
    return out;
}

/// Rate-monotonic priorities (shorter period first, tie by id) per processor.
/// Existing distinct priorities are kept as-is when `force` is false and the
/// task set already carries a valid priority ordering.
inline void assign_rate_monotonic_priorities(TaskDag& dag) {
    std::vector<int> order(dag.tasks.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = int(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Task& ta = dag.tasks[a];
        const Task& tb = dag.tasks[b];
        if (ta.period != tb.period)
            return ta.period < tb.period;
        return ta.id < tb.id;
    });
    int rank = 0;
    for (int ix : order)
        dag.tasks[ix].priority = rank++;
}

} // namespace flet
