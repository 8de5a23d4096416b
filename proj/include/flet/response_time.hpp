#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flet/task_model.hpp"

namespace flet {

struct ResponseTimes {
    std::vector<Time> r; // aligned with dag.tasks
};

/// Classic fixed-point response-time iteration
///   R = C_i + sum_{j in hp(i)} ceil(R / T_j) * C_j
/// starting from R = C_i. Returns nullopt ("unbounded") once the iterate
/// exceeds the task's original deadline.
inline std::optional<Time> rta_fixed_point(const Task& task, const std::vector<Task>& higher_prio) {
    if (task.wcet <= 0)
        throw std::invalid_argument("rta requires positive wcet");
    Time r = task.wcet;
    for (;;) {
        Time next = task.wcet;
        for (const Task& h : higher_prio)
            next += ceil_div(r, h.period) * h.wcet;
        if (next > task.deadline_org)
            return std::nullopt;
        if (next == r)
            return r;
        r = next;
    }
}

struct UnschedulableError : std::runtime_error {
    int task_id;
    explicit UnschedulableError(int id)
        : std::runtime_error("task " + std::to_string(id) + " is unschedulable"), task_id(id) {}
};

/// Per-task RTA using the higher-priority set on the same processor.
/// Independent of offsets and virtual deadlines, so it is computed once per
/// task set and reused across all pattern evaluations.
inline ResponseTimes response_times(const TaskDag& dag) {
    ResponseTimes out;
    out.r.reserve(dag.tasks.size());
    for (const Task& t : dag.tasks) {
        std::vector<Task> hp;
        for (const Task& o : dag.tasks)
            if (o.processor == t.processor && o.priority < t.priority)
                hp.push_back(o);
        auto r = rta_fixed_point(t, hp);
        if (!r)
            throw UnschedulableError(t.id);
        out.r.push_back(*r);
    }
    return out;
}

inline std::optional<ResponseTimes> try_response_times(const TaskDag& dag) {
    try {
        return response_times(dag);
    } catch (const UnschedulableError&) {
        return std::nullopt;
    }
}

/// Schedulability of an interval assignment against a response-time vector:
/// for every task, 0 <= O_i, O_i + R_i <= D_i and D_i <= D_i^org.
inline bool check_schedulability(const TaskDag& dag, const Assignment& a, const ResponseTimes& rt) {
    for (std::size_t i = 0; i < dag.tasks.size(); ++i) {
        if (a.offset[i] < 0)
            return false;
        if (a.offset[i] + rt.r[i] > a.deadline[i])
            return false;
        if (a.deadline[i] > dag.tasks[i].deadline_org)
            return false;
    }
    return true;
}

} // namespace flet
