#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "flet/response_time.hpp"
#include "flet/task_model.hpp"

namespace flet {

struct JobExec {
    int task_ix = 0;
    long long q = 0;
    Time release = 0; // virtual release: ro + offset + q*T
    Time start = -1;
    Time finish = -1;
};

struct ScheduleTrace {
    Time hyper = 0;
    int horizon_hyperperiods = 0;
    // jobs[task_ix][k] is the k-th job of the task released in [0, horizon).
    std::vector<std::vector<JobExec>> jobs;
};

/// Work-conserving preemptive fixed-priority simulation on the integer time
/// grid, every job taking its WCET. Ties at equal priority are impossible
/// within one processor (priorities are unique per processor).
inline ScheduleTrace simulate(const TaskDag& dag, const std::vector<Time>& release_offsets,
                              int horizon_hyperperiods) {
    if (horizon_hyperperiods < 2)
        throw std::invalid_argument("simulate requires k >= 2 hyper-periods");
    std::vector<Time> periods;
    for (const Task& t : dag.tasks)
        periods.push_back(t.period);
    Time h = hyper_period(periods);
    Time end = h * horizon_hyperperiods;

    ScheduleTrace trace;
    trace.hyper = h;
    trace.horizon_hyperperiods = horizon_hyperperiods;
    trace.jobs.resize(dag.tasks.size());

    struct Active {
        int task_ix;
        long long q;
        Time remaining;
    };

    std::map<int, std::vector<int>> tasks_by_proc;
    for (std::size_t i = 0; i < dag.tasks.size(); ++i)
        tasks_by_proc[dag.tasks[i].processor].push_back(int(i));

    for (auto& [proc, members] : tasks_by_proc) {
        std::vector<long long> next_q(dag.tasks.size(), 0);
        std::vector<Active> ready;
        Time now = 0;
        auto release_time = [&](int ix, long long q) {
            return dag.tasks[ix].release_offset + release_offsets[ix] + q * dag.tasks[ix].period;
        };
        while (now < end) {
            // Admit releases up to `now`.
            for (int ix : members)
                while (release_time(ix, next_q[ix]) <= now) {
                    long long q = next_q[ix]++;
                    ready.push_back({ix, q, dag.tasks[ix].wcet});
                    trace.jobs[ix].push_back({ix, q, release_time(ix, q), -1, -1});
                }
            Time next_release = end;
            for (int ix : members)
                next_release = std::min(next_release, release_time(ix, next_q[ix]));
            if (ready.empty()) {
                now = next_release;
                continue;
            }
            auto it = std::min_element(ready.begin(), ready.end(), [&](const Active& a, const Active& b) {
                int pa = dag.tasks[a.task_ix].priority;
                int pb = dag.tasks[b.task_ix].priority;
                if (pa != pb)
                    return pa < pb;
                return dag.tasks[a.task_ix].id < dag.tasks[b.task_ix].id;
            });
            JobExec& je = *std::find_if(trace.jobs[it->task_ix].begin(), trace.jobs[it->task_ix].end(),
                                        [&](const JobExec& j) { return j.q == it->q; });
            if (je.start < 0)
                je.start = now;
            Time run = std::min(it->remaining, next_release - now);
            it->remaining -= run;
            now += run;
            if (it->remaining == 0) {
                je.finish = now;
                ready.erase(it);
            }
        }
    }

    // Every job released in [0, (k-1)H] must have completed within its
    // original deadline; RTA-schedulable sets never trip this.
    for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix)
        for (const JobExec& j : trace.jobs[ix]) {
            if (j.release > (horizon_hyperperiods - 1) * h)
                continue;
            if (j.finish < 0 || j.finish > j.release + dag.tasks[ix].deadline_org)
                throw std::runtime_error("deadline miss for task " +
                                         std::to_string(dag.tasks[ix].id) + " job " +
                                         std::to_string(j.q));
        }
    return trace;
}

inline ScheduleTrace simulate(const TaskDag& dag, int horizon_hyperperiods = 2) {
    return simulate(dag, std::vector<Time>(dag.tasks.size(), 0), horizon_hyperperiods);
}

/// Read/write times of the implicit-communication protocol: read at start,
/// write at finish. The second simulated hyper-period is the steady-state
/// window; other job indices (including negative ones) extend periodically.
class TraceRwTimes {
public:
    TraceRwTimes(const TaskDag& dag, const ScheduleTrace& trace) : hyper_(trace.hyper) {
        base_read_.resize(dag.tasks.size());
        base_write_.resize(dag.tasks.size());
        jobs_per_hyper_.resize(dag.tasks.size());
        for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix) {
            long long m = hyper_ / dag.tasks[ix].period;
            jobs_per_hyper_[ix] = m;
            base_read_[ix].resize(m);
            base_write_[ix].resize(m);
            std::vector<bool> seen(m, false);
            for (const JobExec& j : trace.jobs[ix]) {
                if (j.q < m || j.q >= 2 * m || j.finish < 0)
                    continue;
                base_read_[ix][j.q - m] = j.start;
                base_write_[ix][j.q - m] = j.finish;
                seen[j.q - m] = true;
            }
            for (bool s : seen)
                if (!s)
                    throw std::invalid_argument(
                        "trace does not cover a completed steady hyper-period; simulate with k >= 3");
        }
    }

    ReadWrite rw(int task_ix, long long q) const {
        long long m = jobs_per_hyper_[task_ix];
        long long cycle = floor_div(q, m) - 1; // window jobs have q in [m, 2m)
        long long r = q - (cycle + 1) * m;
        return {base_read_[task_ix][r] + cycle * hyper_, base_write_[task_ix][r] + cycle * hyper_};
    }

private:
    Time hyper_;
    std::vector<long long> jobs_per_hyper_;
    std::vector<std::vector<Time>> base_read_, base_write_;
};

inline TraceRwTimes implicit_rw_times(const TaskDag& dag) {
    return TraceRwTimes(dag, simulate(dag, 3));
}

/// Maia23-style interval: per task the smallest relative start time and the
/// largest relative finish time observed in the trace.
inline Assignment maia_let_intervals(const TaskDag& dag, const ScheduleTrace& trace) {
    Assignment a;
    a.offset.assign(dag.tasks.size(), 0);
    a.deadline.assign(dag.tasks.size(), 0);
    for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix) {
        Time lo = dag.tasks[ix].period, hi = 0;
        for (const JobExec& j : trace.jobs[ix]) {
            if (j.finish < 0)
                continue;
            lo = std::min(lo, j.start - j.release);
            hi = std::max(hi, j.finish - j.release);
        }
        a.offset[ix] = lo;
        a.deadline[ix] = hi;
    }
    return a;
}

/// Offset-aware response times from simulation: the worst finish - virtual
/// release over a 2H horizon with the offsets applied.
inline ResponseTimes exact_response_times(const TaskDag& dag, const std::vector<Time>& offsets) {
    ScheduleTrace trace = simulate(dag, offsets, 2);
    ResponseTimes rt;
    rt.r.assign(dag.tasks.size(), 0);
    for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix)
        for (const JobExec& j : trace.jobs[ix])
            if (j.finish >= 0)
                rt.r[ix] = std::max(rt.r[ix], j.finish - j.release);
    return rt;
}

inline void dump_trace_csv(const TaskDag& dag, const ScheduleTrace& trace, std::ostream& os) {
    os << "task,q,release,start,finish,processor\n";
    for (std::size_t ix = 0; ix < trace.jobs.size(); ++ix)
        for (const JobExec& j : trace.jobs[ix])
            os << dag.tasks[ix].id << ',' << j.q << ',' << j.release << ',' << j.start << ','
               << j.finish << ',' << dag.tasks[ix].processor << '\n';
}

} // namespace flet
