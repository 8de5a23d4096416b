#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "flet/schedule_sim.hpp"
#include "flet/task_model.hpp"

namespace flet {

/// Read/write times of any job of any task. Implementations must be
/// periodic: rw(q + m) = rw(q) shifted by m periods within one hyper-period
/// structure, with read and write strictly increasing in q.
using RwOracle = std::function<ReadWrite(int task_ix, long long q)>;

inline RwOracle flet_oracle(const TaskDag& dag, const Assignment& a) {
    return [&dag, a](int ix, long long q) -> ReadWrite {
        const Task& t = dag.tasks[ix];
        Time base = t.release_offset + q * t.period;
        return {base + a.offset[ix], base + a.deadline[ix]};
    };
}

inline RwOracle trace_oracle(const TraceRwTimes& rw) {
    return [rw](int ix, long long q) { return rw.rw(ix, q); };
}

/// Unique producer job whose write is the latest one at or before the
/// consumer's read: wr(q) <= re < wr(q+1).
inline Job last_reading_job(const TaskDag& dag, const Edge& edge, const Job& consumer,
                            const RwOracle& oracle) {
    int pix = dag.index_of(edge.from);
    int cix = dag.index_of(edge.to);
    Time re = oracle(cix, consumer.q).read;
    Time tp = dag.tasks[pix].period;
    long long q = floor_div(re - oracle(pix, 0).write, tp);
    while (oracle(pix, q + 1).write <= re)
        ++q;
    while (oracle(pix, q).write > re)
        --q;
    return {edge.from, q};
}

/// Unique consumer job whose read is the earliest one at or after the
/// producer's write: re(q-1) < wr <= re(q).
inline Job first_reacting_job(const TaskDag& dag, const Edge& edge, const Job& producer,
                              const RwOracle& oracle) {
    int pix = dag.index_of(edge.from);
    int cix = dag.index_of(edge.to);
    Time wr = oracle(pix, producer.q).write;
    Time tc = dag.tasks[cix].period;
    long long q = ceil_div(wr - oracle(cix, 0).read, tc);
    while (oracle(cix, q).read < wr)
        ++q;
    while (oracle(cix, q - 1).read >= wr)
        --q;
    return {edge.to, q};
}

struct ChainResult {
    Time value = 0;
    std::vector<Job> witness; // source-to-sink job chain realizing the value
};

/// Worst-case data age: the longest immediate backward job chain over one
/// chain hyper-period of sink jobs.
inline ChainResult data_age(const TaskDag& dag, const Chain& chain, const RwOracle& oracle) {
    if (chain.empty())
        throw std::invalid_argument("empty chain");
    Time h = hyper_period(dag, chain);
    const Task& sink = dag.task(chain.back());
    long long window = h / sink.period;
    ChainResult best;
    bool first = true;
    for (long long qn = 0; qn < window; ++qn) {
        std::vector<Job> jobs{{chain.back(), qn}};
        for (std::size_t i = chain.size() - 1; i > 0; --i) {
            Edge e{chain[i - 1], chain[i]};
            jobs.push_back(last_reading_job(dag, e, jobs.back(), oracle));
        }
        std::reverse(jobs.begin(), jobs.end());
        Time len = oracle(dag.index_of(chain.back()), qn).write -
                   oracle(dag.index_of(chain.front()), jobs.front().q).read;
        if (first || len > best.value) {
            best.value = len;
            best.witness = std::move(jobs);
            first = false;
        }
    }
    return best;
}

/// Worst-case reaction time: the longest immediate forward job chain over
/// one chain hyper-period of source jobs.
inline ChainResult reaction_time(const TaskDag& dag, const Chain& chain, const RwOracle& oracle) {
    if (chain.empty())
        throw std::invalid_argument("empty chain");
    Time h = hyper_period(dag, chain);
    const Task& source = dag.task(chain.front());
    long long window = h / source.period;
    ChainResult best;
    bool first = true;
    for (long long q0 = 0; q0 < window; ++q0) {
        std::vector<Job> jobs{{chain.front(), q0}};
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
            Edge e{chain[i], chain[i + 1]};
            jobs.push_back(first_reacting_job(dag, e, jobs.back(), oracle));
        }
        Time len = oracle(dag.index_of(chain.back()), jobs.back().q).write -
                   oracle(dag.index_of(chain.front()), q0).read;
        if (first || len > best.value) {
            best.value = len;
            best.witness = std::move(jobs);
            first = false;
        }
    }
    return best;
}

struct DisparityResult {
    Time max_td = 0;
    Time min_td = 0;
    Time jitter = 0;
    Job witness_max_sink;
    Job witness_min_sink;
    std::vector<Job> witness_max_sources; // last-reading jobs at the max
    bool single_source = false;           // disparity degenerates to 0
};

/// Time disparity of a merge: per sink job, the spread between the earliest
/// and latest write of its last-reading source jobs; jitter is the range of
/// that spread across one merge hyper-period of sink jobs.
inline DisparityResult time_disparity(const TaskDag& dag, const Merge& merge,
                                      const RwOracle& oracle) {
    if (merge.sources.empty())
        throw std::invalid_argument("merge without sources");
    std::vector<int> all = merge.sources;
    all.push_back(merge.sink);
    Time h = hyper_period(dag, all);
    const Task& sink = dag.task(merge.sink);
    long long window = h / sink.period;

    DisparityResult out;
    out.single_source = merge.sources.size() == 1;
    bool first = true;
    for (long long q = 0; q < window; ++q) {
        Time lo = 0, hi = 0;
        std::vector<Job> lr;
        bool inner_first = true;
        for (int src : merge.sources) {
            Job j = last_reading_job(dag, Edge{src, merge.sink}, Job{merge.sink, q}, oracle);
            Time w = oracle(dag.index_of(src), j.q).write;
            lr.push_back(j);
            if (inner_first) {
                lo = hi = w;
                inner_first = false;
            } else {
                lo = std::min(lo, w);
                hi = std::max(hi, w);
            }
        }
        Time td = hi - lo;
        if (first || td > out.max_td) {
            out.max_td = td;
            out.witness_max_sink = {merge.sink, q};
            out.witness_max_sources = lr;
        }
        if (first || td < out.min_td) {
            out.min_td = td;
            out.witness_min_sink = {merge.sink, q};
        }
        first = false;
    }
    out.jitter = out.max_td - out.min_td;
    return out;
}

struct MetricsReport {
    struct ChainMetrics {
        Chain chain;
        Time data_age = 0;
        std::vector<Job> data_age_witness;
        Time reaction_time = 0;
        std::vector<Job> reaction_witness;
    };
    struct MergeMetrics {
        Merge merge;
        DisparityResult disparity;
    };
    std::vector<ChainMetrics> chains;
    std::vector<MergeMetrics> merges;
};

inline MetricsReport compute_metrics(const TaskDag& dag, const RwOracle& oracle) {
    MetricsReport rep;
    for (const Chain& c : dag.chains) {
        MetricsReport::ChainMetrics cm;
        cm.chain = c;
        ChainResult da = data_age(dag, c, oracle);
        ChainResult rt = reaction_time(dag, c, oracle);
        cm.data_age = da.value;
        cm.data_age_witness = da.witness;
        cm.reaction_time = rt.value;
        cm.reaction_witness = rt.witness;
        rep.chains.push_back(std::move(cm));
    }
    for (const Merge& m : dag.merges)
        rep.merges.push_back({m, time_disparity(dag, m, oracle)});
    return rep;
}

} // namespace flet
