#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flet/chain_metrics.hpp"
#include "flet/optimizer.hpp"
#include "flet/response_time.hpp"
#include "flet/schedule_sim.hpp"
#include "flet/task_model.hpp"

namespace flet {

enum class BaselineKind { DefLet, Bradatsch16, Maia23, Implicit };

inline const char* baseline_name(BaselineKind k) {
    switch (k) {
    case BaselineKind::DefLet: return "deflet";
    case BaselineKind::Bradatsch16: return "bradatsch16";
    case BaselineKind::Maia23: return "maia23";
    case BaselineKind::Implicit: return "implicit";
    }
    return "?";
}

inline std::optional<BaselineKind> baseline_from_name(const std::string& s) {
    for (BaselineKind k : {BaselineKind::DefLet, BaselineKind::Bradatsch16, BaselineKind::Maia23,
                           BaselineKind::Implicit})
        if (s == baseline_name(k))
            return k;
    return std::nullopt;
}

/// Interval assignment of an interval-producing baseline. Implicit has no
/// assignment (use baseline_oracle). Maia23 intervals are checked against
/// the offset-aware response times they induce.
inline Assignment baseline_assignment(const TaskDag& dag, BaselineKind kind) {
    ResponseTimes rt = response_times(dag); // throws if unschedulable
    switch (kind) {
    case BaselineKind::DefLet:
        return default_let(dag);
    case BaselineKind::Bradatsch16: {
        Assignment a;
        a.offset.assign(dag.tasks.size(), 0);
        a.deadline = rt.r;
        return a;
    }
    case BaselineKind::Maia23: {
        Assignment a = maia_let_intervals(dag, simulate(dag, 3));
        ResponseTimes exact = exact_response_times(dag, a.offset);
        if (!check_schedulability(dag, a, exact))
            throw std::runtime_error("maia23 intervals unschedulable under offset-aware response times");
        return a;
    }
    case BaselineKind::Implicit:
        throw std::invalid_argument("implicit communication has no interval assignment");
    }
    throw std::logic_error("unreachable");
}

/// Read/write oracle of a baseline, usable with the chain metrics.
inline RwOracle baseline_oracle(const TaskDag& dag, BaselineKind kind) {
    if (kind == BaselineKind::Implicit)
        return trace_oracle(implicit_rw_times(dag));
    // The assignment must outlive the lambda; capture by value via a shared
    // copy inside flet_oracle.
    return flet_oracle(dag, baseline_assignment(dag, kind));
}

struct CompareRow {
    std::string method;
    bool ok = false;
    std::string error;            // set when the method failed
    std::vector<Time> data_age;   // per chain
    std::vector<Time> reaction;   // per chain
    std::vector<Time> td;         // per merge
    std::vector<Time> jitter;     // per merge
    double gap_da_pct = 0;        // vs DefLET, sum over chains
    double gap_rt_pct = 0;
    double runtime_s = 0;
};

struct CompareOptions {
    bool run_optimizers = true;
    JitterWeight omega{1, 1};
    double time_limit_s = 1000;
};

namespace detail {

inline CompareRow metrics_row(const TaskDag& dag, const std::string& name, const RwOracle& oracle) {
    CompareRow row;
    row.method = name;
    row.ok = true;
    MetricsReport rep = compute_metrics(dag, oracle);
    for (auto& c : rep.chains) {
        row.data_age.push_back(c.data_age);
        row.reaction.push_back(c.reaction_time);
    }
    for (auto& m : rep.merges) {
        row.td.push_back(m.disparity.max_td);
        row.jitter.push_back(m.disparity.jitter);
    }
    return row;
}

inline Time sum(const std::vector<Time>& v) {
    Time s = 0;
    for (Time x : v)
        s += x;
    return s;
}

} // namespace detail

/// Runs the baselines and (optionally) the fLET searches on one task set
/// and reports one row per method, Martinez18 marked not implemented.
/// Per-method failures land in the row; the run continues.
inline std::vector<CompareRow> compare(const TaskDag& dag, const CompareOptions& opt = {}) {
    std::vector<CompareRow> rows;
    auto guarded = [&](const std::string& name, auto&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        CompareRow row;
        try {
            row = fn();
        } catch (const std::exception& e) {
            row.method = name;
            row.ok = false;
            row.error = e.what();
        }
        row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(std::move(row));
    };

    for (BaselineKind k : {BaselineKind::DefLet, BaselineKind::Bradatsch16, BaselineKind::Implicit,
                           BaselineKind::Maia23})
        guarded(baseline_name(k), [&] {
            return detail::metrics_row(dag, baseline_name(k), baseline_oracle(dag, k));
        });

    {
        CompareRow row;
        row.method = "martinez18";
        row.ok = false;
        row.error = "not implemented";
        rows.push_back(row);
    }

    if (opt.run_optimizers) {
        ResponseTimes rt = response_times(dag);
        SearchConfig cfg;
        cfg.time_limit_s = opt.time_limit_s;
        auto opt_row = [&](const std::string& name, SearchMethod m) {
            guarded(name, [&] {
                OptimizationResult da, rtm;
                cfg.method = m;
                switch (m) {
                case SearchMethod::Enumerate:
                    da = optimize_enumerate(dag, rt, Metric::DataAge, cfg);
                    rtm = optimize_enumerate(dag, rt, Metric::ReactionTime, cfg);
                    break;
                case SearchMethod::Backtrack:
                    da = optimize_backtrack(dag, rt, Metric::DataAge, cfg);
                    rtm = optimize_backtrack(dag, rt, Metric::ReactionTime, cfg);
                    break;
                case SearchMethod::Symbolic:
                    da = optimize_symbolic(dag, rt, Metric::DataAge, cfg);
                    rtm = optimize_symbolic(dag, rt, Metric::ReactionTime, cfg);
                    break;
                }
                CompareRow row;
                row.method = name;
                row.ok = true;
                row.data_age = da.per_chain;
                row.reaction = rtm.per_chain;
                if (!dag.merges.empty()) {
                    auto td = optimize_td_jitter(dag, rt, opt.omega, cfg);
                    row.td = td.per_merge_td;
                    row.jitter = td.per_merge_jitter;
                }
                return row;
            });
        };
        opt_row("flet_enum", SearchMethod::Enumerate);
        opt_row("flet_backtracking", SearchMethod::Backtrack);
        opt_row("flet_symbopt", SearchMethod::Symbolic);
    }

    // Gap vs DefLET: (F_method - F_deflet) / F_deflet * 100.
    const CompareRow* def = nullptr;
    for (auto& r : rows)
        if (r.method == "deflet" && r.ok)
            def = &r;
    if (def) {
        Time def_da = detail::sum(def->data_age);
        Time def_rt = detail::sum(def->reaction);
        for (auto& r : rows) {
            if (!r.ok)
                continue;
            if (def_da > 0)
                r.gap_da_pct = 100.0 * double(detail::sum(r.data_age) - def_da) / double(def_da);
            if (def_rt > 0)
                r.gap_rt_pct = 100.0 * double(detail::sum(r.reaction) - def_rt) / double(def_rt);
        }
    }
    return rows;
}

} // namespace flet
