#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "flet/baselines.hpp"
#include "flet/chain_metrics.hpp"
#include "flet/optimizer.hpp"
#include "flet/task_model.hpp"

namespace flet {

using Json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Time require_time(const Json& j, const std::string& path, const char* key) {
    if (!j.contains(key))
        throw ParseError(path + ": missing \"" + key + "\"");
    if (!j[key].is_number_integer())
        throw ParseError(path + "." + key + ": expected an integer");
    return j[key].get<Time>();
}

inline Time optional_time(const Json& j, const char* key, Time def, const std::string& path) {
    if (!j.contains(key))
        return def;
    if (!j[key].is_number_integer())
        throw ParseError(path + "." + key + ": expected an integer");
    return j[key].get<Time>();
}

} // namespace detail

/// Task-set document:
///   { "tasks": [{"id","period","wcet","deadline"?,"processor"?,"priority"?,
///                "release_offset"?}],
///     "edges": [[i,j],...], "chains": [[ids],...],
///     "merges": [{"sink","sources"},...] }
/// deadline defaults to the period; missing priorities are assigned
/// rate-monotonically.
inline TaskDag parse_task_set(const Json& doc) {
    if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array())
        throw ParseError("$.tasks: missing task array");
    TaskDag dag;
    bool any_priority = false;
    int i = 0;
    for (const Json& tj : doc["tasks"]) {
        std::string path = "$.tasks[" + std::to_string(i++) + "]";
        if (!tj.is_object())
            throw ParseError(path + ": expected an object");
        Task t;
        t.id = int(detail::require_time(tj, path, "id"));
        t.period = detail::require_time(tj, path, "period");
        t.wcet = detail::require_time(tj, path, "wcet");
        t.deadline_org = detail::optional_time(tj, "deadline", t.period, path);
        t.processor = int(detail::optional_time(tj, "processor", 0, path));
        t.release_offset = detail::optional_time(tj, "release_offset", 0, path);
        if (tj.contains("priority")) {
            t.priority = int(detail::require_time(tj, path, "priority"));
            any_priority = true;
        }
        dag.tasks.push_back(t);
    }
    if (!any_priority)
        assign_rate_monotonic_priorities(dag);

    if (doc.contains("edges")) {
        int k = 0;
        for (const Json& ej : doc["edges"]) {
            std::string path = "$.edges[" + std::to_string(k++) + "]";
            if (!ej.is_array() || ej.size() != 2)
                throw ParseError(path + ": expected [from, to]");
            dag.edges.push_back({ej[0].get<int>(), ej[1].get<int>()});
        }
    }
    if (doc.contains("chains")) {
        int k = 0;
        for (const Json& cj : doc["chains"]) {
            std::string path = "$.chains[" + std::to_string(k++) + "]";
            if (!cj.is_array() || cj.empty())
                throw ParseError(path + ": expected a nonempty task-id array");
            dag.chains.push_back(cj.get<Chain>());
        }
    }
    if (doc.contains("merges")) {
        int k = 0;
        for (const Json& mj : doc["merges"]) {
            std::string path = "$.merges[" + std::to_string(k++) + "]";
            if (!mj.is_object() || !mj.contains("sink") || !mj.contains("sources"))
                throw ParseError(path + ": expected {sink, sources}");
            Merge m;
            m.sink = mj["sink"].get<int>();
            m.sources = mj["sources"].get<std::vector<int>>();
            dag.merges.push_back(std::move(m));
        }
    }
    auto violations = validate(dag);
    if (!violations.empty())
        throw ParseError("$: invalid task set: " + violations.front().message);
    return dag;
}

inline Json task_set_to_json(const TaskDag& dag) {
    Json doc;
    doc["tasks"] = Json::array();
    for (const Task& t : dag.tasks) {
        Json tj;
        tj["id"] = t.id;
        tj["period"] = t.period;
        tj["wcet"] = t.wcet;
        tj["deadline"] = t.deadline_org;
        tj["processor"] = t.processor;
        tj["priority"] = t.priority;
        if (t.release_offset != 0)
            tj["release_offset"] = t.release_offset;
        doc["tasks"].push_back(tj);
    }
    doc["edges"] = Json::array();
    for (const Edge& e : dag.edges)
        doc["edges"].push_back(Json::array({e.from, e.to}));
    doc["chains"] = dag.chains;
    doc["merges"] = Json::array();
    for (const Merge& m : dag.merges)
        doc["merges"].push_back(Json{{"sink", m.sink}, {"sources", m.sources}});
    return doc;
}

inline Json assignment_to_json(const TaskDag& dag, const Assignment& a) {
    Json doc;
    doc["task_ids"] = Json::array();
    doc["offsets"] = Json::array();
    doc["deadlines"] = Json::array();
    for (std::size_t i = 0; i < dag.tasks.size(); ++i) {
        doc["task_ids"].push_back(dag.tasks[i].id);
        doc["offsets"].push_back(a.offset[i]);
        doc["deadlines"].push_back(a.deadline[i]);
    }
    return doc;
}

inline Assignment parse_assignment(const TaskDag& dag, const Json& doc) {
    if (!doc.contains("offsets") || !doc.contains("deadlines"))
        throw ParseError("$: assignment needs \"offsets\" and \"deadlines\"");
    auto offs = doc["offsets"].get<std::vector<Time>>();
    auto dls = doc["deadlines"].get<std::vector<Time>>();
    if (offs.size() != dag.tasks.size() || dls.size() != dag.tasks.size())
        throw ParseError("$: assignment arrays must match the task count");
    if (doc.contains("task_ids")) {
        auto ids = doc["task_ids"].get<std::vector<int>>();
        Assignment a;
        a.offset.assign(dag.tasks.size(), 0);
        a.deadline.assign(dag.tasks.size(), 0);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            int ix = dag.index_of(ids[i]);
            a.offset[ix] = offs[i];
            a.deadline[ix] = dls[i];
        }
        return a;
    }
    return Assignment{offs, dls};
}

inline Json jobs_to_json(const std::vector<Job>& jobs) {
    Json arr = Json::array();
    for (const Job& j : jobs)
        arr.push_back(Json::array({j.task, j.q}));
    return arr;
}

inline Json metrics_to_json(const MetricsReport& rep) {
    Json doc;
    doc["chains"] = Json::array();
    for (auto& c : rep.chains) {
        Json cj;
        cj["tasks"] = c.chain;
        cj["data_age"] = c.data_age;
        cj["data_age_chain"] = jobs_to_json(c.data_age_witness);
        cj["reaction_time"] = c.reaction_time;
        cj["reaction_chain"] = jobs_to_json(c.reaction_witness);
        doc["chains"].push_back(cj);
    }
    doc["merges"] = Json::array();
    for (auto& m : rep.merges) {
        Json mj;
        mj["sink"] = m.merge.sink;
        mj["sources"] = m.merge.sources;
        mj["max_time_disparity"] = m.disparity.max_td;
        mj["min_time_disparity"] = m.disparity.min_td;
        mj["jitter"] = m.disparity.jitter;
        mj["worst_sink_job"] = Json::array({m.disparity.witness_max_sink.task, m.disparity.witness_max_sink.q});
        mj["worst_source_jobs"] = jobs_to_json(m.disparity.witness_max_sources);
        if (m.disparity.single_source)
            mj["single_source"] = true;
        doc["merges"].push_back(mj);
    }
    return doc;
}

inline Json compare_rows_to_json(const std::vector<CompareRow>& rows) {
    Json arr = Json::array();
    for (const CompareRow& r : rows) {
        Json j;
        j["method"] = r.method;
        j["ok"] = r.ok;
        if (!r.ok) {
            j["error"] = r.error;
        } else {
            j["data_age"] = r.data_age;
            j["reaction_time"] = r.reaction;
            j["time_disparity"] = r.td;
            j["jitter"] = r.jitter;
            j["gap_da_pct"] = r.gap_da_pct;
            j["gap_rt_pct"] = r.gap_rt_pct;
        }
        arr.push_back(j);
    }
    return arr;
}

inline std::string compare_rows_to_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream os;
    os << "method,ok,data_age,reaction_time,time_disparity,jitter,gap_da_pct,gap_rt_pct,error\n";
    auto join = [](const std::vector<Time>& v) {
        std::ostringstream s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s << (i ? ";" : "") << v[i];
        return s.str();
    };
    for (const CompareRow& r : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", r.gap_da_pct, r.gap_rt_pct);
        os << r.method << ',' << (r.ok ? 1 : 0) << ',' << join(r.data_age) << ','
           << join(r.reaction) << ',' << join(r.td) << ',' << join(r.jitter) << ',' << buf << ','
           << r.error << '\n';
    }
    return os.str();
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return doc;
}

inline void write_json_file(const std::string& path, const Json& doc) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
}

} // namespace flet
