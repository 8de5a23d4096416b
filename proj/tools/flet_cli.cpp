// Command-line front end: optimize / analyze / generate / bench / compare.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "flet/baselines.hpp"
#include "flet/json_io.hpp"
#include "flet/optimizer.hpp"
#include "flet/workload_gen.hpp"

namespace fs = std::filesystem;
using namespace flet;

namespace {

JitterWeight parse_weight(const std::string& s) {
    JitterWeight w;
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        w.num = std::stoll(s.substr(0, slash));
        w.den = std::stoll(s.substr(slash + 1));
    } else if (auto dot = s.find('.'); dot != std::string::npos) {
        std::string frac = s.substr(dot + 1);
        w.den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i)
            w.den *= 10;
        w.num = std::stoll(s.substr(0, dot)) * w.den + std::stoll(frac);
    } else {
        w.num = std::stoll(s);
        w.den = 1;
    }
    if (w.num < 0 || w.den <= 0)
        throw CLI::ValidationError("--jitter-weight must be nonnegative");
    return w;
}

Metric parse_metric(const std::string& s) {
    if (s == "da")
        return Metric::DataAge;
    if (s == "rt")
        return Metric::ReactionTime;
    if (s == "td")
        return Metric::TimeDisparity;
    throw CLI::ValidationError("--metric must be da, rt or td");
}

SearchMethod parse_method(const std::string& s) {
    if (s == "enum")
        return SearchMethod::Enumerate;
    if (s == "backtrack")
        return SearchMethod::Backtrack;
    if (s == "symbolic")
        return SearchMethod::Symbolic;
    throw CLI::ValidationError("--method must be enum, backtrack or symbolic");
}

std::string iso_timestamp() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
    return buf;
}

Json manifest(const std::string& input, const std::string& method, const std::string& metric,
              const std::string& weight, double time_limit, std::uint64_t seed,
              const std::string& out_dir) {
    Json m;
    m["input"] = input;
    m["method"] = method;
    m["metric"] = metric;
    m["jitter_weight"] = weight;
    m["time_limit_s"] = time_limit;
    m["seed"] = seed;
    m["out"] = out_dir;
    m["timestamp"] = iso_timestamp();
    return m;
}

OptimizationResult run_optimizer(const TaskDag& dag, const ResponseTimes& rt, Metric metric,
                                 SearchMethod method, JitterWeight omega, const SearchConfig& cfg) {
    if (metric == Metric::TimeDisparity)
        return optimize_td_jitter(dag, rt, omega, cfg);
    switch (method) {
    case SearchMethod::Enumerate:
        return optimize_enumerate(dag, rt, metric, cfg);
    case SearchMethod::Backtrack:
        return optimize_backtrack(dag, rt, metric, cfg);
    case SearchMethod::Symbolic:
        return optimize_symbolic(dag, rt, metric, cfg);
    }
    throw std::logic_error("unreachable");
}

int cmd_optimize(const std::string& input, const std::string& metric_s, const std::string& method_s,
                 const std::string& weight_s, double time_limit, std::uint64_t seed,
                 const std::string& out_dir, bool do_refine, bool verbose) {
    TaskDag dag = parse_task_set(load_json_file(input));
    ResponseTimes rt = response_times(dag);
    Metric metric = parse_metric(metric_s);
    JitterWeight omega = parse_weight(weight_s);

    SearchConfig cfg;
    cfg.method = parse_method(method_s);
    cfg.objective = {metric, omega};
    cfg.time_limit_s = time_limit;
    if (verbose)
        cfg.log = [](const std::string& line) { std::cerr << line << '\n'; };

    OptimizationResult res = run_optimizer(dag, rt, metric, cfg.method, omega, cfg);
    if (do_refine)
        res = refine(dag, rt, metric, omega, res);
    if (!res.found) {
        std::cerr << "no feasible pattern found\n";
        return 1;
    }

    fs::create_directories(out_dir);
    write_json_file((fs::path(out_dir) / "assignment.json").string(),
                    assignment_to_json(dag, res.assignment));

    MetricsReport rep = compute_metrics(dag, flet_oracle(dag, res.assignment));
    write_json_file((fs::path(out_dir) / "metrics.json").string(), metrics_to_json(rep));

    Json rj;
    rj["objective"] = res.objective;
    rj["per_chain"] = res.per_chain;
    rj["per_merge_td"] = res.per_merge_td;
    rj["per_merge_jitter"] = res.per_merge_jitter;
    rj["timed_out"] = res.timed_out;
    rj["refined"] = res.refined;
    rj["runtime_s"] = res.runtime_s;
    rj["suboptimality_bound"] = res.bound_total;
    rj["suboptimality_bound_per_chain"] = res.bound_per_chain;
    rj["counters"] = Json{{"combinations_total", res.counters.combinations_total},
                          {"evaluated", res.counters.evaluated},
                          {"pruned_infeasible", res.counters.pruned_infeasible},
                          {"pruned_dominated", res.counters.pruned_dominated}};
    rj["manifest"] = manifest(input, method_s, metric_s, weight_s, time_limit, seed, out_dir);
    write_json_file((fs::path(out_dir) / "result.json").string(), rj);

    std::cout << "objective " << res.objective;
    if (metric == Metric::TimeDisparity) {
        std::cout << " (td";
        for (Time t : res.per_merge_td)
            std::cout << ' ' << t;
        std::cout << ", jitter";
        for (Time j : res.per_merge_jitter)
            std::cout << ' ' << j;
        std::cout << ")";
    }
    std::cout << (res.timed_out ? " [timed out]" : "") << '\n';
    return res.timed_out ? 2 : 0;
}

int cmd_analyze(const std::string& input, const std::string& assignment_file,
                const std::string& baseline, const std::string& out_dir,
                const std::string& trace_csv) {
    TaskDag dag = parse_task_set(load_json_file(input));
    RwOracle oracle;
    if (!assignment_file.empty()) {
        Assignment a = parse_assignment(dag, load_json_file(assignment_file));
        ResponseTimes rt = response_times(dag);
        if (!check_schedulability(dag, a, rt)) {
            std::cerr << "assignment fails the schedulability constraints:\n";
            for (std::size_t i = 0; i < dag.tasks.size(); ++i) {
                if (a.offset[i] < 0)
                    std::cerr << "  task " << dag.tasks[i].id << ": offset < 0\n";
                if (a.offset[i] + rt.r[i] > a.deadline[i])
                    std::cerr << "  task " << dag.tasks[i].id << ": O + R > D (R=" << rt.r[i] << ")\n";
                if (a.deadline[i] > dag.tasks[i].deadline_org)
                    std::cerr << "  task " << dag.tasks[i].id << ": D > original deadline\n";
            }
            return 1;
        }
        oracle = flet_oracle(dag, a);
    } else {
        auto kind = baseline_from_name(baseline.empty() ? "deflet" : baseline);
        if (!kind) {
            std::cerr << "unknown baseline " << baseline << '\n';
            return 1;
        }
        oracle = baseline_oracle(dag, *kind);
    }
    if (!trace_csv.empty()) {
        std::ofstream out(trace_csv);
        dump_trace_csv(dag, simulate(dag, 3), out);
    }
    Json doc = metrics_to_json(compute_metrics(dag, oracle));
    if (out_dir.empty()) {
        std::cout << doc.dump(2) << '\n';
    } else {
        fs::create_directories(out_dir);
        write_json_file((fs::path(out_dir) / "metrics.json").string(), doc);
        std::cout << "wrote " << (fs::path(out_dir) / "metrics.json").string() << '\n';
    }
    return 0;
}

int cmd_generate(int count, int n_tasks, int cores, double util_lo, double util_hi,
                 double edge_prob, int chains_lo, int chains_hi, int merges_lo, int merges_hi,
                 std::uint64_t seed, const std::string& out_dir) {
    GenConfig cfg;
    cfg.n_tasks = n_tasks;
    cfg.cores = cores;
    cfg.util_lo = util_lo;
    cfg.util_hi = util_hi;
    cfg.edge_probability = edge_prob;
    cfg.chain_count_lo = chains_lo;
    cfg.chain_count_hi = chains_hi;
    cfg.merge_count_lo = merges_lo;
    cfg.merge_count_hi = merges_hi;
    cfg.seed = seed;

    fs::create_directories(out_dir);
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        TaskDag dag = gen_schedulable_task_set(cfg, rng);
        write_json_file((fs::path(out_dir) / ("taskset_" + std::to_string(i) + ".json")).string(),
                        task_set_to_json(dag));
    }
    std::cout << "wrote " << count << " task sets to " << out_dir << '\n';
    return 0;
}

int cmd_bench(const std::string& corpus_dir, const std::string& metric_s,
              const std::vector<std::string>& methods, const std::string& weight_s,
              double time_limit, const std::string& out_csv) {
    Metric metric = parse_metric(metric_s);
    JitterWeight omega = parse_weight(weight_s);

    std::vector<fs::path> files;
    for (auto& entry : fs::directory_iterator(corpus_dir))
        if (entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::ostringstream csv;
    csv << "instance,n_tasks,method,metric,value,deflet_value,gap_pct,runtime_ms,timed_out,"
           "evaluated,pruned_infeasible,pruned_dominated,bound\n";
    for (const fs::path& f : files) {
        TaskDag dag;
        ResponseTimes rt;
        try {
            dag = parse_task_set(load_json_file(f.string()));
            rt = response_times(dag);
        } catch (const std::exception& e) {
            std::cerr << f.string() << ": " << e.what() << '\n';
            continue;
        }
        // DefLET reference value for the gap column.
        Time def_value = 0;
        {
            RwOracle def = flet_oracle(dag, default_let(dag));
            if (metric == Metric::TimeDisparity) {
                for (const Merge& m : dag.merges)
                    def_value += time_disparity(dag, m, def).max_td;
            } else {
                for (const Chain& c : dag.chains)
                    def_value += (metric == Metric::DataAge ? data_age(dag, c, def)
                                                            : reaction_time(dag, c, def))
                                     .value;
            }
        }
        for (const std::string& ms : methods) {
            SearchConfig cfg;
            cfg.method = parse_method(ms);
            cfg.time_limit_s = time_limit;
            try {
                OptimizationResult res = run_optimizer(dag, rt, metric, cfg.method, omega, cfg);
                double gap = def_value > 0
                                 ? 100.0 * double(res.objective - def_value) / double(def_value)
                                 : 0.0;
                char gbuf[32];
                std::snprintf(gbuf, sizeof gbuf, "%.3f", gap);
                csv << f.filename().string() << ',' << dag.tasks.size() << ',' << ms << ','
                    << metric_s << ',' << res.objective << ',' << def_value << ',' << gbuf << ','
                    << (long long)(res.runtime_s * 1000) << ',' << (res.timed_out ? 1 : 0) << ','
                    << res.counters.evaluated << ',' << res.counters.pruned_infeasible << ','
                    << res.counters.pruned_dominated << ',' << res.bound_total << '\n';
            } catch (const std::exception& e) {
                std::cerr << f.string() << " [" << ms << "]: " << e.what() << '\n';
            }
        }
    }
    if (out_csv.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_csv);
        out << csv.str();
        std::cout << "wrote " << out_csv << '\n';
    }
    return 0;
}

int cmd_compare(const std::string& input, const std::string& weight_s, double time_limit,
                const std::string& out_dir) {
    TaskDag dag = parse_task_set(load_json_file(input));
    CompareOptions opt;
    opt.omega = parse_weight(weight_s);
    opt.time_limit_s = time_limit;
    std::vector<CompareRow> rows = compare(dag, opt);
    if (out_dir.empty()) {
        std::cout << compare_rows_to_csv(rows);
    } else {
        fs::create_directories(out_dir);
        write_json_file((fs::path(out_dir) / "comparison.json").string(),
                        compare_rows_to_json(rows));
        std::ofstream out(fs::path(out_dir) / "comparison.csv");
        out << compare_rows_to_csv(rows);
        std::cout << "wrote comparison to " << out_dir << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual offset/deadline optimization for flexible logical execution time"};
    app.require_subcommand(1);

    std::string input, out_dir, metric = "da", method = "symbolic", weight = "1";
    std::string assignment_file, baseline, trace_csv;
    double time_limit = 1000;
    std::uint64_t seed = 1;
    bool do_refine = false, verbose = false;

    auto* opt = app.add_subcommand("optimize", "optimize virtual offsets and deadlines");
    opt->add_option("taskset", input, "task-set JSON file")->required();
    opt->add_option("--metric", metric, "da | rt | td");
    opt->add_option("--method", method, "enum | backtrack | symbolic");
    opt->add_option("--jitter-weight", weight, "weight of the jitter term (td only)");
    opt->add_option("--time-limit", time_limit, "seconds");
    opt->add_option("--seed", seed, "seed echoed into the manifest");
    opt->add_option("--out", out_dir, "output directory")->default_val("out");
    opt->add_flag("--refine", do_refine, "second step with offset-aware response times");
    opt->add_flag("--verbose", verbose, "progress log on stderr");

    auto* ana = app.add_subcommand("analyze", "evaluate metrics for an assignment or baseline");
    ana->add_option("taskset", input, "task-set JSON file")->required();
    ana->add_option("--assignment", assignment_file, "assignment JSON file");
    ana->add_option("--baseline", baseline, "deflet | bradatsch16 | maia23 | implicit");
    ana->add_option("--out", out_dir, "output directory (default: stdout)");
    ana->add_option("--dump-trace", trace_csv, "write the schedule trace CSV here");

    int count = 10, n_tasks = 5, cores = 1, chains_lo = 0, chains_hi = 0, merges_lo = 0,
        merges_hi = 0;
    double util_lo = 0.5, util_hi = 0.9, edge_prob = 0.9;
    auto* gen = app.add_subcommand("generate", "generate a random task-set corpus");
    gen->add_option("--count", count, "number of task sets");
    gen->add_option("--tasks", n_tasks, "tasks per set");
    gen->add_option("--cores", cores, "processor count");
    gen->add_option("--util-lo", util_lo, "total utilization lower bound (fraction of cores)");
    gen->add_option("--util-hi", util_hi, "total utilization upper bound");
    gen->add_option("--edge-prob", edge_prob, "forward edge probability");
    gen->add_option("--chains-lo", chains_lo, "chain count lower bound (0: 1.5N)");
    gen->add_option("--chains-hi", chains_hi, "chain count upper bound (0: 3N)");
    gen->add_option("--merges-lo", merges_lo, "merge count lower bound");
    gen->add_option("--merges-hi", merges_hi, "merge count upper bound");
    gen->add_option("--seed", seed, "rng seed");
    gen->add_option("--out", out_dir, "output directory")->default_val("corpus");

    std::vector<std::string> methods{"symbolic"};
    std::string out_csv;
    auto* bench = app.add_subcommand("bench", "run methods over a corpus, emit CSV");
    bench->add_option("corpus", input, "directory of task-set JSON files")->required();
    bench->add_option("--metric", metric, "da | rt | td");
    bench->add_option("--methods", methods, "subset of enum,backtrack,symbolic");
    bench->add_option("--jitter-weight", weight, "weight of the jitter term");
    bench->add_option("--time-limit", time_limit, "seconds per instance");
    bench->add_option("--out", out_csv, "CSV output file (default: stdout)");

    auto* cmp = app.add_subcommand("compare", "baselines vs optimizers on one task set");
    cmp->add_option("taskset", input, "task-set JSON file")->required();
    cmp->add_option("--jitter-weight", weight, "weight of the jitter term");
    cmp->add_option("--time-limit", time_limit, "seconds per optimizer");
    cmp->add_option("--out", out_dir, "output directory (default: stdout CSV)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (opt->parsed())
            return cmd_optimize(input, metric, method, weight, time_limit, seed, out_dir,
                                do_refine, verbose);
        if (ana->parsed())
            return cmd_analyze(input, assignment_file, baseline, out_dir, trace_csv);
        if (gen->parsed())
            return cmd_generate(count, n_tasks, cores, util_lo, util_hi, edge_prob, chains_lo,
                                chains_hi, merges_lo, merges_hi, seed, out_dir);
        if (bench->parsed())
            return cmd_bench(input, metric, methods, weight, time_limit, out_csv);
        if (cmp->parsed())
            return cmd_compare(input, weight, time_limit, out_dir);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
