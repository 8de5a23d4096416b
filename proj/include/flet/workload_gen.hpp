#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "flet/response_time.hpp"
#include "flet/task_model.hpp"

namespace flet {

/// mt19937_64 with hand-rolled draws so sequences are identical across
/// standard libraries (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0)
            throw std::invalid_argument("below(0)");
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    long long uniform_int(long long lo, long long hi) { // inclusive
        return lo + (long long)below((std::uint64_t)(hi - lo + 1));
    }

    double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

// WATERS-style period table with relative weights.
inline const std::vector<Time>& waters_periods() {
    static const std::vector<Time> p{1, 2, 5, 10, 20, 50, 100, 200, 1000};
    return p;
}

inline const std::vector<int>& waters_period_weights() {
    static const std::vector<int> w{3, 2, 2, 25, 25, 3, 20, 1, 4};
    return w;
}

inline std::vector<Time> gen_periods(int n, Rng& rng) {
    if (n < 1)
        throw std::invalid_argument("gen_periods needs n >= 1");
    const auto& periods = waters_periods();
    const auto& weights = waters_period_weights();
    int total = 0;
    for (int w : weights)
        total += w;
    std::vector<Time> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        int pick = int(rng.below(std::uint64_t(total)));
        for (std::size_t j = 0; j < weights.size(); ++j) {
            if (pick < weights[j]) {
                out.push_back(periods[j]);
                break;
            }
            pick -= weights[j];
        }
    }
    return out;
}

/// UUniFast split of a total utilization into n parts; the whole vector is
/// redrawn while any part exceeds 1.
inline std::vector<double> gen_utilizations(int n, double total, Rng& rng) {
    if (total <= 0)
        throw std::invalid_argument("total utilization must be positive");
    if (total > n)
        throw std::invalid_argument("total utilization exceeds task count");
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> u(n);
        double sum = total;
        for (int i = 0; i < n - 1; ++i) {
            double next = sum * std::pow(rng.uniform01(), 1.0 / double(n - 1 - i));
            u[i] = sum - next;
            sum = next;
        }
        u[n - 1] = sum;
        bool ok = true;
        for (double x : u)
            ok = ok && x <= 1.0;
        if (ok)
            return u;
    }
    throw std::runtime_error("uunifast failed to produce parts <= 1");
}

struct GenConfig {
    int n_tasks = 21;
    int cores = 4;
    double util_lo = 0.5; // total utilization uniform in [lo, hi] * cores
    double util_hi = 0.9;
    double edge_probability = 0.9;
    int chain_count_lo = 0; // 0: default 1.5N .. 3N
    int chain_count_hi = 0;
    int merge_count_lo = 0;
    int merge_count_hi = 0;
    int merge_sources_lo = 2;
    int merge_sources_hi = 9;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::optional<Chain> shortest_path_chain(const std::vector<std::vector<int>>& succ, int src,
                                                int dst) {
    // BFS over forward edges.
    std::vector<int> prev(succ.size(), -1);
    std::vector<int> queue{src};
    prev[src] = src;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int u = queue[qi];
        if (u == dst)
            break;
        for (int v : succ[u])
            if (prev[v] < 0) {
                prev[v] = u;
                queue.push_back(v);
            }
    }
    if (prev[dst] < 0)
        return std::nullopt;
    Chain c;
    for (int v = dst; v != src; v = prev[v])
        c.push_back(v);
    c.push_back(src);
    std::reverse(c.begin(), c.end());
    return c;
}

} // namespace detail

/// One WATERS-style DAG task set draw: periods from the weighted table,
/// UUniFast execution times, forward random edges, shortest-path chains
/// between uniformly sampled source/sink pairs, random merges, worst-fit
/// decreasing processor assignment, rate-monotonic priorities.
inline TaskDag gen_task_set(const GenConfig& cfg, Rng& rng) {
    if (cfg.n_tasks < 2)
        throw std::invalid_argument("need at least 2 tasks");
    const int n = cfg.n_tasks;
    std::vector<Time> periods = gen_periods(n, rng);
    double total_util = cfg.util_lo * cfg.cores +
                        (cfg.util_hi - cfg.util_lo) * cfg.cores * rng.uniform01();
    total_util = std::min(total_util, double(n));
    std::vector<double> utils = gen_utilizations(n, total_util, rng);

    TaskDag dag;
    for (int i = 0; i < n; ++i) {
        Task t;
        t.id = i;
        t.period = periods[i];
        t.deadline_org = periods[i];
        t.wcet = std::max<Time>(1, (Time)std::llround(utils[i] * double(periods[i])));
        t.wcet = std::min(t.wcet, t.period);
        dag.tasks.push_back(t);
    }

    // Worst-fit decreasing by utilization onto the cores.
    {
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            double ua = dag.tasks[a].utilization();
            double ub = dag.tasks[b].utilization();
            if (ua != ub)
                return ua > ub;
            return a < b;
        });
        std::vector<double> load(cfg.cores, 0.0);
        for (int ix : order) {
            int best = 0;
            for (int c = 1; c < cfg.cores; ++c)
                if (load[c] < load[best])
                    best = c;
            dag.tasks[ix].processor = best;
            load[best] += dag.tasks[ix].utilization();
        }
    }
    assign_rate_monotonic_priorities(dag);

    std::vector<std::vector<int>> succ(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform01() < cfg.edge_probability) {
                dag.edges.push_back({i, j});
                succ[i].push_back(j);
            }

    int chain_lo = cfg.chain_count_lo > 0 ? cfg.chain_count_lo : (3 * n + 1) / 2;
    int chain_hi = cfg.chain_count_hi > 0 ? cfg.chain_count_hi : 3 * n;
    int want = int(rng.uniform_int(chain_lo, chain_hi));
    int budget = want * 50;
    while (int(dag.chains.size()) < want && budget-- > 0) {
        int src = int(rng.below(n));
        int dst = int(rng.below(n));
        if (src >= dst)
            continue;
        if (auto c = detail::shortest_path_chain(succ, src, dst); c && c->size() >= 2)
            dag.chains.push_back(*c);
    }
    if (int(dag.chains.size()) < chain_lo)
        throw std::runtime_error("chain extraction failed");

    if (cfg.merge_count_hi > 0) {
        int merges = int(rng.uniform_int(cfg.merge_count_lo, cfg.merge_count_hi));
        std::vector<std::vector<int>> pred(n);
        for (const Edge& e : dag.edges)
            pred[e.to].push_back(e.from);
        int tries = merges * 50;
        while (int(dag.merges.size()) < merges && tries-- > 0) {
            int sink = int(rng.below(n));
            if (int(pred[sink].size()) < 2)
                continue;
            int lo = std::max(2, cfg.merge_sources_lo);
            int hi = std::min<int>(cfg.merge_sources_hi, int(pred[sink].size()));
            if (hi < lo)
                continue;
            int k = int(rng.uniform_int(lo, hi));
            std::vector<int> pool = pred[sink];
            std::vector<int> pick;
            for (int i = 0; i < k; ++i) {
                int at = int(rng.below(pool.size()));
                pick.push_back(pool[at]);
                pool.erase(pool.begin() + at);
            }
            std::sort(pick.begin(), pick.end());
            dag.merges.push_back({sink, pick});
        }
    }
    return dag;
}

/// Draws task sets until one passes validation and the rate-monotonic
/// schedulability filter. The rng advances across attempts, so distinct
/// seeds give distinct instances.
inline TaskDag gen_schedulable_task_set(const GenConfig& cfg, Rng& rng, int max_attempts = 200) {
    for (int i = 0; i < max_attempts; ++i) {
        try {
            TaskDag dag = gen_task_set(cfg, rng);
            if (!validate(dag).empty())
                continue;
            if (try_response_times(dag))
                return dag;
        } catch (const std::runtime_error&) {
            // chain extraction failure: redraw
        }
    }
    throw std::runtime_error("no schedulable task set found");
}

} // namespace flet
