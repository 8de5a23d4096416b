#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "flet/chain_metrics.hpp"
#include "flet/schedule_sim.hpp"
#include "fixtures.hpp"

using namespace flet;

namespace {
const JobExec& job_of(const ScheduleTrace& tr, int task_ix, long long q) {
    for (const JobExec& j : tr.jobs[task_ix])
        if (j.q == q)
            return j;
    FAIL("job not in trace");
    throw std::logic_error("unreachable");
}
} // namespace

TEST_CASE("dedicated cores run back to back") {
    TaskDag dag = fixtures::case_study();
    ScheduleTrace tr = simulate(dag, 2);
    for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix)
        for (const JobExec& j : tr.jobs[ix]) {
            if (j.finish < 0)
                continue;
            CHECK(j.start == j.release);
            CHECK(j.finish == j.release + dag.tasks[ix].wcet);
        }
}

TEST_CASE("rate-monotonic trace of the running example") {
    TaskDag dag = fixtures::example1();
    ScheduleTrace tr = simulate(dag, 2);
    // tau0 and tau2 occupy [0,2), then tau1 runs for three units.
    const JobExec& j10 = job_of(tr, dag.index_of(1), 0);
    CHECK(j10.start == 2);
    CHECK(j10.finish == 5);
    const JobExec& j30 = job_of(tr, dag.index_of(3), 0);
    CHECK(j30.finish == 7);
}

TEST_CASE("higher-priority task starts first at a simultaneous release") {
    TaskDag dag;
    dag.tasks = {{0, 2, 10, 10, 0, 0}, {1, 2, 10, 10, 1, 0}};
    ScheduleTrace tr = simulate(dag, 2);
    CHECK(job_of(tr, 0, 0).start == 0);
    CHECK(job_of(tr, 1, 0).start == 2);
}

TEST_CASE("trace repeats after one hyper-period under synchronous release") {
    TaskDag dag = fixtures::example1();
    ScheduleTrace tr = simulate(dag, 2);
    Time h = tr.hyper;
    for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix) {
        long long m = h / dag.tasks[ix].period;
        for (long long q = 0; q < m; ++q) {
            const JobExec& a = job_of(tr, int(ix), q);
            const JobExec& b = job_of(tr, int(ix), q + m);
            CHECK(b.start == a.start + h);
            CHECK(b.finish == a.finish + h);
        }
    }
}

TEST_CASE("every simulated response stays within the RTA bound") {
    TaskDag dag = fixtures::example1();
    ResponseTimes rt = response_times(dag);
    ScheduleTrace tr = simulate(dag, 3);
    for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix)
        for (const JobExec& j : tr.jobs[ix])
            if (j.finish >= 0)
                CHECK(j.finish - j.release <= rt.r[ix]);
}

TEST_CASE("implicit read/write times on the case study") {
    TaskDag dag = fixtures::case_study();
    TraceRwTimes rw = implicit_rw_times(dag);
    // Control on a dedicated core: start = release, finish = release + 37.
    CHECK(rw.rw(dag.index_of(2), 30) == ReadWrite{1200, 1237});
    // Path Planning job 0 writes at its WCET.
    CHECK(rw.rw(dag.index_of(1), 0) == ReadWrite{0, 1188});
    // Negative indices extend periodically.
    CHECK(rw.rw(dag.index_of(0), -2) == ReadWrite{-2000, -1500});
    for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix) {
        ReadWrite x = rw.rw(int(ix), 5);
        CHECK(x.write - x.read == dag.tasks[ix].wcet);
    }
}

TEST_CASE("maia intervals on dedicated cores are [0, C]") {
    TaskDag dag = fixtures::case_study();
    Assignment a = maia_let_intervals(dag, simulate(dag, 3));
    for (std::size_t ix = 0; ix < dag.tasks.size(); ++ix) {
        CHECK(a.offset[ix] == 0);
        CHECK(a.deadline[ix] == dag.tasks[ix].wcet);
    }
}

TEST_CASE("maia intervals start at zero for the highest-priority task") {
    TaskDag dag = fixtures::example1();
    Assignment a = maia_let_intervals(dag, simulate(dag, 3));
    CHECK(a.offset[dag.index_of(0)] == 0);
    CHECK(a.deadline[dag.index_of(0)] == 1);
}

TEST_CASE("exact response times never exceed the RTA fixed point") {
    TaskDag dag = fixtures::example1();
    ResponseTimes rt = response_times(dag);
    ResponseTimes ex = exact_response_times(dag, std::vector<Time>(4, 0));
    for (std::size_t i = 0; i < rt.r.size(); ++i)
        CHECK(ex.r[i] <= rt.r[i]);
}

TEST_CASE("exact response of an isolated task equals its WCET for any offset") {
    TaskDag dag;
    dag.tasks = {{0, 4, 12, 12, 0, 0}};
    ResponseTimes ex = exact_response_times(dag, {3});
    CHECK(ex.r[0] == 4);
}

TEST_CASE("implicit writes precede the first-reacting read") {
    TaskDag dag = fixtures::example1();
    RwOracle oracle = trace_oracle(TraceRwTimes(dag, simulate(dag, 3)));
    for (const Edge& e : dag.edges)
        for (long long q = 0; q < 4; ++q) {
            Job fr = first_reacting_job(dag, e, {e.from, q}, oracle);
            CHECK(oracle(dag.index_of(e.from), q).write <=
                  oracle(dag.index_of(e.to), fr.q).read);
        }
}

TEST_CASE("trace CSV dump has the documented header") {
    TaskDag dag = fixtures::case_study();
    std::ostringstream os;
    dump_trace_csv(dag, simulate(dag, 2), os);
    CHECK(os.str().rfind("task,q,release,start,finish,processor\n", 0) == 0);
}

TEST_CASE("deadline misses are reported with the job") {
    // Two tasks whose combined demand exceeds the processor.
    TaskDag dag;
    dag.tasks = {{0, 5, 10, 10, 0, 0}, {1, 8, 10, 10, 1, 0}};
    CHECK_THROWS_WITH(simulate(dag, 2), Catch::Matchers::ContainsSubstring("deadline miss"));
}
