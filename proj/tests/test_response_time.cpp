#include <catch2/catch_amalgamated.hpp>

#include "flet/response_time.hpp"
#include "fixtures.hpp"

using namespace flet;

TEST_CASE("fixed-point iteration on the running example") {
    TaskDag dag = fixtures::example1();
    const Task& t0 = dag.task(0);
    const Task& t1 = dag.task(1);
    CHECK(rta_fixed_point(t0, {}) == 1);
    CHECK(rta_fixed_point(t1, {dag.task(0), dag.task(2)}) == 5);
}

TEST_CASE("a task alone on its processor has R = C") {
    TaskDag dag = fixtures::case_study();
    CHECK(rta_fixed_point(dag.task(0), {}) == 500);
    ResponseTimes rt = response_times(dag);
    for (std::size_t i = 0; i < dag.tasks.size(); ++i)
        CHECK(rt.r[i] == dag.tasks[i].wcet);
}

TEST_CASE("response times of the running example") {
    ResponseTimes rt = response_times(fixtures::example1());
    CHECK(rt.r == std::vector<Time>{1, 5, 2, 7});
}

TEST_CASE("C > D^org is unschedulable") {
    TaskDag dag;
    dag.tasks = {{0, 6, 10, 5, 0, 0}};
    CHECK_THROWS_AS(response_times(dag), UnschedulableError);
}

TEST_CASE("fixed point is invariant to the starting point") {
    TaskDag dag = fixtures::example1();
    std::vector<Task> hp{dag.task(0), dag.task(2)};
    const Task& t1 = dag.task(1);
    // Iterating from any r0 in [C, R*] converges to the same fixed point.
    for (Time r0 = t1.wcet; r0 <= 5; ++r0) {
        Time r = r0;
        for (;;) {
            Time next = t1.wcet;
            for (const Task& h : hp)
                next += ceil_div(r, h.period) * h.wcet;
            if (next == r)
                break;
            r = next;
        }
        CHECK(r == 5);
    }
}

TEST_CASE("R never decreases when interference grows") {
    TaskDag dag = fixtures::example1();
    std::vector<Task> hp{dag.task(0), dag.task(2)};
    Time base = *rta_fixed_point(dag.task(1), hp);

    std::vector<Task> more = hp;
    more[0].wcet += 1;
    auto grown = rta_fixed_point(dag.task(1), more);
    CHECK((!grown || *grown >= base));

    std::vector<Task> extra = hp;
    extra.push_back({9, 1, 40, 40, -1, 0});
    auto added = rta_fixed_point(dag.task(1), extra);
    CHECK((!added || *added >= base));
}

TEST_CASE("schedulability of interval assignments") {
    TaskDag dag = fixtures::example1();
    ResponseTimes rt = response_times(dag);

    Assignment paper{{0, 11, 6, 0}, {1, 16, 9, 40}};
    CHECK(check_schedulability(dag, paper, rt));

    CHECK(check_schedulability(dag, default_let(dag), rt));

    Assignment bad = default_let(dag);
    bad.deadline[dag.index_of(1)] = 4; // below R_1 = 5
    CHECK_FALSE(check_schedulability(dag, bad, rt));
}
