#include <catch2/catch_amalgamated.hpp>

#include "flet/task_model.hpp"
#include "fixtures.hpp"

using namespace flet;

TEST_CASE("hyper_period is the lcm of the periods") {
    CHECK(hyper_period({5, 20, 10, 40}) == 40);
    CHECK(hyper_period({1000, 2000, 40}) == 2000);
    CHECK(hyper_period({20, 10}) == 20);
    CHECK_THROWS_AS(hyper_period(std::vector<Time>{}), std::invalid_argument);
}

TEST_CASE("hyper_period of a superset is a multiple of the subset's") {
    std::vector<Time> s1{5, 20};
    std::vector<Time> s2{10, 40};
    std::vector<Time> all{5, 20, 10, 40};
    CHECK(hyper_period(all) % hyper_period(s1) == 0);
    CHECK(hyper_period(all) % hyper_period(s2) == 0);
}

TEST_CASE("super_period of an edge") {
    TaskDag dag = fixtures::example1();
    CHECK(super_period(dag, {1, 2}) == 20);
    CHECK(super_period(dag, {0, 1}) == 20);
    CHECK(super_period(dag, {3, 1}) == 40);
    CHECK_THROWS_AS(super_period(dag, {2, 0}), std::invalid_argument);
}

TEST_CASE("read and write times of a job") {
    TaskDag dag = fixtures::example1();

    Assignment def = default_let(dag);
    CHECK(read_write_times(dag, def, {2, 3}) == ReadWrite{30, 40});

    Assignment a = def;
    a.offset[dag.index_of(2)] = 6;
    a.deadline[dag.index_of(2)] = 9;
    CHECK(read_write_times(dag, a, {2, 1}) == ReadWrite{16, 19});

    TaskDag one;
    one.tasks = {{0, 1, 5, 5, 0, 0}};
    Assignment b{{4}, {5}};
    CHECK(read_write_times(one, b, {0, -2}) == ReadWrite{-6, -5});
}

TEST_CASE("read_write_times is affine in q with slope T") {
    TaskDag dag = fixtures::example1();
    Assignment a{{0, 11, 6, 0}, {1, 16, 9, 40}};
    for (int id = 0; id <= 3; ++id) {
        Time t = dag.task(id).period;
        for (long long q = -3; q < 3; ++q) {
            ReadWrite lo = read_write_times(dag, a, {id, q});
            ReadWrite hi = read_write_times(dag, a, {id, q + 1});
            CHECK(hi.read - lo.read == t);
            CHECK(hi.write - lo.write == t);
        }
    }
}

TEST_CASE("release offset shifts both read and write") {
    TaskDag dag;
    dag.tasks = {{0, 1, 10, 10, 0, 0, 7}};
    Assignment a{{2}, {9}};
    CHECK(read_write_times(dag, a, {0, 0}) == ReadWrite{9, 16});
}

TEST_CASE("validate accepts the case study") {
    CHECK(validate(fixtures::case_study()).empty());
    CHECK(validate(fixtures::example1()).empty());
}

TEST_CASE("validate reports chain steps that are not edges") {
    TaskDag dag = fixtures::example1();
    dag.chains.push_back({0, 2});
    auto v = validate(dag);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message.find("chain step not an edge") != std::string::npos);
}

TEST_CASE("validate reports cycles") {
    TaskDag dag = fixtures::example1();
    dag.edges.push_back({2, 0});
    auto v = validate(dag);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message.find("cycle") != std::string::npos);
}

TEST_CASE("validate checks task invariants and priorities") {
    TaskDag dag;
    dag.tasks = {{0, 5, 4, 4, 0, 0}, {1, 1, 3, 3, 0, 0}};
    auto v = validate(dag);
    bool has_cdt = false, has_prio = false;
    for (auto& viol : v) {
        has_cdt |= viol.message.find("C <= D^org <= T") != std::string::npos;
        has_prio |= viol.message.find("duplicate priority") != std::string::npos;
    }
    CHECK(has_cdt);
    CHECK(has_prio);
}

TEST_CASE("rate-monotonic priority assignment") {
    TaskDag dag = fixtures::example1();
    for (Task& t : dag.tasks)
        t.priority = 0;
    assign_rate_monotonic_priorities(dag);
    CHECK(dag.task(0).priority < dag.task(2).priority);
    CHECK(dag.task(2).priority < dag.task(1).priority);
    CHECK(dag.task(1).priority < dag.task(3).priority);
}
