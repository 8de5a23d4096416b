#pragma once

#include "flet/task_model.hpp"

// Shared test instances.
namespace fixtures {

// Four periodic tasks on one CPU under rate-monotonic scheduling, two
// cause-effect chains 0->1->2 and 3->1->2, and a merge {0,3}->1.
// Response times come out as {1, 5, 2, 7}.
inline flet::TaskDag example1() {
    flet::TaskDag dag;
    dag.tasks = {
        {0, 1, 5, 5, 0, 0},
        {1, 3, 20, 20, 2, 0},
        {2, 1, 10, 10, 1, 0},
        {3, 1, 40, 40, 3, 0},
    };
    dag.edges = {{0, 1}, {1, 2}, {3, 1}};
    dag.chains = {{0, 1, 2}, {3, 1, 2}};
    dag.merges = {{1, {0, 3}}};
    return dag;
}

// Autonomous-robot task set, every task on its own core so R_i = C_i.
// Chain: SLAM(0) -> PathPlanning(1) -> Control(2); merge {Depth(4), PP(1)}
// -> Control; TaskAllocation(3) runs on its own core with no data edges.
inline flet::TaskDag case_study() {
    flet::TaskDag dag;
    dag.tasks = {
        {0, 500, 1000, 1000, 0, 0},
        {1, 1188, 2000, 2000, 0, 1},
        {2, 37, 40, 40, 0, 2},
        {3, 10000, 10000, 10000, 0, 3},
        {4, 400, 500, 500, 0, 4},
    };
    dag.edges = {{0, 1}, {1, 2}, {4, 2}};
    dag.chains = {{0, 1, 2}};
    dag.merges = {{2, {4, 1}}};
    return dag;
}

} // namespace fixtures
