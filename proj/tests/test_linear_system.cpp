#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "flet/linear_system.hpp"

using namespace flet;

namespace {
VarId O(int i) { return offset_var(i); }
VarId D(int i) { return deadline_var(i); }

bool satisfies(const std::vector<LinConstraint>& cs, const Witness& w) {
    auto val = [&](const std::optional<VarId>& v) { return v ? w.at(*v) : 0; };
    for (const LinConstraint& c : cs)
        if (val(c.plus) - val(c.minus) > c.bound)
            return false;
    return true;
}
} // namespace

TEST_CASE("empty system is feasible with an all-zero witness") {
    auto w = feasibility({});
    REQUIRE(w);
    CHECK(w->empty());
}

TEST_CASE("infeasible pattern constraint set") {
    // D_0 >= 1, D_0 <= 5, 15 <= O_1 - D_0 < 20, O_1 <= 15
    std::vector<LinConstraint> cs{
        lower(D(0), 1), upper(D(0), 5),
        diff_le(D(0), O(1), -15), diff_le(O(1), D(0), 19),
        upper(O(1), 15),
    };
    CHECK_FALSE(feasibility(cs));
    CHECK_FALSE(lp_feasible(cs));
}

TEST_CASE("negative cycle is infeasible") {
    std::vector<LinConstraint> cs{diff_le(O(0), O(1), -1), diff_le(O(1), O(0), -1)};
    CHECK_FALSE(feasibility(cs));
}

TEST_CASE("feasible system yields an integral witness satisfying everything") {
    std::vector<LinConstraint> cs{
        lower(D(0), 1), upper(D(0), 5),
        diff_le(D(0), O(1), -10), diff_le(O(1), D(0), 14),
        upper(O(1), 15), lower(O(1), 0),
    };
    auto w = feasibility(cs);
    REQUIRE(w);
    CHECK(satisfies(cs, *w));
}

TEST_CASE("negative-cycle route agrees with the simplex route") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<LinConstraint> cs;
        int nvars = 3 + int(rng() % 3);
        int ncons = 4 + int(rng() % 6);
        for (int i = 0; i < ncons; ++i) {
            int a = int(rng() % nvars), b = int(rng() % nvars);
            Time c = Time(rng() % 21) - 10;
            int form = int(rng() % 3);
            if (form == 0 && a != b)
                cs.push_back(diff_le(O(a), O(b), c));
            else if (form == 1)
                cs.push_back(upper(O(a), c));
            else
                cs.push_back(lower(O(a), c));
        }
        bool bf = feasibility(cs).has_value();
        bool lp = lp_feasible(cs);
        CHECK(bf == lp);
    }
}

TEST_CASE("group collapsing: same variable pair keeps the largest constant") {
    // max(D_2 - O_0 + 10, D_2 - O_0) with D_2 >= 8, O_0 <= 4  ->  14
    std::vector<LinConstraint> cs{lower(D(2), 8), upper(O(0), 4)};
    MinMaxObjective obj;
    obj.max_groups.push_back({{Term{D(2), O(0), 10}, Term{D(2), O(0), 0}}});
    auto sol = solve_min_max(cs, obj);
    REQUIRE(sol);
    CHECK(sol->value == 14);
    CHECK(eval_objective(obj, sol->witness) == sol->value);
    CHECK(satisfies(cs, sol->witness));
}

TEST_CASE("empty objective evaluates to zero") {
    std::vector<LinConstraint> cs{lower(O(0), 0), upper(O(0), 3)};
    auto sol = solve_min_max(cs, {});
    REQUIRE(sol);
    CHECK(sol->value == 0);
}

TEST_CASE("infeasible system reports no solution") {
    std::vector<LinConstraint> cs{upper(O(0), -1), lower(O(0), 0)};
    CHECK_FALSE(solve_min_max(cs, {}).has_value());
}

TEST_CASE("single max group over several variable pairs") {
    // minimize max(x - y, y - x) subject to 0 <= x,y <= 10 -> 0
    std::vector<LinConstraint> cs{lower(O(0), 0), upper(O(0), 10), lower(O(1), 0), upper(O(1), 10)};
    MinMaxObjective obj;
    obj.max_groups.push_back({{Term{O(0), O(1), 0}, Term{O(1), O(0), 0}}});
    auto sol = solve_min_max(cs, obj);
    REQUIRE(sol);
    CHECK(sol->value == 0);
}

TEST_CASE("integer minimum of an odd-centered spread is 1") {
    // max(x - y, y - x + 1): the continuous optimum 1/2 is not integral;
    // over integer assignments the best value is 1.
    std::vector<LinConstraint> cs{lower(O(0), 0), upper(O(0), 10), lower(O(1), 0), upper(O(1), 10)};
    MinMaxObjective obj;
    obj.max_groups.push_back({{Term{O(0), O(1), 0}, Term{O(1), O(0), 1}}});
    auto sol = solve_min_max(cs, obj);
    REQUIRE(sol);
    CHECK(sol->value == 1);
    CHECK(eval_objective(obj, sol->witness) == 1);
}

TEST_CASE("sum of singleton groups is solved exactly with integral witness") {
    std::vector<LinConstraint> cs{
        lower(O(0), 0), diff_le(O(0), D(0), -2), upper(D(0), 9),
        lower(O(1), 0), diff_le(O(1), D(1), -3), upper(D(1), 7),
        diff_le(D(0), O(1), 1), // couple the two blocks
    };
    MinMaxObjective obj;
    obj.max_groups.push_back({{Term{D(0), O(0), 5}}});
    obj.max_groups.push_back({{Term{D(1), O(1), 0}}});
    auto sol = solve_min_max(cs, obj);
    REQUIRE(sol);
    CHECK(sol->value == 10); // (2 + 5) + 3
    CHECK(satisfies(cs, sol->witness));
    CHECK(eval_objective(obj, sol->witness) == sol->value);
}

TEST_CASE("min groups subtract and are maximized by the solver") {
    // minimize max(x - z, y - z) - min(x - z, y - z) over boxes
    std::vector<LinConstraint> cs{
        lower(O(0), 2), upper(O(0), 6), lower(O(1), 4), upper(O(1), 9),
        lower(O(2), 0), upper(O(2), 0),
    };
    MinMaxObjective obj;
    obj.max_groups.push_back({{Term{O(0), O(2), 0}, Term{O(1), O(2), 0}}});
    obj.min_groups.push_back({{Term{O(0), O(2), 0}, Term{O(1), O(2), 0}}});
    auto sol = solve_min_max(cs, obj);
    REQUIRE(sol);
    CHECK(sol->value == 0); // x = y is reachable in [4,6]
}

TEST_CASE("random min-max instances agree with grid search") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        // Three variables boxed in [0,6]; random difference constraints and
        // a random objective of up to two groups.
        std::vector<LinConstraint> cs;
        for (int v = 0; v < 3; ++v) {
            cs.push_back(lower(O(v), 0));
            cs.push_back(upper(O(v), 6));
        }
        int extra = int(rng() % 3);
        for (int i = 0; i < extra; ++i) {
            int a = int(rng() % 3), b = int(rng() % 3);
            if (a == b)
                continue;
            cs.push_back(diff_le(O(a), O(b), Time(rng() % 9) - 2));
        }
        MinMaxObjective obj;
        int groups = 1 + int(rng() % 2);
        for (int gi = 0; gi < groups; ++gi) {
            MaxGroup g;
            int terms = 1 + int(rng() % 3);
            for (int t = 0; t < terms; ++t) {
                int a = int(rng() % 3), b = int(rng() % 3);
                g.terms.push_back({O(a), O(b), Time(rng() % 7) - 3});
            }
            obj.max_groups.push_back(g);
        }

        auto sol = solve_min_max(cs, obj);

        // Brute force over the integer grid.
        bool any = false;
        Time best = 0;
        for (Time x = 0; x <= 6; ++x)
            for (Time y = 0; y <= 6; ++y)
                for (Time z = 0; z <= 6; ++z) {
                    Witness w{{O(0), x}, {O(1), y}, {O(2), z}};
                    if (!satisfies(cs, w))
                        continue;
                    Time v = eval_objective(obj, w);
                    if (!any || v < best) {
                        best = v;
                        any = true;
                    }
                }
        REQUIRE(sol.has_value() == any);
        if (any) {
            if (obj.max_groups.size() == 1) {
                CHECK(sol->value == best); // single group: exact integer optimum
            } else {
                // witness-realized value: optimal up to one unit per group
                CHECK(sol->value >= best);
                CHECK(sol->value <= best + Time(obj.max_groups.size()));
            }
            CHECK(satisfies(cs, sol->witness));
            CHECK(eval_objective(obj, sol->witness) == sol->value);
        }
    }
}
