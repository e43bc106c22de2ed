#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ziggurat;

TEST_CASE("score is cosine overlap of token sets") {
    Task t = Task::root("t", "sort list");
    AgentNode a = zt::make_node("a", 1, Role::functional, {"sort", "search", "list", "graph"});
    // |{sort,list}| = 2 hits over sqrt(2 * 4)
    CHECK(score(t, a) == doctest::Approx(2.0 / std::sqrt(8.0)).epsilon(1e-12));

    SUBCASE("identical token sets give 1") {
        AgentNode same = zt::make_node("s", 1, Role::functional, {"sort", "list"});
        CHECK(score(t, same) == doctest::Approx(1.0));
    }
    SUBCASE("disjoint token sets give 0") {
        AgentNode other = zt::make_node("o", 1, Role::functional, {"paint", "draw"});
        CHECK(score(t, other) == doctest::Approx(0.0));
    }
    SUBCASE("summary tokens count toward the agent set") {
        AgentNode summarized = zt::make_node("m", 1, Role::functional, {}, "sort list");
        CHECK(score(t, summarized) == doctest::Approx(1.0));
    }
}

TEST_CASE("route on a single-agent graph returns that agent with a root path") {
    AgentGraph g(5, 8);
    g.add_agent(zt::make_node("solo", 0, Role::planner, {"sort"}));
    const RouteResult r = route(Task::root("t", "sort numbers"), g);
    CHECK(r.target == "solo");
    CHECK(r.path == std::vector<AgentId>{"solo"});
    CHECK(r.alternatives.empty());
}

TEST_CASE("equal scores break toward the lower level") {
    AgentGraph g(5, 8);
    g.add_agent(zt::make_node("root", 0, Role::planner, {"plan"}));
    g.add_agent(zt::make_node("mid", 1, Role::planner, {"hold"}));
    g.add_agent(zt::make_node("zz_shallow", 1, Role::functional, {"sort"}));
    g.add_agent(zt::make_node("aa_deep", 2, Role::functional, {"sort"}));
    g.connect("root", "mid");
    g.connect("root", "zz_shallow");
    g.connect("mid", "aa_deep");
    const RouteResult r = route(Task::root("t", "sort"), g);
    CHECK(r.target == "zz_shallow");  // same score, level 1 beats level 2
    CHECK(r.path == std::vector<AgentId>{"root", "zz_shallow"});

    SUBCASE("same level breaks toward the smaller id") {
        AgentGraph g2(5, 8);
        g2.add_agent(zt::make_node("root", 0, Role::planner, {"plan"}));
        g2.add_agent(zt::make_node("beta", 1, Role::functional, {"sort"}));
        g2.add_agent(zt::make_node("alfa", 1, Role::functional, {"sort"}));
        g2.connect("root", "beta");
        g2.connect("root", "alfa");
        CHECK(route(Task::root("t", "sort"), g2).target == "alfa");
    }
}

TEST_CASE("no candidate above the floor raises NoCandidate") {
    AgentGraph g(5, 8);
    g.add_agent(zt::make_node("root", 0, Role::planner, {}));
    try {
        route(Task::root("t", "anything"), g);
        FAIL("expected NoCandidate");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::no_candidate);
    }
    CHECK_THROWS_AS(exhaustive_route(Task::root("t", "anything"), g), Error);

    SUBCASE("one tagged agent is found by the oracle") {
        g.add_agent(zt::make_node("tagged", 1, Role::functional, {"anything"}));
        g.connect("root", "tagged");
        CHECK(exhaustive_route(Task::root("t", "anything"), g).target == "tagged");
    }
}

namespace {

AgentGraph random_graph(std::mt19937& rng, int max_nodes) {
    AgentGraph g(2 + static_cast<int>(rng() % 4), 8);
    const char* pool[] = {"sort", "list", "graph", "merge", "report", "data",
                          "code", "plan", "math", "fetch", "draw", "audit"};
    const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_nodes));
    std::vector<std::string> planners;
    for (int i = 0; i < n; ++i) {
        const bool planner = i == 0 || rng() % 3 != 0;
        std::set<std::string> tags;
        const int ntags = static_cast<int>(rng() % 4);
        for (int t = 0; t < ntags; ++t) tags.insert(pool[rng() % 12]);
        if (!planner && tags.empty()) tags.insert(pool[rng() % 12]);
        AgentNode node = zt::make_node("a" + std::to_string(100 + i), i == 0 ? 0 : 1,
                                       planner ? Role::planner : Role::functional, tags);
        g.add_agent(node);
        if (i > 0) {
            // attach under a random planner with spare fan-out
            for (int attempt = 0; attempt < 10; ++attempt) {
                const auto& pid = planners[rng() % planners.size()];
                try {
                    g.connect(pid, node.id);
                    break;
                } catch (const Error&) {
                }
            }
        }
        if (planner) planners.push_back(node.id);
    }
    return g;
}

std::string random_task(std::mt19937& rng) {
    const char* pool[] = {"sort", "list", "graph", "merge", "report", "data",
                          "code", "plan", "math", "fetch", "draw", "audit"};
    std::string desc;
    const int words = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < words; ++i) {
        if (!desc.empty()) desc += " ";
        desc += pool[rng() % 12];
    }
    return desc;
}

} // namespace

TEST_CASE("property: route equals exhaustive_route on random graphs") {
    std::mt19937 rng(424242);
    int compared = 0;
    for (int i = 0; i < 300; ++i) {
        const AgentGraph g = random_graph(rng, 50);
        const Task task = Task::root("t" + std::to_string(i), random_task(rng));
        RouteResult fast;
        RouteResult oracle;
        bool fast_failed = false;
        bool oracle_failed = false;
        try {
            fast = route(task, g);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::no_candidate);
            fast_failed = true;
        }
        try {
            oracle = exhaustive_route(task, g);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::no_candidate);
            oracle_failed = true;
        }
        REQUIRE(fast_failed == oracle_failed);
        if (!fast_failed) {
            CHECK(fast == oracle);
            ++compared;
        }
    }
    CHECK(compared > 100);  // the generator must produce mostly routable cases
}

TEST_CASE("duplicating every task token leaves the argmax unchanged") {
    std::mt19937 rng(99);
    for (int i = 0; i < 50; ++i) {
        const AgentGraph g = random_graph(rng, 30);
        const std::string desc = random_task(rng);
        const Task once = Task::root("a", desc);
        const Task twice = Task::root("b", desc + " " + desc);
        try {
            const AgentId single = route(once, g).target;
            const AgentId doubled = route(twice, g).target;
            CHECK(single == doubled);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::no_candidate);
        }
    }
}

TEST_CASE("routing is deterministic") {
    const AgentGraph g = zt::sales_pyramid();
    const Task task = Task::root("t", "analyze sales statistics");
    const RouteResult a = route(task, g);
    const RouteResult b = route(task, g);
    CHECK(a == b);
    CHECK(a.target == "analyst");
}

TEST_CASE("alternatives are ranked and exclude the target") {
    const AgentGraph g = zt::sales_pyramid();
    const RouteResult r = route(Task::root("t", "sales data report"), g);
    for (std::size_t i = 1; i < r.alternatives.size(); ++i) {
        CHECK(r.alternatives[i - 1].second >= r.alternatives[i].second);
    }
    for (const auto& [id, s] : r.alternatives) {
        CHECK(id != r.target);
        CHECK(s <= r.score);
    }
}

TEST_CASE("the returned path is a valid root-to-target edge chain") {
    std::mt19937 rng(777);
    for (int i = 0; i < 60; ++i) {
        const AgentGraph g = random_graph(rng, 25);
        if (!g.validate().ok()) continue;  // route requires a valid graph
        try {
            const RouteResult r = route(Task::root("t", random_task(rng)), g);
            REQUIRE(!r.path.empty());
            CHECK(g.roots().count(r.path.front()) == 1);
            CHECK(r.path.back() == r.target);
            for (std::size_t p = 1; p < r.path.size(); ++p) {
                const auto& children = g.node(r.path[p - 1]).children;
                CHECK(std::find(children.begin(), children.end(), r.path[p]) != children.end());
            }
        } catch (const Error& e) {
            CHECK(e.code() == Errc::no_candidate);
        }
    }
}
