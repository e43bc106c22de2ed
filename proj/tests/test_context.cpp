#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace ziggurat;

namespace {

InteractionRecord unit_record(int i) {
    // <= 4 chars, exactly 1 unit under the default meter
    return {InteractionRecord::Kind::tool_call, "r" + std::to_string(i % 100), "t"};
}

} // namespace

TEST_CASE("measure uses the ceil(chars/4) proxy and is additive") {
    ExecutionContext ctx;
    ctx.sys = std::string(40, 's');
    CHECK(measure(ctx) == 10);

    ctx.lm_index.push_back({std::string(8, 'd'), "text", 0});
    ctx.shared_stack.push_back({"agent1", "planner"});
    ctx.env_log.push_back({InteractionRecord::Kind::tool_call, std::string(7, 'e'), ""});
    CHECK(measure(ctx) ==
          measure_sys(ctx) + measure_lm(ctx) + measure_sm(ctx) + measure_env(ctx));
    CHECK(measure_lm(ctx) == 2);
    CHECK(measure_env(ctx) == 2);  // ceil(7/4)

    SUBCASE("the meter is pluggable") {
        ctx.cfg.meter = [](std::string_view s) { return static_cast<std::uint64_t>(s.size()); };
        CHECK(measure_sys(ctx) == 40);
    }
}

TEST_CASE("build_context assembles the four components") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    const AgentNode agent = zt::make_node("a1", 1, Role::functional, {"work"}, "does work");

    SUBCASE("empty workspace gives an empty file index") {
        const ExecutionContext ctx = build_context(agent, ws, {{"top", "planner"}}, {});
        CHECK(ctx.lm_index.empty());
        CHECK(ctx.env_log.empty());
        REQUIRE(ctx.shared_stack.size() == 1);
        CHECK(ctx.shared_stack.front().agent == "top");
        CHECK(!ctx.sys.empty());
    }

    SUBCASE("100 indexed files stay within the file-index sub-budget") {
        for (int i = 0; i < 100; ++i) {
            ws.put(Address("f" + std::to_string(i) + ".txt"), std::string(5000, 'x'),
                   {"descriptor for file number " + std::to_string(i) +
                    " holding many interesting bytes of content"});
        }
        ContextConfig cfg;
        cfg.token_budget = 4096;
        const ExecutionContext ctx = build_context(agent, ws, {}, cfg);
        CHECK(measure_lm(ctx) <= cfg.lm_budget());
        CHECK(!ctx.lm_index.empty());
    }

    SUBCASE("two oversized descriptors still converge below the sub-budget") {
        ws.put(Address("a.txt"), "x", {std::string(300, 'a')});
        ws.put(Address("b.txt"), "x", {std::string(300, 'b')});
        ContextConfig cfg;
        const auto index = compress_descriptors(ws.descriptors(), 40, cfg);
        std::uint64_t total = 0;
        for (const auto& d : index) total += cfg.measure(d.text);
        CHECK(total <= 40);
    }

    SUBCASE("a system prompt larger than the budget is impossible") {
        AgentNode verbose = agent;
        verbose.system_prompt = std::string(4000, 'p');
        ContextConfig cfg;
        cfg.token_budget = 100;
        try {
            build_context(verbose, ws, {}, cfg);
            FAIL("expected BudgetImpossible");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::budget_impossible);
        }
    }
}

TEST_CASE("append_interaction compresses the oldest prefix past tau") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    const AgentNode agent = zt::make_node("a1", 1, Role::functional, {"work"});
    ContextConfig cfg;
    cfg.token_budget = 4096;
    cfg.tau = 128;
    ExecutionContext ctx = build_context(agent, ws, {}, cfg);
    HistoryLog hist;

    SUBCASE("no compression below tau") {
        for (int i = 0; i < 100; ++i) append_interaction(ctx, unit_record(i), hist);
        CHECK(ctx.env_log.size() == 100);
        CHECK(measure_env(ctx) == 100);
        for (const auto& r : ctx.env_log) CHECK(r.kind != InteractionRecord::Kind::summary);
    }

    SUBCASE("crossing tau summarizes exactly enough prefix") {
        for (int i = 0; i < 400; ++i) {
            append_interaction(ctx, unit_record(i), hist);
            CHECK(measure_env(ctx) <= cfg.tau);
            // the newest record always survives verbatim
            CHECK(ctx.env_log.back().content == unit_record(i).content);
        }
        CHECK(hist.size() == 400);             // history never compressed
        CHECK(hist.total_units() == 400);
        CHECK(ctx.env_log.front().kind == InteractionRecord::Kind::summary);
        // chronology: every record after the leading summaries is verbatim recent
        std::size_t summaries = 0;
        for (const auto& r : ctx.env_log) {
            if (r.kind == InteractionRecord::Kind::summary) ++summaries;
        }
        CHECK(summaries >= 1);
        CHECK(summaries <= 2);
    }

    SUBCASE("a single record beyond tau escalates") {
        InteractionRecord huge{InteractionRecord::Kind::tool_result,
                               std::string((cfg.tau + 1) * 4, 'h'), ""};
        try {
            append_interaction(ctx, huge, hist);
            FAIL("expected BudgetImpossible");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::budget_impossible);
        }
    }

    SUBCASE("summary records cannot be appended from outside") {
        InteractionRecord fake{InteractionRecord::Kind::summary, "forged", ""};
        CHECK_THROWS_AS(append_interaction(ctx, fake, hist), Error);
    }
}

TEST_CASE("compress_records is deterministic and non-expanding") {
    ContextConfig cfg;

    SUBCASE("singleton summary contains the record content") {
        const InteractionRecord one{InteractionRecord::Kind::tool_result, "lonely result", ""};
        const InteractionRecord summary = compress_records({one}, cfg);
        CHECK(summary.kind == InteractionRecord::Kind::summary);
        CHECK(summary.content.find("lonely result") != std::string::npos);
    }

    SUBCASE("ten unit records give the golden summary") {
        std::vector<InteractionRecord> records;
        for (int i = 1; i <= 10; ++i) {
            records.push_back({InteractionRecord::Kind::tool_call, "r" + std::to_string(i), ""});
        }
        const InteractionRecord summary = compress_records(records, cfg);
        CHECK(summary.content == "[summary of 10 records] first: r1 | last: r10");
    }

    SUBCASE("property: compressing twice never grows") {
        std::mt19937 rng(5);
        for (int i = 0; i < 100; ++i) {
            std::vector<InteractionRecord> records;
            const int n = 1 + static_cast<int>(rng() % 20);
            for (int r = 0; r < n; ++r) {
                records.push_back({InteractionRecord::Kind::tool_result,
                                   std::string(1 + rng() % 400, 'a' + (rng() % 26)), ""});
            }
            const InteractionRecord once = compress_records(records, cfg);
            const InteractionRecord twice = compress_records({once}, cfg);
            CHECK(cfg.measure(twice.content) <= cfg.measure(once.content));
        }
    }
}

TEST_CASE("long run: context stays bounded while history grows linearly") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    const AgentNode agent = zt::make_node("a1", 1, Role::functional, {"work"});
    ContextConfig cfg;
    cfg.token_budget = 512;
    cfg.tau = 128;
    ExecutionContext ctx = build_context(agent, ws, {}, cfg);
    HistoryLog hist;
    std::uint64_t last_hist = 0;
    for (int step = 0; step < 1000; ++step) {
        InteractionRecord rec{InteractionRecord::Kind::tool_result,
                              "step " + std::to_string(step) + " produced forty-odd chars....",
                              "tool"};
        append_interaction(ctx, rec, hist);
        CHECK(measure(ctx) <= cfg.token_budget);
        CHECK(measure_env(ctx) <= cfg.tau);
        CHECK(hist.total_units() >= last_hist);  // monotone growth
        last_hist = hist.total_units();
    }
    CHECK(hist.total_units() > 10 * cfg.token_budget);
    CHECK(hist.size() == 1000);
}
