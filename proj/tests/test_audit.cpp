#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ziggurat;

TEST_CASE("update_quality follows the EMA") {
    SUBCASE("hand-computed value") {
        QualityLedger ledger(0.9, 0.8);  // Q starts at 0.8 for unseen agents
        const double q = ledger.update("a", 1.0);
        CHECK(q == doctest::Approx(0.82).epsilon(1e-12));
    }

    SUBCASE("alpha = 1 ignores new evidence") {
        QualityLedger ledger(1.0, 0.5);
        ledger.update("a", 0.0);
        ledger.update("a", 1.0);
        CHECK(ledger.score("a") == doctest::Approx(0.5));
    }

    SUBCASE("unknown agents initialize at Q0 before the update") {
        QualityLedger ledger(0.5, 0.5);
        CHECK(ledger.score("never_seen") == doctest::Approx(0.5));
        CHECK(ledger.update("fresh", 1.0) == doctest::Approx(0.75));
    }

    SUBCASE("out-of-range scores are rejected") {
        QualityLedger ledger;
        CHECK_THROWS_AS(ledger.update("a", -0.1), Error);
        CHECK_THROWS_AS(ledger.update("a", 1.1), Error);
    }

    SUBCASE("repeated constant v converges within the predicted horizon") {
        const double alpha = 0.9;
        const double target = 0.3;
        QualityLedger ledger(alpha, 0.5);
        const int horizon = static_cast<int>(std::ceil(std::log(1e-6) / std::log(alpha)));
        for (int i = 0; i < horizon; ++i) ledger.update("a", target);
        CHECK(std::abs(ledger.score("a") - target) <= 1e-6);
    }

    SUBCASE("property: scores stay in [0,1] and between the convex endpoints") {
        std::mt19937 rng(31337);
        QualityLedger ledger(0.7, 0.5);
        for (int i = 0; i < 20000; ++i) {
            const double before = ledger.score("a");
            const double v = static_cast<double>(rng() % 10001) / 10000.0;
            const double after = ledger.update("a", v);
            CHECK(after >= 0.0);
            CHECK(after <= 1.0);
            CHECK(after >= std::min(before, v) - 1e-12);
            CHECK(after <= std::max(before, v) + 1e-12);
        }
    }
}

TEST_CASE("validate runs structural checks plus a semantic component") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    ScriptedExecutor exec(Scenario{});  // defaults: semantic 1.0
    const Task task = Task::root("t1", "produce a file");

    SUBCASE("clean output scores 1.0") {
        ws.put(Address("out/a.txt"), "payload", {"the artifact"});
        const AgentOutput out =
            AgentOutput::success_with("done\n" + ref_line({"out/a.txt", "the artifact"}));
        const ValidationResult v = validate(out, task, ws, exec);
        CHECK(v.score == doctest::Approx(1.0));
        CHECK(v.ok());
        CHECK(v.findings.empty());
    }

    SUBCASE("dangling address zeroes that check and names the address") {
        const AgentOutput out =
            AgentOutput::success_with("done\n" + ref_line({"out/missing.txt", "gone"}));
        const ValidationResult v = validate(out, task, ws, exec);
        CHECK(v.structural_score == doctest::Approx(0.5));
        CHECK(!v.ok());
        REQUIRE(!v.findings.empty());
        CHECK(v.findings.front().find("out/missing.txt") != std::string::npos);
    }

    SUBCASE("error status with empty error_information is a contract finding") {
        AgentOutput out;
        out.status = AgentOutput::Status::error;
        out.output = "tried";
        out.error_information = "";  // violates the contract
        const ValidationResult v = validate(out, task, ws, exec);
        CHECK(!v.ok());
        bool found = false;
        for (const auto& f : v.findings) found = found || f.find("contract") != std::string::npos;
        CHECK(found);
    }

    SUBCASE("scripted semantic score feeds the weighted sum") {
        Scenario s;
        ScenarioEntry e;
        e.kind = "validate";
        e.output = "0.4";
        s.entries.push_back(e);
        ScriptedExecutor scripted(s);
        const AgentOutput out = AgentOutput::success_with("no refs");
        const ValidationResult v = validate(out, task, ws, scripted);
        CHECK(v.semantic_score == doctest::Approx(0.4));
        CHECK(v.score == doctest::Approx(0.4 * 1.0 + 0.6 * 0.4));
        CHECK(!v.ok());  // 0.64 is below the 0.7 threshold
    }
}

TEST_CASE("judge verifies without writing") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    const Task task = Task::root("t1", "make a file");

    SUBCASE("scripted acceptance") {
        ws.put(Address("t/ok.txt"), "x", {"fine"});
        ScriptedExecutor exec(Scenario{});
        const AgentOutput out = AgentOutput::success_with("did\n" + ref_line({"t/ok.txt", "fine"}));
        const std::uint64_t hash_before = ws.ledger_hash();
        const ValidationResult v = judge(task, out, ws, exec);
        CHECK(v.ok());
        CHECK(ws.ledger_hash() == hash_before);  // side-effect free
    }

    SUBCASE("claimed file that does not exist is rejected, citing the address") {
        ScriptedExecutor exec(Scenario{});
        const AgentOutput out =
            AgentOutput::success_with("did\n" + ref_line({"t/ghost.txt", "claimed"}));
        const ValidationResult v = judge(task, out, ws, exec);
        CHECK(!v.ok());
        CHECK(zt::join_findings(v.findings).find("t/ghost.txt") != std::string::npos);
    }

    SUBCASE("a write during judgment raises VerifyOnlyViolation") {
        Scenario s;
        ScenarioEntry e;
        e.kind = "judge";
        e.fault = "judge_writes";
        s.entries.push_back(e);
        ScriptedExecutor exec(s);
        exec.bind_workspace(&ws);
        const AgentOutput out = AgentOutput::success_with("did");
        try {
            judge(task, out, ws, exec);
            FAIL("expected VerifyOnlyViolation");
        } catch (const Error& e2) {
            CHECK(e2.code() == Errc::verify_only_violation);
        }
    }

    SUBCASE("judge unavailability: flagged by default, rejected in strict mode") {
        Scenario s;
        s.defaults.judge = false;  // no judge entry and no default: unmatched
        ScriptedExecutor exec(s);
        const AgentOutput out = AgentOutput::success_with("did");
        const ValidationResult lax = judge(task, out, ws, exec);
        CHECK(lax.ok());
        CHECK(!lax.findings.empty());
        AuditConfig strict;
        strict.strict_judge = true;
        const ValidationResult rejected = judge(task, out, ws, exec, strict);
        CHECK(!rejected.ok());
    }

    SUBCASE("error outputs bypass the judge") {
        ScriptedExecutor exec(Scenario{});
        CHECK_THROWS_AS(judge(task, AgentOutput::failure("x", "why"), ws, exec), Error);
    }
}

TEST_CASE("system_audit flags anomalies and reports context savings") {
    SUBCASE("empty record tree gives an empty report") {
        QualityLedger ledger;
        const SystemAuditReport report = system_audit({}, 0, 0, ledger);
        CHECK(report.empty());
        CHECK(report.savings_ratio() == doctest::Approx(0.0));
    }

    SUBCASE("three consecutive rejections are an anomaly") {
        ExecutionRecord rec;
        rec.task_id = "t";
        rec.agent = "flaky";
        rec.status = TaskStatus::failed;
        for (int i = 0; i < 2; ++i) {
            ExecutionRecord prior = rec;
            prior.attempt = i + 1;
            rec.prior_attempts.push_back(prior);
        }
        rec.attempt = 3;
        QualityLedger ledger;
        const SystemAuditReport report = system_audit({rec}, 100, 10, ledger);
        REQUIRE(!report.anomalies.empty());
        CHECK(report.anomalies.front().agent == "flaky");
        CHECK(report.anomalies.front().kind == "repeated_rejections");
    }

    SUBCASE("a sharp quality drop is an anomaly") {
        QualityLedger ledger(0.1, 0.5);  // low smoothing amplifies drops
        ledger.update("volatile", 1.0);
        ledger.update("volatile", 0.0);
        const SystemAuditReport report = system_audit({}, 0, 0, ledger);
        bool flagged = false;
        for (const auto& a : report.anomalies) flagged = flagged || a.kind == "quality_drop";
        CHECK(flagged);
    }

    SUBCASE("clean scripted run: zero anomalies, savings ratio above 1") {
        zt::TempDir dir;
        Workspace ws(dir.path());
        ScriptedExecutor exec(zt::sales_scenario());
        RunConfig cfg;
        cfg.max_parallel = 1;
        Orchestrator orch(zt::sales_pyramid(), exec, ws, cfg);
        const ExecutionRecord rec =
            orch.execute(Task::root("t1", "analyze sales data and write report"));
        REQUIRE(rec.succeeded());
        std::uint64_t final_ctx = 0;
        for (const auto& [task, series] : orch.metrics().context_series()) {
            (void)task;
            if (!series.empty()) final_ctx = std::max(final_ctx, series.back());
        }
        const SystemAuditReport report =
            system_audit({rec}, orch.history().total_units(), final_ctx, orch.ledger());
        CHECK(report.anomalies.empty());
        CHECK(report.savings_ratio() > 1.0);
        CHECK(!report.summaries.empty());
    }
}
