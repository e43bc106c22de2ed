#pragma once
// End-to-end drivers: simulate() runs scripted rounds through the full
// lifecycle and emits metrics, record trees and the system audit report;
// run_evolution() layers branch competition, judge-gated merging, pruning and
// topology restructuring on top.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/config.hpp"
#include "ziggurat/evolution.hpp"
#include "ziggurat/orchestrator.hpp"
#include "ziggurat/run_io.hpp"
#include "ziggurat/scenario.hpp"
#include "ziggurat/system_audit.hpp"

#include <chrono>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace ziggurat {

struct SimulationResult {
    std::vector<ExecutionRecord> rounds;
    SystemAuditReport report;
    std::filesystem::path run_dir;
    std::uint64_t history_units = 0;
    bool all_succeeded = true;
};

// Runs `rounds` root tasks from the scenario through one orchestrator (the
// ledger and history accumulate across rounds). Identical (seed, config,
// graph, scenario) inputs produce byte-identical records.json/metrics.json;
// the seed feeds scheduling jitter only.
inline SimulationResult simulate(const RunConfig& cfg, const AgentGraph& graph,
                                 const Scenario& scenario, int rounds,
                                 const std::filesystem::path& run_dir) {
    if (scenario.tasks.empty()) fail(Errc::scenario_error, "scenario declares no tasks");
    const auto started = std::chrono::steady_clock::now();
    std::mt19937_64 jitter(cfg.seed);

    Workspace ws(run_dir);
    ScriptedExecutor exec(scenario);
    Orchestrator orch(graph, exec, ws, cfg);

    SimulationResult result;
    result.run_dir = run_dir;
    std::uint64_t last_context_units = 0;
    for (int r = 0; r < rounds; ++r) {
        if (cfg.seed != 0) {
            std::this_thread::sleep_for(std::chrono::microseconds(jitter() % 500));
        }
        Task root = Task::root("round" + std::to_string(r + 1),
                               scenario.tasks[static_cast<std::size_t>(r) % scenario.tasks.size()]);
        ExecutionRecord rec = orch.execute(std::move(root));
        result.all_succeeded = result.all_succeeded && rec.succeeded();
        result.rounds.push_back(std::move(rec));
    }
    // Final live-context size: last recorded measurement across tasks.
    for (const auto& [task_id, series] : orch.metrics().context_series()) {
        (void)task_id;
        if (!series.empty()) last_context_units = std::max(last_context_units, series.back());
    }
    result.history_units = orch.history().total_units();
    result.report = system_audit(result.rounds, result.history_units, last_context_units,
                                 orch.ledger());
    orch.metrics().set_wall_ms(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count());

    write_records(run_dir, result.rounds);
    write_metrics(run_dir, orch.metrics());
    write_audit_report(run_dir, result.report);
    return result;
}

struct EvolveOutcome {
    MainBranch main;
    std::vector<Branch> kept;
    std::vector<Branch> pruned;
    RestructureResult restructure;
    std::filesystem::path dataset_file;
    std::vector<std::string> warnings;
    std::vector<std::string> train_log;  // default hook: invocation recorder
    std::map<std::string, std::vector<ExecutionRecord>> branch_records;
};

// Branch competition over `rounds` tasks: every backend executes each round
// in its own workspace sub-root, judge verdicts gate delta merging, branch
// quality tracks the audit EMA, then pruning and restructuring run once at
// the end.
inline EvolveOutcome run_evolution(const RunConfig& cfg, const AgentGraph& graph,
                                   const Scenario& scenario, int rounds,
                                   const std::filesystem::path& run_dir,
                                   const TrainHook& train_hook = {}) {
    if (scenario.backends.empty()) fail(Errc::no_backends, "scenario declares no backends");
    if (scenario.tasks.empty()) fail(Errc::scenario_error, "scenario declares no tasks");

    EvolveOutcome outcome;
    Task probe = Task::root("evolve", scenario.tasks.front());
    SpawnResult spawned = spawn_branches(probe, scenario.backends, run_dir);
    outcome.warnings = spawned.warnings;

    QualityLedger branch_ledger(cfg.alpha, cfg.initial_quality);
    EvolutionConfig evo_cfg{cfg.prune_threshold, static_cast<std::size_t>(cfg.min_observations),
                            cfg.fuse_threshold, cfg.split_observations};
    std::map<AgentId, int> pressure;

    for (int r = 0; r < rounds; ++r) {
        const std::string task_desc =
            scenario.tasks[static_cast<std::size_t>(r) % scenario.tasks.size()];
        std::vector<Delta> round_deltas;
        for (auto& branch : spawned.branches) {
            Workspace ws(branch.workspace_root);
            ScriptedExecutor exec(scenario, branch.id);
            Orchestrator orch(graph, exec, ws, cfg);
            Task root = Task::root("r" + std::to_string(r + 1), task_desc);
            ExecutionRecord rec = orch.execute(std::move(root));
            outcome.branch_records[branch.id].push_back(rec);

            Delta delta;
            delta.id = "r" + std::to_string(r + 1) + ":" + branch.id;
            delta.branch_id = branch.id;
            delta.task_id = rec.task_id;
            delta.task_description = task_desc;
            delta.output_json = rec.output.to_json();
            for (const auto& ref : rec.output.refs()) delta.artifact_addrs.push_back(ref.addr);
            const bool accepted = rec.succeeded() &&
                                  (!rec.judge_verdict.has_value() || rec.judge_verdict->ok());
            delta.judge_accept = accepted;
            round_deltas.push_back(std::move(delta));

            const double v = rec.validation ? rec.validation->score : (rec.succeeded() ? 1.0 : 0.0);
            branch_ledger.update(branch.id, v);
            for (const auto& [agent, n] : orch.truncation_pressure()) pressure[agent] += n;
        }
        outcome.main = merge_deltas(std::move(outcome.main), round_deltas);
    }

    PruneResult pruned = prune_branches(spawned.branches, branch_ledger, evo_cfg);
    outcome.kept = pruned.kept;
    outcome.pruned = pruned.pruned;
    outcome.restructure = restructure_topology(graph, branch_ledger, evo_cfg, pressure);

    for (const auto& [branch_id, records] : outcome.branch_records) {
        write_records(run_dir / "branches" / branch_id, records);
    }

    outcome.dataset_file =
        export_dataset(accumulate_training_data(outcome.main), run_dir / "dataset.jsonl");
    write_text_file(run_dir / "lineage.json", outcome.restructure.lineage_to_json().dump(2) + "\n");

    for (const auto& branch : outcome.kept) {
        if (train_hook) {
            train_hook(branch, outcome.dataset_file);
        } else {
            outcome.train_log.push_back("train(" + branch.id + ", " +
                                        outcome.dataset_file.string() + ")");
        }
    }
    write_text_file(run_dir / "train_invocations.txt",
                    detail::join(outcome.train_log, "\n") + (outcome.train_log.empty() ? "" : "\n"));
    return outcome;
}

} // namespace ziggurat
