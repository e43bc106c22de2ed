// Command-line front end: run tasks through an agent pyramid, route tasks,
// drive simulations and evolution rounds, and inspect or re-audit runs.

#include "ziggurat/replay.hpp"
#include "ziggurat/ziggurat.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

namespace {

using namespace ziggurat;

std::filesystem::path default_run_dir() {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    return std::filesystem::path("runs") / ("run-" + std::to_string(ms));
}

RunConfig load_config(const std::string& config_path) {
    if (config_path.empty()) return RunConfig{};
    nlohmann::json j = nlohmann::json::parse(read_text_file(config_path), nullptr, false);
    if (j.is_discarded()) fail(Errc::config_error, config_path + " is not valid JSON");
    return RunConfig::from_json(j);
}

// "mock", "scripted:<scenario file>" or "http"
std::unique_ptr<Executor> make_executor(const std::string& spec, const std::string& http_url,
                                        const std::string& http_model,
                                        const std::string& http_key_env) {
    if (spec == "mock") return std::make_unique<MockExecutor>();
    if (spec.rfind("scripted:", 0) == 0) {
        return std::make_unique<ScriptedExecutor>(load_scenario_file(spec.substr(9)));
    }
    if (spec == "http") {
        HttpExecutorConfig cfg;
        if (!http_url.empty()) cfg.base_url = http_url;
        if (!http_model.empty()) cfg.model = http_model;
        if (!http_key_env.empty()) cfg.api_key_env = http_key_env;
        return std::make_unique<HttpExecutor>(cfg);
    }
    fail(Errc::config_error, "unknown executor spec: " + spec +
                                 " (expected mock, scripted:<file> or http)");
}

void print_record_tree(const ExecutionRecord& rec, int indent) {
    std::cout << std::string(static_cast<std::size_t>(indent) * 2, ' ') << rec.task_id << " ["
              << to_string(rec.status) << "] agent=" << rec.agent << " attempt=" << rec.attempt;
    if (!rec.error_information.empty()) std::cout << " error=" << rec.error_information;
    std::cout << "\n";
    for (const auto& child : rec.children) print_record_tree(child, indent + 1);
}

int cmd_route(const std::string& graph_path, const std::string& task_text, double floor) {
    const AgentGraph graph = load_graph_file(graph_path);
    try {
        const RouteResult result = route(Task::root("cli", task_text), graph, {floor});
        std::cout << result.to_json().dump(2) << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

int cmd_run(const std::string& graph_path, const std::string& task_text,
            const std::string& executor_spec, const std::string& config_path,
            std::filesystem::path run_dir, int max_parallel, bool strict_coverage,
            bool dump_context, const std::string& http_url, const std::string& http_model,
            const std::string& http_key_env) {
    const AgentGraph graph = load_graph_file(graph_path);
    RunConfig cfg = load_config(config_path);
    if (max_parallel > 0) cfg.max_parallel = max_parallel;
    if (strict_coverage) cfg.strict_coverage = true;
    if (run_dir.empty()) run_dir = default_run_dir();

    Workspace ws(run_dir);
    auto exec = make_executor(executor_spec, http_url, http_model, http_key_env);
    Orchestrator orch(graph, *exec, ws, cfg);
    if (dump_context) orch.set_context_dump_dir(run_dir / "context");

    const auto started = std::chrono::steady_clock::now();
    const ExecutionRecord rec = orch.execute(Task::root("cli", task_text));
    orch.metrics().set_wall_ms(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count());

    std::uint64_t final_ctx = 0;
    for (const auto& [task, series] : orch.metrics().context_series()) {
        (void)task;
        if (!series.empty()) final_ctx = std::max(final_ctx, series.back());
    }
    const SystemAuditReport report =
        system_audit({rec}, orch.history().total_units(), final_ctx, orch.ledger());

    write_records(run_dir, {rec});
    write_metrics(run_dir, orch.metrics());
    write_audit_report(run_dir, report);

    print_record_tree(rec, 0);
    std::cout << "run dir: " << run_dir.string() << "\n";
    std::cout << "root status: " << to_string(rec.status) << "\n";
    return rec.succeeded() ? 0 : 1;
}

int cmd_simulate(const std::string& graph_path, const std::string& scenario_path, int rounds,
                 const std::string& config_path, std::filesystem::path run_dir) {
    const AgentGraph graph = load_graph_file(graph_path);
    const Scenario scenario = load_scenario_file(scenario_path);
    const RunConfig cfg = load_config(config_path);
    if (run_dir.empty()) run_dir = default_run_dir();
    const SimulationResult result = simulate(cfg, graph, scenario, rounds, run_dir);
    std::cout << "rounds: " << result.rounds.size() << "\n"
              << "all succeeded: " << (result.all_succeeded ? "yes" : "no") << "\n"
              << "history units: " << result.history_units << "\n"
              << "savings ratio: " << result.report.savings_ratio() << "\n"
              << "run dir: " << run_dir.string() << "\n";
    return result.all_succeeded ? 0 : 1;
}

int cmd_evolve(const std::string& graph_path, const std::string& scenario_path, int rounds,
               const std::string& config_path, std::filesystem::path run_dir) {
    const AgentGraph graph = load_graph_file(graph_path);
    const Scenario scenario = load_scenario_file(scenario_path);
    const RunConfig cfg = load_config(config_path);
    if (run_dir.empty()) run_dir = default_run_dir();
    const EvolveOutcome outcome = run_evolution(cfg, graph, scenario, rounds, run_dir);
    std::cout << "merged deltas: " << outcome.main.merged.size() << "\n"
              << "rejected deltas: " << outcome.main.rejected.size() << "\n"
              << "branches kept:";
    for (const auto& b : outcome.kept) std::cout << " " << b.id;
    std::cout << "\nbranches pruned:";
    for (const auto& b : outcome.pruned) std::cout << " " << b.id;
    std::cout << "\ndataset: " << outcome.dataset_file.string() << "\n";
    for (const auto& a : outcome.restructure.actions) std::cout << "restructure: " << a << "\n";
    save_graph_file(outcome.restructure.graph, (run_dir / "evolved_graph.json").string());
    std::cout << "evolved graph: " << (run_dir / "evolved_graph.json").string() << "\n";
    return 0;
}

int cmd_audit(const std::filesystem::path& run_dir) {
    const std::vector<ExecutionRecord> roots = load_records(run_dir);
    std::uint64_t history_units = 0;
    std::uint64_t final_ctx = 0;
    const auto metrics_path = run_dir / "metrics.json";
    if (std::filesystem::exists(metrics_path)) {
        const nlohmann::json m = nlohmann::json::parse(read_text_file(metrics_path));
        history_units = m.value("history_units_final", std::uint64_t{0});
        if (m.contains("context_series")) {
            for (const auto& [task, series] : m.at("context_series").items()) {
                (void)task;
                if (!series.empty()) {
                    final_ctx = std::max(final_ctx, series.back().get<std::uint64_t>());
                }
            }
        }
    }
    const QualityLedger ledger = reconstruct_ledger(roots);
    const SystemAuditReport report = system_audit(roots, history_units, final_ctx, ledger);
    write_audit_report(run_dir, report);
    std::cout << report.to_text();
    return 0;
}

int cmd_inspect(const std::filesystem::path& run_dir) {
    const std::vector<ExecutionRecord> roots = load_records(run_dir);
    for (const auto& rec : roots) print_record_tree(rec, 0);
    const Workspace ws = Workspace::open(run_dir);
    std::cout << "artifacts:\n";
    for (const auto& [addr, desc] : ws.descriptors()) {
        std::cout << "  " << addr.value << " (" << desc.size_bytes << " bytes): " << desc.text
                  << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pyramid-style multi-agent task orchestration"};
    app.require_subcommand(1);

    std::string graph_path;
    std::string task_text;
    std::string executor_spec = "mock";
    std::string scenario_path;
    std::string config_path;
    std::string run_dir;
    std::string http_url;
    std::string http_model;
    std::string http_key_env;
    double floor = 0.0;
    int rounds = 1;
    int max_parallel = 0;
    bool strict_coverage = false;
    bool dump_context = false;

    auto* route_cmd = app.add_subcommand("route", "match a task to the best agent");
    route_cmd->add_option("--graph", graph_path, "graph file")->required();
    route_cmd->add_option("--task", task_text, "task description")->required();
    route_cmd->add_option("--floor", floor, "score floor (exclusive)");

    auto* run_cmd = app.add_subcommand("run", "execute one task end to end");
    run_cmd->add_option("--graph", graph_path, "graph file")->required();
    run_cmd->add_option("--task", task_text, "task description")->required();
    run_cmd->add_option("--executor", executor_spec, "mock | scripted:<file> | http");
    run_cmd->add_option("--config", config_path, "run config JSON file");
    run_cmd->add_option("--run-dir", run_dir, "output directory");
    run_cmd->add_option("--max-parallel", max_parallel, "worker bound override");
    run_cmd->add_flag("--strict-coverage", strict_coverage, "reject decompositions with gaps");
    run_cmd->add_flag("--dump-context", dump_context, "dump per-task context snapshots");
    run_cmd->add_option("--http-url", http_url, "chat-completion endpoint base URL");
    run_cmd->add_option("--http-model", http_model, "model name for HTTP mode");
    run_cmd->add_option("--http-key-env", http_key_env, "env var holding the API key");

    auto* sim_cmd = app.add_subcommand("simulate", "run scripted rounds and collect metrics");
    sim_cmd->add_option("--graph", graph_path, "graph file")->required();
    sim_cmd->add_option("--scenario", scenario_path, "scenario file")->required();
    sim_cmd->add_option("--rounds", rounds, "number of rounds")->required();
    sim_cmd->add_option("--config", config_path, "run config JSON file");
    sim_cmd->add_option("--run-dir", run_dir, "output directory");

    auto* evolve_cmd = app.add_subcommand("evolve", "branch competition and restructuring");
    evolve_cmd->add_option("--graph", graph_path, "graph file")->required();
    evolve_cmd->add_option("--scenario", scenario_path, "scenario file")->required();
    evolve_cmd->add_option("--rounds", rounds, "number of rounds")->required();
    evolve_cmd->add_option("--config", config_path, "run config JSON file");
    evolve_cmd->add_option("--run-dir", run_dir, "output directory");

    auto* audit_cmd = app.add_subcommand("audit", "regenerate the system audit for a run");
    audit_cmd->add_option("--run", run_dir, "run directory")->required();

    auto* inspect_cmd = app.add_subcommand("inspect", "print a run's record tree and artifacts");
    inspect_cmd->add_option("--run", run_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (route_cmd->parsed()) return cmd_route(graph_path, task_text, floor);
        if (run_cmd->parsed()) {
            return cmd_run(graph_path, task_text, executor_spec, config_path, run_dir,
                           max_parallel, strict_coverage, dump_context, http_url, http_model,
                           http_key_env);
        }
        if (sim_cmd->parsed()) {
            return cmd_simulate(graph_path, scenario_path, rounds, config_path, run_dir);
        }
        if (evolve_cmd->parsed()) {
            return cmd_evolve(graph_path, scenario_path, rounds, config_path, run_dir);
        }
        if (audit_cmd->parsed()) return cmd_audit(run_dir);
        if (inspect_cmd->parsed()) return cmd_inspect(run_dir);
    } catch (const ziggurat::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
