#pragma once
// The recursive agent-as-a-tool lifecycle: route a task to an agent, have
// planners decompose and delegate, functional agents execute atoms, merge
// results upward, and gate every output through validation and the judge.
//
// Sibling sub-tasks run concurrently up to the worker bound; artifact
// addresses are task-scoped by convention so siblings never contend on
// writes. Quality-ledger updates are replayed over the finished record tree
// in deterministic order, which keeps parallel runs reproducible.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/agent_output.hpp"
#include "ziggurat/audit.hpp"
#include "ziggurat/config.hpp"
#include "ziggurat/context.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/executor.hpp"
#include "ziggurat/metrics.hpp"
#include "ziggurat/record.hpp"
#include "ziggurat/router.hpp"
#include "ziggurat/task.hpp"
#include "ziggurat/workspace.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

namespace ziggurat {

namespace detail {

inline double wall_ms_now() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline std::vector<std::string> parse_subtask_lines(const std::string& output) {
    std::vector<std::string> subtasks;
    std::size_t pos = 0;
    while (pos <= output.size()) {
        std::size_t eol = output.find('\n', pos);
        if (eol == std::string::npos) eol = output.size();
        std::string line = output.substr(pos, eol - pos);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.erase(line.begin());
        if (line.rfind("@task ", 0) == 0) {
            std::string desc = line.substr(6);
            while (!desc.empty() && (desc.back() == ' ' || desc.back() == '\r')) desc.pop_back();
            if (!desc.empty()) subtasks.push_back(desc);
        }
        pos = eol + 1;
    }
    return subtasks;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

} // namespace detail

class Orchestrator {
public:
    // The graph is copied: it is immutable during execution by contract, and
    // topology evolution builds new graphs between runs.
    Orchestrator(AgentGraph graph, Executor& exec, Workspace& ws, RunConfig cfg)
        : graph_(std::move(graph)),
          exec_(exec),
          ws_(ws),
          cfg_(std::move(cfg)),
          ledger_(cfg_.alpha, cfg_.initial_quality),
          workers_(worker_count(cfg_, exec)) {
        cfg_.validate();
        audit_cfg_.acceptance_threshold = cfg_.acceptance_threshold;
        audit_cfg_.strict_judge = cfg_.strict_judge;
        ctx_cfg_.token_budget = cfg_.token_budget;
        ctx_cfg_.tau = cfg_.tau;
        ctx_cfg_.lm_fraction = cfg_.lm_fraction;
        exec_.bind_workspace(&ws_);
        for (const auto& [id, node] : graph_.nodes()) ws_.register_agent(id);
    }

    QualityLedger& ledger() { return ledger_; }
    const QualityLedger& ledger() const { return ledger_; }
    HistoryLog& history() { return history_; }
    Metrics& metrics() { return metrics_; }
    const std::map<AgentId, int>& truncation_pressure() const { return truncation_pressure_; }

    void set_context_dump_dir(std::filesystem::path dir) { dump_dir_ = std::move(dir); }

    // Full lifecycle for one root task. Returns the record tree; the root
    // record's status tells success. Throws RoutingFailure when no agent in
    // the whole graph matches the root task.
    ExecutionRecord execute(Task root) {
        if (root.status != TaskStatus::pending) {
            fail(Errc::out_of_range, "root task must be pending");
        }
        const ValidationReport report = graph_.validate();
        if (!report.ok()) {
            fail(Errc::config_error, "graph invalid:\n" + report.to_text());
        }
        RouteResult routed;
        try {
            routed = route(root, graph_, RouterConfig{cfg_.score_floor});
        } catch (const Error& e) {
            if (e.code() == Errc::no_candidate) {
                fail(Errc::routing_failure, std::string("root task: ") + e.what());
            }
            throw;
        }
        ExecutionRecord rec = run_task(std::move(root), routed.target, {});
        replay_audits(rec);
        metrics_.set_history_total(history_.total_units());
        const std::uint64_t tokens = exec_.tokens_consumed();
        metrics_.add_tokens(tokens - last_tokens_seen_);
        last_tokens_seen_ = tokens;
        return rec;
    }

    // Asks the planner's backend for sub-tasks. Proposals beyond k_max are
    // re-requested once, then truncated with a warning; coverage is checked
    // on the accepted set.
    std::vector<Task> decompose(const Task& task, const AgentNode& agent, ExecutionContext& ctx) {
        CoverageVerdict coverage;
        std::vector<std::string> warnings;
        return decompose_impl(task, agent, ctx, "", coverage, warnings);
    }

    // Does the union of the sub-task descriptions entail the parent task?
    // Deterministic executors use token containment: every content token of
    // the parent must appear in some child description.
    CoverageVerdict check_coverage(const Task& task, const std::vector<Task>& subtasks,
                                   ExecutionContext* ctx = nullptr) {
        if (subtasks.empty()) fail(Errc::out_of_range, "coverage requires at least one subtask");
        if (exec_.semantic_review()) {
            Request req;
            req.kind = "coverage";
            req.fields["task"] = task.id;
            req.body = task.description;
            for (const auto& s : subtasks) req.body += "\n- " + s.description;
            ExecutionContext probe;
            const AgentOutput reply =
                invoke_bounded(ctx != nullptr ? *ctx : probe, req);
            CoverageVerdict verdict;
            if (reply.output.rfind("gaps:", 0) == 0) {
                verdict.covered = false;
                for (const auto& tok : tokenize(reply.output.substr(5))) {
                    verdict.gaps.push_back(tok);
                }
            }
            return verdict;
        }
        std::set<std::string> needed = content_tokens(task.description);
        std::set<std::string> offered;
        for (const auto& s : subtasks) {
            for (const auto& tok : tokenize(s.description)) offered.insert(tok);
        }
        CoverageVerdict verdict;
        for (const auto& tok : needed) {
            if (!offered.count(tok)) verdict.gaps.push_back(tok);
        }
        verdict.covered = verdict.gaps.empty();
        return verdict;
    }

    // Merges child outputs into one planner output that references the child
    // artifacts by descriptor and never inlines payloads.
    AgentOutput merge_results(const Task& task, const std::vector<AgentOutput>& child_outputs,
                              ExecutionContext& ctx) {
        if (child_outputs.empty()) {
            fail(Errc::contract_violation, "merge requires at least one child output");
        }
        std::vector<ArtifactRef> child_refs;
        for (const auto& out : child_outputs) {
            for (const auto& ref : out.refs()) child_refs.push_back(ref);
        }
        Request req;
        req.kind = "merge";
        req.fields["task"] = task.id;
        req.fields["n"] = std::to_string(child_outputs.size());
        req.body = task.description;
        for (const auto& ref : child_refs) req.body += "\n" + ref_line(ref);
        const AgentOutput merged = invoke_bounded(ctx, req);
        const std::size_t allowance =
            cfg_.max_inline_output +
            merged.refs().size() * (ws_.config().address_limit + ws_.config().descriptor_limit);
        if (merged.output.size() > allowance) {
            fail(Errc::contract_violation,
                 "merged output is " + std::to_string(merged.output.size()) +
                     " chars; payloads belong in the workspace");
        }
        return merged;
    }

private:
    static int worker_count(const RunConfig& cfg, const Executor& exec) {
        int n = cfg.max_parallel;
        if (exec.concurrency_limit() > 0) n = std::min(n, exec.concurrency_limit());
        return std::clamp(n, 1, 1024);  // semaphore least-max
    }

    AgentOutput invoke_bounded(ExecutionContext& ctx, const Request& req) {
        workers_.acquire();
        struct Release {
            std::counting_semaphore<1024>& sem;
            ~Release() { sem.release(); }
        } release{workers_};
        metrics_.count_executor_call();
        const double started = detail::wall_ms_now();
        AgentOutput out = exec_.invoke(ctx.sys, ctx, req.render());
        if (!exec_.deterministic() && cfg_.task_timeout_ms > 0 &&
            detail::wall_ms_now() - started > static_cast<double>(cfg_.task_timeout_ms)) {
            fail(Errc::timeout, "task exceeded " + std::to_string(cfg_.task_timeout_ms) + " ms");
        }
        return out;
    }

    void note_interaction(ExecutionContext& ctx, InteractionRecord::Kind kind,
                          const std::string& content, const std::string& source,
                          const std::string& task_id) {
        append_interaction(ctx, {kind, content, source}, history_);
        metrics_.record_context_size(task_id, measure(ctx));
        if (cfg_.max_parallel == 1) {
            metrics_.record_history_size(task_id, history_.total_units());
        }
    }

    std::vector<Task> decompose_impl(const Task& task, const AgentNode& agent,
                                     ExecutionContext& ctx, const std::string& feedback,
                                     CoverageVerdict& coverage,
                                     std::vector<std::string>& warnings) {
        if (agent.role != Role::planner) {
            fail(Errc::invalid_role, agent.id + " is not a planner");
        }
        if (task.depth + 1 > cfg_.max_depth) {
            fail(Errc::depth_exceeded, "children of " + task.id + " would sit at depth " +
                                           std::to_string(task.depth + 1) + " > max_depth=" +
                                           std::to_string(cfg_.max_depth));
        }
        auto request_subtasks = [&](bool re_request) {
            Request req;
            req.kind = "decompose";
            req.fields["task"] = task.id;
            if (re_request) req.fields["re"] = "1";
            req.body = task.description;
            if (re_request) {
                req.body += "\nnote: propose at most " + std::to_string(cfg_.k_max) + " sub-tasks";
            }
            if (!feedback.empty()) req.body += "\nprior_feedback: " + feedback;
            AgentOutput out;
            try {
                out = invoke_bounded(ctx, req);
            } catch (const Error& e) {
                if (e.code() == Errc::timeout || e.code() == Errc::unmatched_request ||
                    e.code() == Errc::contract_violation) {
                    throw;
                }
                fail(Errc::executor_failure, e.what());
            }
            note_interaction(ctx, InteractionRecord::Kind::tool_result, out.output, "decompose",
                             task.id);
            return detail::parse_subtask_lines(out.output);
        };

        std::vector<std::string> descs = request_subtasks(false);
        if (descs.empty()) fail(Errc::empty_decomposition, task.id);
        if (static_cast<int>(descs.size()) > cfg_.k_max) {
            const std::size_t first_size = descs.size();
            descs = request_subtasks(true);
            if (descs.empty()) fail(Errc::empty_decomposition, task.id);
            if (static_cast<int>(descs.size()) > cfg_.k_max) {
                warnings.push_back("decomposition truncated from " +
                                   std::to_string(descs.size()) + " (first proposal " +
                                   std::to_string(first_size) + ") to k_max=" +
                                   std::to_string(cfg_.k_max));
                descs.resize(static_cast<std::size_t>(cfg_.k_max));
                std::scoped_lock lock(mutex_);
                ++truncation_pressure_[agent.id];
            }
        }
        std::vector<Task> subtasks;
        subtasks.reserve(descs.size());
        for (std::size_t i = 0; i < descs.size(); ++i) {
            subtasks.push_back(task.child(i, descs[i]));
        }
        coverage = check_coverage(task, subtasks, &ctx);
        if (!coverage.covered) {
            const std::string gaps = detail::join(coverage.gaps, ", ");
            if (cfg_.strict_coverage) {
                fail(Errc::coverage_gap, "decomposition misses: " + gaps);
            }
            warnings.push_back("coverage gaps (advisory): " + gaps);
        }
        return subtasks;
    }

    // Routes a sub-task among the planner's own children (the agent-as-a-tool
    // set), with the router's scoring and tie-breaks.
    const AgentNode* route_among_children(const Task& task, const AgentNode& planner) const {
        const AgentNode* best = nullptr;
        double best_score = 0.0;
        for (const auto& child_id : planner.children) {
            const AgentNode& child = graph_.node(child_id);
            const double s = score(task, child);
            if (s <= cfg_.score_floor) continue;
            const bool wins = best == nullptr || s > best_score ||
                              (s == best_score &&
                               (child.level < best->level ||
                                (child.level == best->level && child.id < best->id)));
            if (wins) {
                best = &child;
                best_score = s;
            }
        }
        return best;
    }

    // A task ready to run: context already snapshotted. Contexts are built at
    // dispatch time, sequentially, so the file-index component reflects the
    // workspace as of delegation and parallel runs stay deterministic.
    struct PreparedTask {
        Task task;
        const AgentNode* agent = nullptr;
        std::vector<StackFrame> stack;
        ExecutionContext ctx;
        std::string dispatch_error;
    };

    PreparedTask prepare_task(Task task, const AgentId& agent_id,
                              std::vector<StackFrame> stack) {
        PreparedTask prepared;
        prepared.agent = &graph_.node(agent_id);
        stack.push_back({agent_id, to_string(prepared.agent->role)});
        prepared.stack = std::move(stack);
        prepared.task = std::move(task);
        try {
            prepared.ctx = build_context(*prepared.agent, ws_, prepared.stack, ctx_cfg_);
        } catch (const Error& e) {
            prepared.dispatch_error = e.what();
        }
        return prepared;
    }

    ExecutionRecord run_task(Task task, const AgentId& agent_id, std::vector<StackFrame> stack) {
        return run_prepared(prepare_task(std::move(task), agent_id, std::move(stack)));
    }

    ExecutionRecord run_prepared(PreparedTask prepared) {
        metrics_.count_task();
        prepared.task.status = TaskStatus::running;
        const AgentNode& agent = *prepared.agent;

        ExecutionRecord base;
        base.task_id = prepared.task.id;
        base.description = prepared.task.description;
        base.agent = agent.id;
        base.role = to_string(agent.role);
        base.start_ms = detail::wall_ms_now();

        if (!prepared.dispatch_error.empty()) {
            base.status = TaskStatus::failed;
            base.error_information = prepared.dispatch_error;
            base.end_ms = detail::wall_ms_now();
            return base;
        }

        ExecutionContext& ctx = prepared.ctx;
        ExecutionRecord rec = agent.role == Role::planner
                                  ? planner_flow(prepared.task, agent, ctx, base)
                                  : atom_flow(prepared.task, agent, ctx, base);
        rec.end_ms = detail::wall_ms_now();
        dump_context(prepared.task.id, agent.id, ctx);
        return rec;
    }

    ExecutionRecord atom_flow(const Task& task, const AgentNode&, ExecutionContext& ctx,
                              const ExecutionRecord& base) {
        std::vector<ExecutionRecord> priors;
        std::string feedback;
        const int max_attempts = cfg_.retries + 1;
        for (int attempt = 1; attempt <= max_attempts; ++attempt) {
            ExecutionRecord rec = base;
            rec.attempt = attempt;
            Request req;
            req.kind = "atom";
            req.fields["task"] = task.id;
            req.fields["attempt"] = std::to_string(attempt);
            req.body = task.description;
            if (!feedback.empty()) {
                note_interaction(ctx, InteractionRecord::Kind::feedback, feedback, "judge",
                                 task.id);
                req.body += "\nprior_feedback: " + feedback;
            }
            note_interaction(ctx, InteractionRecord::Kind::tool_call, req.body, "executor",
                             task.id);
            bool invoked = false;
            try {
                rec.output = invoke_bounded(ctx, req);
                invoked = true;
            } catch (const Error& e) {
                rec.status = TaskStatus::failed;
                rec.error_information = e.what();
                feedback = e.what();
                metrics_.count_fault();
            }
            if (invoked) {
                note_interaction(ctx, InteractionRecord::Kind::tool_result, rec.output.output,
                                 "executor", task.id);
                rec.validation = validate(rec.output, task, ws_, exec_, audit_cfg_);
                metrics_.count_audit();
                bool accepted = rec.validation->ok();
                std::string reason = detail::join(rec.validation->findings, "; ");
                if (!rec.output.ok()) {
                    // Error outputs bypass the judge; the failure is the signal.
                    accepted = false;
                    reason = rec.output.error_information;
                } else if (accepted) {
                    rec.judge_verdict = judge(task, rec.output, ws_, exec_, audit_cfg_);
                    metrics_.count_judge();
                    if (!rec.judge_verdict->ok()) {
                        accepted = false;
                        reason = detail::join(rec.judge_verdict->findings, "; ");
                    }
                }
                if (accepted) {
                    rec.status = TaskStatus::succeeded;
                    rec.prior_attempts = std::move(priors);
                    return rec;
                }
                rec.status = TaskStatus::failed;
                rec.error_information = reason.empty() ? "audit rejected" : reason;
                feedback = rec.error_information;
                metrics_.count_reject();
            }
            if (attempt < max_attempts) {
                metrics_.count_retry();
                priors.push_back(std::move(rec));
            } else {
                rec.error_information = "failed after " + std::to_string(attempt) +
                                        " attempts: " + rec.error_information;
                rec.prior_attempts = std::move(priors);
                return rec;
            }
        }
        ExecutionRecord unreachable = base;  // retries >= 0 guarantees a return above
        unreachable.status = TaskStatus::failed;
        return unreachable;
    }

    ExecutionRecord planner_flow(const Task& task, const AgentNode& agent, ExecutionContext& ctx,
                                 const ExecutionRecord& base) {
        std::vector<ExecutionRecord> priors;
        std::vector<Task> subtasks;
        CoverageVerdict coverage;
        std::vector<std::string> warnings;
        std::string feedback;
        int decompose_attempt = 1;
        const int max_attempts = cfg_.retries + 1;
        for (;; ++decompose_attempt) {
            try {
                subtasks = decompose_impl(task, agent, ctx, feedback, coverage, warnings);
                break;
            } catch (const Error& e) {
                ExecutionRecord rec = base;
                rec.attempt = decompose_attempt;
                rec.status = TaskStatus::failed;
                rec.error_information = e.what();
                rec.warnings = warnings;
                const bool terminal =
                    e.code() == Errc::depth_exceeded || decompose_attempt >= max_attempts;
                if (terminal) {
                    rec.prior_attempts = std::move(priors);
                    return rec;
                }
                metrics_.count_retry();
                feedback = e.what();
                priors.push_back(std::move(rec));
            }
        }

        // Delegate each sub-task to the best-matching child agent. Contexts
        // are snapshotted here, in order, before any sibling starts; the
        // siblings themselves run concurrently (each writes its own
        // task-scoped addresses).
        std::vector<ExecutionRecord> child_records(subtasks.size());
        std::vector<const AgentNode*> targets(subtasks.size());
        std::vector<PreparedTask> prepared(subtasks.size());
        for (std::size_t i = 0; i < subtasks.size(); ++i) {
            targets[i] = route_among_children(subtasks[i], agent);
            if (targets[i] != nullptr) {
                prepared[i] = prepare_task(subtasks[i], targets[i]->id, ctx.shared_stack);
            }
        }
        auto run_child = [&](std::size_t i) {
            if (targets[i] == nullptr) {
                ExecutionRecord rec;
                rec.task_id = subtasks[i].id;
                rec.description = subtasks[i].description;
                rec.status = TaskStatus::failed;
                rec.error_information =
                    std::string(to_string(Errc::routing_failure)) +
                    ": no child of " + agent.id + " matches '" + subtasks[i].description + "'";
                child_records[i] = std::move(rec);
                return;
            }
            try {
                child_records[i] = run_prepared(std::move(prepared[i]));
            } catch (const Error& e) {
                if (e.code() == Errc::verify_only_violation) throw;
                ExecutionRecord rec;
                rec.task_id = subtasks[i].id;
                rec.description = subtasks[i].description;
                rec.agent = targets[i]->id;
                rec.status = TaskStatus::failed;
                rec.error_information = e.what();
                child_records[i] = std::move(rec);
            }
        };
        if (cfg_.max_parallel > 1 && subtasks.size() > 1) {
            std::vector<std::thread> threads;
            std::exception_ptr first_error;
            std::mutex error_mutex;
            threads.reserve(subtasks.size());
            for (std::size_t i = 0; i < subtasks.size(); ++i) {
                threads.emplace_back([&, i] {
                    try {
                        run_child(i);
                    } catch (...) {
                        std::scoped_lock lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                });
            }
            for (auto& t : threads) t.join();
            if (first_error) std::rethrow_exception(first_error);
        } else {
            for (std::size_t i = 0; i < subtasks.size(); ++i) run_child(i);
        }

        ExecutionRecord rec = base;
        rec.attempt = decompose_attempt;
        rec.coverage = coverage;
        rec.warnings = warnings;
        rec.prior_attempts = std::move(priors);
        rec.children = std::move(child_records);

        std::vector<std::string> failures;
        for (const auto& child : rec.children) {
            if (child.failed()) {
                failures.push_back("subtask " + child.task_id + " failed: " +
                                   child.error_information);
            }
        }
        if (!failures.empty()) {
            rec.status = TaskStatus::failed;
            rec.error_information = detail::join(failures, "; ");
            return rec;
        }

        // Children hand their results upward as (addr, desc) messages; the
        // payloads never move.
        for (const auto& child : rec.children) {
            for (const auto& ref : child.output.refs()) {
                Message msg;
                msg.from = child.agent;
                msg.to = agent.id;
                msg.addr = Address(ref.addr);
                msg.desc = ws_.descriptor_for(msg.addr).value_or(Descriptor{ref.desc});
                ws_.send(msg);
            }
        }

        std::vector<AgentOutput> child_outputs;
        child_outputs.reserve(rec.children.size());
        for (const auto& child : rec.children) child_outputs.push_back(child.output);

        std::string merge_feedback;
        for (int attempt = 1; attempt <= max_attempts; ++attempt) {
            rec.attempt = attempt;
            bool invoked = false;
            std::string reason;
            try {
                if (!merge_feedback.empty()) {
                    note_interaction(ctx, InteractionRecord::Kind::feedback, merge_feedback,
                                     "judge", task.id);
                }
                rec.output = merge_results(task, child_outputs, ctx);
                invoked = true;
            } catch (const Error& e) {
                reason = e.what();
                metrics_.count_fault();
            }
            if (invoked) {
                note_interaction(ctx, InteractionRecord::Kind::tool_result, rec.output.output,
                                 "merge", task.id);
                rec.validation = validate(rec.output, task, ws_, exec_, audit_cfg_);
                metrics_.count_audit();
                bool accepted = rec.validation->ok() && rec.output.ok();
                reason = detail::join(rec.validation->findings, "; ");
                if (accepted) {
                    rec.judge_verdict = judge(task, rec.output, ws_, exec_, audit_cfg_);
                    metrics_.count_judge();
                    if (!rec.judge_verdict->ok()) {
                        accepted = false;
                        reason = detail::join(rec.judge_verdict->findings, "; ");
                    }
                }
                if (accepted) {
                    rec.status = TaskStatus::succeeded;
                    return rec;
                }
                metrics_.count_reject();
            }
            if (attempt < max_attempts) {
                metrics_.count_retry();
                merge_feedback = reason;
                ExecutionRecord failed_merge = base;
                failed_merge.attempt = attempt;
                failed_merge.status = TaskStatus::failed;
                failed_merge.output = rec.output;
                failed_merge.validation = rec.validation;
                failed_merge.judge_verdict = rec.judge_verdict;
                failed_merge.error_information = reason;
                rec.prior_attempts.push_back(std::move(failed_merge));
                rec.validation.reset();
                rec.judge_verdict.reset();
            } else {
                rec.status = TaskStatus::failed;
                rec.error_information = "merge failed after " + std::to_string(attempt) +
                                        " attempts: " + reason;
                return rec;
            }
        }
        rec.status = TaskStatus::failed;  // unreachable with retries >= 0
        return rec;
    }

    // Replays the EMA quality updates over the finished tree in a fixed
    // order: children first, then a task's own attempts chronologically.
    void replay_audits(const ExecutionRecord& rec) {
        for (const auto& child : rec.children) replay_audits(child);
        for (const auto& prior : rec.prior_attempts) {
            if (prior.validation && !prior.agent.empty()) {
                ledger_.update(prior.agent, prior.validation->score);
            }
        }
        if (rec.validation && !rec.agent.empty()) {
            ledger_.update(rec.agent, rec.validation->score);
        }
    }

    void dump_context(const std::string& task_id, const AgentId& agent, const ExecutionContext& ctx) {
        if (dump_dir_.empty()) return;
        std::scoped_lock lock(mutex_);
        std::error_code ec;
        std::filesystem::create_directories(dump_dir_, ec);
        nlohmann::json j = ctx.to_json();
        j["task"] = task_id;
        j["agent"] = agent;
        std::ofstream out(dump_dir_ / (task_id + ".json"), std::ios::binary);
        out << j.dump(2) << "\n";
    }

    AgentGraph graph_;
    Executor& exec_;
    Workspace& ws_;
    RunConfig cfg_;
    AuditConfig audit_cfg_;
    ContextConfig ctx_cfg_;
    QualityLedger ledger_;
    HistoryLog history_;
    Metrics metrics_;
    std::counting_semaphore<1024> workers_;
    std::map<AgentId, int> truncation_pressure_;
    std::filesystem::path dump_dir_;
    std::mutex mutex_;
    std::uint64_t last_tokens_seen_ = 0;
};

} // namespace ziggurat
