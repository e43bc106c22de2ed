#pragma once
// Dual-audit building blocks: per-output validation with EMA quality scoring,
// and the verify-only judge gate. The system-level retrospective lives in
// system_audit.hpp because it consumes whole record trees.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/agent_output.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/executor.hpp"
#include "ziggurat/task.hpp"
#include "ziggurat/workspace.hpp"

#include <json.hpp>

#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ziggurat {

struct AuditConfig {
    double structural_weight = 0.4;
    double semantic_weight = 0.6;
    double acceptance_threshold = 0.7;
    // Format compliance is weighted highest among the judge's checks.
    double judge_format_weight = 0.5;
    double judge_files_weight = 0.3;
    double judge_semantic_weight = 0.2;
    bool strict_judge = false;  // reject when the judge backend is unavailable
};

struct ValidationResult {
    enum class Verdict { success, error };

    double score = 0.0;
    Verdict verdict = Verdict::error;
    std::vector<std::string> findings;
    double structural_score = 0.0;
    double semantic_score = 0.0;

    bool ok() const { return verdict == Verdict::success; }

    bool operator==(const ValidationResult&) const = default;

    nlohmann::json to_json() const {
        return nlohmann::json{{"score", score},
                              {"verdict", verdict == Verdict::success ? "success" : "error"},
                              {"findings", findings},
                              {"structural", structural_score},
                              {"semantic", semantic_score}};
    }

    static ValidationResult from_json(const nlohmann::json& j) {
        ValidationResult v;
        v.score = j.value("score", 0.0);
        v.verdict = j.value("verdict", "error") == std::string("success") ? Verdict::success
                                                                          : Verdict::error;
        if (j.contains("findings")) v.findings = j.at("findings").get<std::vector<std::string>>();
        v.structural_score = j.value("structural", 0.0);
        v.semantic_score = j.value("semantic", 0.0);
        return v;
    }
};

// Per-agent quality scores maintained by exponential moving average:
// Q <- alpha * Q_prev + (1 - alpha) * v. Unknown agents start at Q0.
class QualityLedger {
public:
    explicit QualityLedger(double alpha = 0.9, double initial = 0.5)
        : alpha_(alpha), initial_(initial) {
        if (alpha < 0.0 || alpha > 1.0) fail(Errc::out_of_range, "alpha must be in [0,1]");
        if (initial < 0.0 || initial > 1.0) fail(Errc::out_of_range, "Q0 must be in [0,1]");
    }

    double alpha() const { return alpha_; }
    double initial() const { return initial_; }

    double update(const AgentId& agent, double v) {
        if (v < 0.0 || v > 1.0) {
            fail(Errc::out_of_range, "validate score " + std::to_string(v) + " outside [0,1]");
        }
        std::scoped_lock lock(*mutex_);
        auto [it, inserted] = scores_.try_emplace(agent, initial_);
        it->second = alpha_ * it->second + (1.0 - alpha_) * v;
        auto& hist = history_[agent];
        hist.emplace_back(hist.size(), v);
        return it->second;
    }

    double score(const AgentId& agent) const {
        std::scoped_lock lock(*mutex_);
        auto it = scores_.find(agent);
        return it == scores_.end() ? initial_ : it->second;
    }

    std::size_t observations(const AgentId& agent) const {
        std::scoped_lock lock(*mutex_);
        auto it = history_.find(agent);
        return it == history_.end() ? 0 : it->second.size();
    }

    std::vector<std::pair<std::size_t, double>> history(const AgentId& agent) const {
        std::scoped_lock lock(*mutex_);
        auto it = history_.find(agent);
        return it == history_.end() ? std::vector<std::pair<std::size_t, double>>{} : it->second;
    }

    std::map<AgentId, double> scores() const {
        std::scoped_lock lock(*mutex_);
        return scores_;
    }

private:
    double alpha_;
    double initial_;
    // heap-held so the ledger stays movable
    mutable std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
    std::map<AgentId, double> scores_;
    std::map<AgentId, std::vector<std::pair<std::size_t, double>>> history_;
};

inline QualityLedger& update_quality(QualityLedger& ledger, const AgentId& agent, double v) {
    ledger.update(agent, v);
    return ledger;
}

namespace detail {

// Parses a semantic judgment from a backend reply: a numeric output is the
// score; otherwise success maps to 1 and error to 0.
inline double semantic_score_from(const AgentOutput& reply) {
    const char* begin = reply.output.c_str();
    char* end = nullptr;
    const double parsed = std::strtod(begin, &end);
    if (end != begin && parsed >= 0.0 && parsed <= 1.0) {
        while (end != nullptr && (*end == ' ' || *end == '\n' || *end == '\r')) ++end;
        if (end != nullptr && *end == '\0') return parsed;
    }
    return reply.ok() ? 1.0 : 0.0;
}

} // namespace detail

// Execution-level audit of one output. Structural checks always run and are
// deterministic: contract consistency and reference resolution. The semantic
// component comes from the executor (1.0 by scripted default). Any structural
// finding forces rejection so faults never ride through on a high semantic
// score.
inline ValidationResult validate(const AgentOutput& output, const Task& task, const Workspace& ws,
                                 Executor& exec, const AuditConfig& cfg = {}) {
    ValidationResult result;
    int checks = 0;
    int passed = 0;

    ++checks;
    const bool contract_ok = (output.status == AgentOutput::Status::error) ==
                             !output.error_information.empty();
    if (contract_ok) {
        ++passed;
    } else {
        result.findings.push_back("contract: error_information inconsistent with status");
    }

    ++checks;
    bool refs_ok = true;
    for (const auto& ref : output.refs()) {
        if (!ws.exists(Address(ref.addr))) {
            refs_ok = false;
            result.findings.push_back("dangling address: " + ref.addr);
        }
    }
    if (refs_ok) ++passed;

    result.structural_score = static_cast<double>(passed) / static_cast<double>(checks);

    try {
        Request req;
        req.kind = "validate";
        req.fields["task"] = task.id;
        req.body = task.description + "\n---\n" + output.output;
        ExecutionContext probe;  // validation probes carry no context of their own
        const AgentOutput reply = exec.invoke("validator", probe, req.render());
        result.semantic_score = detail::semantic_score_from(reply);
    } catch (const Error& e) {
        result.semantic_score = 0.0;
        result.findings.push_back(std::string("semantic check unavailable: ") + e.what());
    }

    result.score = cfg.structural_weight * result.structural_score +
                   cfg.semantic_weight * result.semantic_score;
    const bool structurally_clean = passed == checks;
    result.verdict = structurally_clean && output.ok() && result.score >= cfg.acceptance_threshold
                         ? ValidationResult::Verdict::success
                         : ValidationResult::Verdict::error;
    return result;
}

// Verify-only judge. Reads artifacts and asks the backend for a verdict but
// never writes: any workspace mutation during the judgment raises
// VerifyOnlyViolation. Format compliance outweighs every other check.
inline ValidationResult judge(const Task& task, const AgentOutput& output, Workspace& ws,
                              Executor& exec, const AuditConfig& cfg = {}) {
    if (!output.ok()) {
        fail(Errc::out_of_range, "judge precondition: error outputs bypass the judge");
    }
    // Thread-scoped so concurrent sibling writes stay invisible to the guard.
    const std::uint64_t mutations_before = Workspace::thread_mutation_count();

    ValidationResult result;

    // Format compliance: the output must round-trip the strict contract.
    double format_score = 1.0;
    try {
        (void)AgentOutput::from_json_text(output.to_json());
    } catch (const Error& e) {
        format_score = 0.0;
        result.findings.push_back(std::string("format: ") + e.what());
    }

    // Claimed files must exist and be readable.
    double files_score = 1.0;
    for (const auto& ref : output.refs()) {
        if (!ws.exists(Address(ref.addr))) {
            files_score = 0.0;
            result.findings.push_back("claimed file missing: " + ref.addr);
            continue;
        }
        (void)ws.get(Address(ref.addr));  // read-only inspection
    }

    double semantic_score = 1.0;
    bool semantic_ok = true;
    try {
        Request req;
        req.kind = "judge";
        req.fields["task"] = task.id;
        req.body = task.description + "\n---\n" + output.output;
        ExecutionContext probe;
        const AgentOutput reply = exec.invoke("judge", probe, req.render());
        semantic_ok = reply.ok();
        semantic_score = detail::semantic_score_from(reply);
        if (!semantic_ok) {
            result.findings.push_back("judge rejected: " + reply.error_information);
        }
    } catch (const Error& e) {
        if (cfg.strict_judge) {
            semantic_ok = false;
            semantic_score = 0.0;
            result.findings.push_back(std::string("judge unavailable (strict): ") + e.what());
        } else {
            result.findings.push_back(std::string("judge unavailable, accepted with flag: ") +
                                      e.what());
        }
    }

    if (Workspace::thread_mutation_count() != mutations_before) {
        fail(Errc::verify_only_violation, "workspace mutated during judgment of task " + task.id);
    }

    result.structural_score = format_score;
    result.semantic_score = semantic_score;
    result.score = cfg.judge_format_weight * format_score + cfg.judge_files_weight * files_score +
                   cfg.judge_semantic_weight * semantic_score;
    const bool pass = format_score == 1.0 && files_score == 1.0 && semantic_ok &&
                      result.score >= cfg.acceptance_threshold;
    result.verdict = pass ? ValidationResult::Verdict::success : ValidationResult::Verdict::error;
    return result;
}

} // namespace ziggurat
