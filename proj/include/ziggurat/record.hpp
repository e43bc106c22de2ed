#pragma once
// The execution record tree: one node per task, prior attempts kept flat on
// the final record. Wall-clock timings are excluded from the canonical JSON
// form so record trees from identical runs compare byte-for-byte.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/agent_output.hpp"
#include "ziggurat/audit.hpp"
#include "ziggurat/task.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ziggurat {

struct CoverageVerdict {
    bool covered = true;
    std::vector<std::string> gaps;

    bool operator==(const CoverageVerdict&) const = default;
};

struct ExecutionRecord {
    std::string task_id;
    std::string description;
    AgentId agent;
    std::string role;
    int attempt = 1;  // final attempt number, 1-based
    TaskStatus status = TaskStatus::pending;
    AgentOutput output;
    std::optional<ValidationResult> validation;
    std::optional<ValidationResult> judge_verdict;
    CoverageVerdict coverage;
    std::string error_information;
    std::vector<std::string> warnings;
    std::vector<ExecutionRecord> prior_attempts;  // failed attempts, childless
    std::vector<ExecutionRecord> children;
    double start_ms = 0.0;  // wall clock; never serialized canonically
    double end_ms = 0.0;

    bool failed() const { return status == TaskStatus::failed; }
    bool succeeded() const { return status == TaskStatus::succeeded; }

    std::size_t total_records() const {
        std::size_t n = 1 + prior_attempts.size();
        for (const auto& c : children) n += c.total_records();
        return n;
    }
};

inline nlohmann::json record_to_json(const ExecutionRecord& rec, bool include_timings = false) {
    nlohmann::json j{
        {"task_id", rec.task_id},
        {"description", rec.description},
        {"agent", rec.agent},
        {"role", rec.role},
        {"attempt", rec.attempt},
        {"status", to_string(rec.status)},
        {"output", nlohmann::json::parse(rec.output.to_json())},
        {"error_information", rec.error_information},
        {"warnings", rec.warnings},
    };
    if (rec.validation) j["validation"] = rec.validation->to_json();
    if (rec.judge_verdict) j["judge"] = rec.judge_verdict->to_json();
    if (!rec.coverage.covered) j["coverage_gaps"] = rec.coverage.gaps;
    if (!rec.prior_attempts.empty()) {
        nlohmann::json prior = nlohmann::json::array();
        for (const auto& p : rec.prior_attempts) prior.push_back(record_to_json(p, include_timings));
        j["prior_attempts"] = std::move(prior);
    }
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : rec.children) children.push_back(record_to_json(c, include_timings));
    j["children"] = std::move(children);
    if (include_timings) {
        j["start_ms"] = rec.start_ms;
        j["end_ms"] = rec.end_ms;
    }
    return j;
}

inline ExecutionRecord record_from_json(const nlohmann::json& j) {
    ExecutionRecord rec;
    rec.task_id = j.value("task_id", "");
    rec.description = j.value("description", "");
    rec.agent = j.value("agent", "");
    rec.role = j.value("role", "");
    rec.attempt = j.value("attempt", 1);
    const std::string status = j.value("status", "pending");
    rec.status = status == "succeeded"  ? TaskStatus::succeeded
                 : status == "failed"   ? TaskStatus::failed
                 : status == "running"  ? TaskStatus::running
                                        : TaskStatus::pending;
    if (j.contains("output")) {
        rec.output = AgentOutput::from_json_text(j.at("output").dump());
    }
    rec.error_information = j.value("error_information", "");
    if (j.contains("warnings")) rec.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("validation")) rec.validation = ValidationResult::from_json(j.at("validation"));
    if (j.contains("judge")) rec.judge_verdict = ValidationResult::from_json(j.at("judge"));
    if (j.contains("coverage_gaps")) {
        rec.coverage.covered = false;
        rec.coverage.gaps = j.at("coverage_gaps").get<std::vector<std::string>>();
    }
    if (j.contains("prior_attempts")) {
        for (const auto& p : j.at("prior_attempts")) {
            rec.prior_attempts.push_back(record_from_json(p));
        }
    }
    if (j.contains("children")) {
        for (const auto& c : j.at("children")) rec.children.push_back(record_from_json(c));
    }
    return rec;
}

} // namespace ziggurat
