#pragma once
// System-level retrospective: per-subtree summaries, anomaly flags (repeated
// rejections, quality drops) and the context-savings figure comparing the
// full history against the final bounded context.

#include "ziggurat/audit.hpp"
#include "ziggurat/context.hpp"
#include "ziggurat/record.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace ziggurat {

struct SystemAuditConfig {
    int consecutive_reject_threshold = 3;
    double quality_drop_threshold = 0.3;
};

struct SystemAuditReport {
    struct SubtreeSummary {
        std::string task_id;
        AgentId agent;
        std::string summary;
    };
    struct Anomaly {
        AgentId agent;
        std::string kind;  // repeated_rejections | quality_drop
        std::string detail;
    };

    std::vector<SubtreeSummary> summaries;
    std::vector<Anomaly> anomalies;
    std::uint64_t history_units = 0;
    std::uint64_t final_context_units = 0;

    bool empty() const { return summaries.empty() && anomalies.empty(); }

    double savings_ratio() const {
        if (final_context_units == 0) return 0.0;
        return static_cast<double>(history_units) / static_cast<double>(final_context_units);
    }

    nlohmann::json to_json() const {
        nlohmann::json js = nlohmann::json::array();
        for (const auto& s : summaries) {
            js.push_back({{"task", s.task_id}, {"agent", s.agent}, {"summary", s.summary}});
        }
        nlohmann::json ja = nlohmann::json::array();
        for (const auto& a : anomalies) {
            ja.push_back({{"agent", a.agent}, {"kind", a.kind}, {"detail", a.detail}});
        }
        return nlohmann::json{{"summaries", js},
                              {"anomalies", ja},
                              {"history_units", history_units},
                              {"final_context_units", final_context_units},
                              {"savings_ratio", savings_ratio()}};
    }

    std::string to_text() const {
        std::string out = "system audit\n";
        out += "  history units: " + std::to_string(history_units) + "\n";
        out += "  final context units: " + std::to_string(final_context_units) + "\n";
        out += "  savings ratio: " + std::to_string(savings_ratio()) + "\n";
        out += "  anomalies: " + std::to_string(anomalies.size()) + "\n";
        for (const auto& a : anomalies) {
            out += "    - " + a.agent + " " + a.kind + ": " + a.detail + "\n";
        }
        out += "  subtree summaries: " + std::to_string(summaries.size()) + "\n";
        for (const auto& s : summaries) {
            out += "    - " + s.task_id + " (" + s.agent + "): " + s.summary + "\n";
        }
        return out;
    }
};

namespace detail {

inline void collect_attempt_outcomes(const ExecutionRecord& rec,
                                     std::map<AgentId, std::vector<bool>>& rejects) {
    for (const auto& child : rec.children) collect_attempt_outcomes(child, rejects);
    if (rec.agent.empty()) return;
    for (const auto& prior : rec.prior_attempts) {
        rejects[rec.agent].push_back(prior.failed());
    }
    rejects[rec.agent].push_back(rec.failed());
}

inline void summarize_subtrees(const ExecutionRecord& rec, const ContextConfig& cfg,
                               std::vector<SystemAuditReport::SubtreeSummary>& out) {
    if (!rec.children.empty()) {
        std::vector<InteractionRecord> spans;
        for (const auto& child : rec.children) {
            spans.push_back({InteractionRecord::Kind::tool_result,
                             child.task_id + " [" + to_string(child.status) + "] " +
                                 child.output.output,
                             child.agent});
        }
        const InteractionRecord summary = compress_records(spans, cfg);
        out.push_back({rec.task_id, rec.agent, summary.content});
    }
    for (const auto& child : rec.children) summarize_subtrees(child, cfg, out);
}

} // namespace detail

// Retrospective over one finished (or checkpointed) run. Empty trees produce
// empty reports. context_units should be the final measure of the live
// context; history_units the full uncompressed log size.
inline SystemAuditReport system_audit(const std::vector<ExecutionRecord>& roots,
                                      std::uint64_t history_units, std::uint64_t context_units,
                                      const QualityLedger& ledger,
                                      const SystemAuditConfig& cfg = {},
                                      const ContextConfig& ctx_cfg = {}) {
    SystemAuditReport report;
    report.history_units = history_units;
    report.final_context_units = context_units;

    std::map<AgentId, std::vector<bool>> outcomes;
    for (const auto& root : roots) {
        detail::summarize_subtrees(root, ctx_cfg, report.summaries);
        detail::collect_attempt_outcomes(root, outcomes);
    }

    for (const auto& [agent, rejected] : outcomes) {
        int run = 0;
        int longest = 0;
        for (bool r : rejected) {
            run = r ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        if (longest >= cfg.consecutive_reject_threshold) {
            report.anomalies.push_back(
                {agent, "repeated_rejections",
                 std::to_string(longest) + " consecutive rejected attempts"});
        }
    }

    // Re-walk each agent's EMA to find the largest single-update drop.
    for (const auto& [agent, score] : ledger.scores()) {
        (void)score;
        double worst_drop = 0.0;
        double running = ledger.initial();
        for (const auto& [seq, v] : ledger.history(agent)) {
            (void)seq;
            const double next = ledger.alpha() * running + (1.0 - ledger.alpha()) * v;
            worst_drop = std::max(worst_drop, running - next);
            running = next;
        }
        if (worst_drop > cfg.quality_drop_threshold) {
            report.anomalies.push_back(
                {agent, "quality_drop", "EMA dropped by " + std::to_string(worst_drop)});
        }
    }
    return report;
}

} // namespace ziggurat
