#pragma once
// Pattern-keyed scripts driving the deterministic executor. Each entry maps a
// request kind plus a task-description substring to a canned reply, optional
// artifact writes, and an optional fault directive.
//
// Fault directives and their documented failure signatures:
//   malformed_json          -> reply is not valid JSON; the caller records a
//                              ContractViolation attempt and retries
//   dangling_addr           -> reply references artifacts that were never
//                              written; validation rejects citing the address
//   wrong_file_name         -> artifacts land under "<addr>.misnamed" while the
//                              reply claims <addr>; validation/judge reject
//   oversized_decomposition -> the subtask list is padded to seven entries; one
//                              re-request, then truncation with a warning record
//   timeout                 -> the backend raises Timeout for this request
//   judge_writes            -> the backend writes an artifact while judging;
//                              the judge harness raises VerifyOnlyViolation
//
// Matchers must be total over a scenario's task set: an unmatched atom or
// decompose request is a scenario error, never silent behavior. Merge, judge,
// validate, coverage and summarize requests fall back to deterministic
// defaults unless the scenario disables that (defaults.* = false) or scripts
// them explicitly.

#include "ziggurat/agent_output.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/executor.hpp"
#include "ziggurat/workspace.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ziggurat {

struct ScenarioArtifact {
    std::string addr;   // "{task}" expands to the task id
    std::string content;
    std::string desc;
};

struct ScenarioEntry {
    std::string kind;       // decompose | atom | merge | judge | validate | coverage | summarize
    std::string match;      // substring of the request body; empty matches everything
    std::string backend;    // empty matches every backend
    std::vector<std::string> subtasks;
    std::string output;
    std::vector<ScenarioArtifact> artifacts;
    std::vector<ScenarioArtifact> refs;  // claimed references; defaults to artifacts
    std::string fault;
    std::string verdict = "success";
    std::string error_information;
    int delay_ms = 0;
};

struct ScenarioDefaults {
    bool merge = true;      // echo child references
    bool judge = true;      // accept
    bool validate = true;   // semantic score 1.0
    bool coverage = true;   // defer to token containment
    bool summarize = true;  // deterministic extraction
};

struct Scenario {
    std::vector<ScenarioEntry> entries;
    std::vector<std::string> tasks;     // root task descriptions for simulation rounds
    std::vector<std::string> backends;  // executor backend ids for evolution
    ScenarioDefaults defaults;
    int concurrency_limit = 0;
};

inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    if (j.contains("tasks")) s.tasks = j.at("tasks").get<std::vector<std::string>>();
    if (j.contains("backends")) s.backends = j.at("backends").get<std::vector<std::string>>();
    if (j.contains("concurrency_limit")) s.concurrency_limit = j.at("concurrency_limit").get<int>();
    if (j.contains("defaults")) {
        const auto& d = j.at("defaults");
        s.defaults.merge = d.value("merge", true);
        s.defaults.judge = d.value("judge", true);
        s.defaults.validate = d.value("validate", true);
        s.defaults.coverage = d.value("coverage", true);
        s.defaults.summarize = d.value("summarize", true);
    }
    auto parse_artifacts = [](const nlohmann::json& arr) {
        std::vector<ScenarioArtifact> out;
        for (const auto& a : arr) {
            out.push_back({a.at("addr").get<std::string>(), a.value("content", ""),
                           a.value("desc", "")});
        }
        return out;
    };
    if (j.contains("entries")) {
        for (const auto& je : j.at("entries")) {
            ScenarioEntry e;
            e.kind = je.at("kind").get<std::string>();
            e.match = je.value("match", "");
            e.backend = je.value("backend", "");
            if (je.contains("subtasks")) {
                e.subtasks = je.at("subtasks").get<std::vector<std::string>>();
            }
            e.output = je.value("output", "");
            if (je.contains("artifacts")) e.artifacts = parse_artifacts(je.at("artifacts"));
            if (je.contains("refs")) e.refs = parse_artifacts(je.at("refs"));
            e.fault = je.value("fault", "");
            e.verdict = je.value("verdict", "success");
            e.error_information = je.value("error_information", "");
            e.delay_ms = je.value("delay_ms", 0);
            s.entries.push_back(std::move(e));
        }
    }
    return s;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::storage_failure, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j = nlohmann::json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) fail(Errc::scenario_error, path + " is not valid JSON");
    return scenario_from_json(j);
}

// Deterministic function of (request, scenario): first entry whose kind,
// backend filter and body substring all match wins.
class ScriptedExecutor : public Executor {
public:
    explicit ScriptedExecutor(Scenario scenario, std::string backend = "")
        : scenario_(std::move(scenario)), backend_(std::move(backend)) {}

    std::string name() const override {
        return backend_.empty() ? "scripted" : "scripted:" + backend_;
    }

    int concurrency_limit() const override { return scenario_.concurrency_limit; }

    void bind_workspace(Workspace* ws) override { ws_ = ws; }

    std::string invoke_raw(const std::string&, const ExecutionContext&,
                           const std::string& request) override {
        const Request req = Request::parse(request);
        const ScenarioEntry* entry = find_entry(req);
        if (entry == nullptr) {
            if (req.kind == "merge" && scenario_.defaults.merge) return default_merge(req);
            if (req.kind == "judge" && scenario_.defaults.judge) {
                return AgentOutput::success_with("verified").to_json();
            }
            if (req.kind == "validate" && scenario_.defaults.validate) {
                return AgentOutput::success_with("1.0").to_json();
            }
            if (req.kind == "coverage" && scenario_.defaults.coverage) {
                return AgentOutput::success_with("covered").to_json();
            }
            if (req.kind == "summarize" && scenario_.defaults.summarize) {
                return AgentOutput::success_with("[scripted summary]").to_json();
            }
            fail(Errc::unmatched_request, request);
        }
        if (entry->delay_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(entry->delay_ms));
        }
        if (entry->fault == "timeout") fail(Errc::timeout, "scripted timeout for: " + req.body);
        if (entry->fault == "malformed_json") return "this is {not balanced json [";

        const std::string task = req.field("task", "task");
        if (req.kind == "decompose") return scripted_decomposition(*entry, req);
        if (req.kind == "judge" && entry->fault == "judge_writes" && ws_ != nullptr) {
            ws_->put(Address("judge/illegal_write_" + task + ".txt"), "written by judge",
                     {"illegal judge write"});
        }
        return scripted_reply(*entry, task);
    }

private:
    const ScenarioEntry* find_entry(const Request& req) const {
        for (const auto& e : scenario_.entries) {
            if (e.kind != req.kind) continue;
            if (!e.backend.empty() && e.backend != backend_) continue;
            if (!e.match.empty() && req.body.find(e.match) == std::string::npos) continue;
            return &e;
        }
        return nullptr;
    }

    static std::string substitute(std::string text, const std::string& task) {
        const std::string needle = "{task}";
        std::size_t pos;
        while ((pos = text.find(needle)) != std::string::npos) {
            text.replace(pos, needle.size(), task);
        }
        return text;
    }

    std::string scripted_decomposition(const ScenarioEntry& entry, const Request& req) const {
        std::vector<std::string> subtasks = entry.subtasks;
        if (entry.fault == "oversized_decomposition") {
            while (subtasks.size() < 7) {
                subtasks.push_back("padding subtask " + std::to_string(subtasks.size() + 1));
            }
        }
        std::string out;
        for (const auto& s : subtasks) out += "@task " + s + "\n";
        if (subtasks.empty()) out = entry.output;
        (void)req;
        return AgentOutput::success_with(out).to_json();
    }

    std::string scripted_reply(const ScenarioEntry& entry, const std::string& task) {
        // Artifacts are written; refs are claimed. Faults skew one of the two.
        std::vector<ScenarioArtifact> artifacts = entry.artifacts;
        std::vector<ScenarioArtifact> refs = entry.refs.empty() ? entry.artifacts : entry.refs;
        if (entry.fault == "dangling_addr") artifacts.clear();
        std::string written_suffix = entry.fault == "wrong_file_name" ? ".misnamed" : "";
        if (ws_ != nullptr) {
            for (const auto& a : artifacts) {
                ws_->put(Address(substitute(a.addr, task) + written_suffix),
                         substitute(a.content, task), {substitute(a.desc, task)});
            }
        }
        std::string out = substitute(entry.output, task);
        for (const auto& r : refs) {
            if (!out.empty() && out.back() != '\n') out += "\n";
            out += ref_line({substitute(r.addr, task),
                             substitute(r.desc.empty() ? "artifact" : r.desc, task)});
        }
        if (entry.verdict == "error") {
            const std::string info = entry.error_information.empty()
                                         ? "scripted rejection"
                                         : substitute(entry.error_information, task);
            return AgentOutput::failure(out, info).to_json();
        }
        return AgentOutput::success_with(out).to_json();
    }

    std::string default_merge(const Request& req) const {
        std::string out = "merged " + req.field("n", "0") + " results\n";
        for (const auto& ref : extract_refs(req.body)) out += ref_line(ref) + "\n";
        return AgentOutput::success_with(out).to_json();
    }

    Scenario scenario_;
    std::string backend_;
    Workspace* ws_ = nullptr;
};

} // namespace ziggurat
