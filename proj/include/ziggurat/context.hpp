#pragma once
// Four-part bounded execution context: system prompt, compressed file index,
// the active invocation stack, and a compressible interaction log. The full
// history keeps everything uncompressed; the context stays within its budget.
//
// Compression is threshold-triggered: whenever the interaction log grows past
// tau (or past the remaining budget headroom), the oldest prefix is replaced
// by a single summary record until the bound holds again.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/workspace.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace ziggurat {

using TokenMeter = std::function<std::uint64_t(std::string_view)>;

// Token proxy: ceil(chars / 4). Swappable for a real tokenizer.
inline std::uint64_t default_token_meter(std::string_view text) {
    return (static_cast<std::uint64_t>(text.size()) + 3) / 4;
}

struct ContextConfig {
    std::uint64_t token_budget = 4096;
    std::uint64_t tau = 0;              // 0 -> token_budget / 4
    double lm_fraction = 0.15;          // file-index sub-budget
    double compress_fraction = 0.25;    // summary size cap as fraction of input
    std::uint64_t compress_floor = 64;  // summary size cap floor, in tokens
    TokenMeter meter;                   // empty -> default_token_meter

    std::uint64_t effective_tau() const { return tau == 0 ? token_budget / 4 : tau; }
    std::uint64_t lm_budget() const {
        return static_cast<std::uint64_t>(static_cast<double>(token_budget) * lm_fraction);
    }
    std::uint64_t measure(std::string_view text) const {
        return meter ? meter(text) : default_token_meter(text);
    }
};

struct StackFrame {
    AgentId agent;
    std::string role;

    bool operator==(const StackFrame&) const = default;
};

struct InteractionRecord {
    enum class Kind { tool_call, tool_result, feedback, summary };

    Kind kind = Kind::tool_call;
    std::string content;
    std::string source;  // tool name, when relevant

    bool operator==(const InteractionRecord&) const = default;
};

inline const char* to_string(InteractionRecord::Kind k) {
    switch (k) {
        case InteractionRecord::Kind::tool_call:   return "tool_call";
        case InteractionRecord::Kind::tool_result: return "tool_result";
        case InteractionRecord::Kind::feedback:    return "feedback";
        case InteractionRecord::Kind::summary:     return "summary";
    }
    return "unknown";
}

// Append-only, never truncated during a run. Thread-safe appends.
class HistoryLog {
public:
    void append(const InteractionRecord& rec, const ContextConfig& cfg) {
        std::scoped_lock lock(mutex_);
        units_ += cfg.measure(rec.content);
        records_.push_back(rec);
    }

    std::size_t size() const {
        std::scoped_lock lock(mutex_);
        return records_.size();
    }

    std::uint64_t total_units() const {
        std::scoped_lock lock(mutex_);
        return units_;
    }

    std::vector<InteractionRecord> records() const {
        std::scoped_lock lock(mutex_);
        return records_;
    }

private:
    mutable std::mutex mutex_;
    std::vector<InteractionRecord> records_;
    std::uint64_t units_ = 0;
};

struct ExecutionContext {
    std::string sys;
    std::vector<Descriptor> lm_index;
    std::vector<StackFrame> shared_stack;
    std::vector<InteractionRecord> env_log;
    ContextConfig cfg;

    nlohmann::json to_json() const;
};

inline std::uint64_t measure_sys(const ExecutionContext& ctx) { return ctx.cfg.measure(ctx.sys); }

inline std::uint64_t measure_lm(const ExecutionContext& ctx) {
    std::uint64_t total = 0;
    for (const auto& d : ctx.lm_index) total += ctx.cfg.measure(d.text);
    return total;
}

inline std::uint64_t measure_sm(const ExecutionContext& ctx) {
    std::uint64_t total = 0;
    for (const auto& f : ctx.shared_stack) {
        total += ctx.cfg.measure(f.agent) + ctx.cfg.measure(f.role);
    }
    return total;
}

inline std::uint64_t measure_env(const ExecutionContext& ctx) {
    std::uint64_t total = 0;
    for (const auto& r : ctx.env_log) total += ctx.cfg.measure(r.content);
    return total;
}

// Additive over the four components by definition.
inline std::uint64_t measure(const ExecutionContext& ctx) {
    return measure_sys(ctx) + measure_lm(ctx) + measure_sm(ctx) + measure_env(ctx);
}

inline nlohmann::json ExecutionContext::to_json() const {
    nlohmann::json lm = nlohmann::json::array();
    for (const auto& d : lm_index) {
        lm.push_back({{"kind", d.content_kind}, {"size_bytes", d.size_bytes}, {"text", d.text}});
    }
    nlohmann::json stack = nlohmann::json::array();
    for (const auto& f : shared_stack) stack.push_back({{"agent", f.agent}, {"role", f.role}});
    nlohmann::json env = nlohmann::json::array();
    for (const auto& r : env_log) {
        env.push_back({{"kind", to_string(r.kind)}, {"content", r.content}, {"source", r.source}});
    }
    return nlohmann::json{{"sys", sys},
                          {"lm_index", lm},
                          {"shared_stack", stack},
                          {"env_log", env},
                          {"measure", measure(*this)}};
}

// Optional LLM-backed summarization seam; when empty, the deterministic
// first/last-plus-count extraction below is used.
using Summarizer = std::function<std::string(const std::vector<InteractionRecord>&)>;

namespace detail {

inline std::string truncate_to_units(std::string text, std::uint64_t cap_units) {
    const std::size_t cap_chars = static_cast<std::size_t>(cap_units) * 4;
    if (text.size() > cap_chars) text.resize(cap_chars);
    return text;
}

} // namespace detail

// Collapses a record span into one summary record. Deterministic in mock
// mode: count line plus first and last record kept verbatim. A lone summary
// record is returned unchanged, so repeated compression is non-expanding.
inline InteractionRecord compress_records(const std::vector<InteractionRecord>& records,
                                          const ContextConfig& cfg,
                                          const Summarizer& summarizer = {}) {
    if (records.empty()) fail(Errc::out_of_range, "compress requires at least one record");
    if (records.size() == 1 && records.front().kind == InteractionRecord::Kind::summary) {
        return records.front();
    }
    std::uint64_t input_units = 0;
    for (const auto& r : records) input_units += cfg.measure(r.content);
    const std::uint64_t cap = std::max<std::uint64_t>(
        cfg.compress_floor,
        static_cast<std::uint64_t>(static_cast<double>(input_units) * cfg.compress_fraction));

    std::string content;
    if (summarizer) {
        content = summarizer(records);
    } else {
        content = "[summary of " + std::to_string(records.size()) + " records] first: " +
                  records.front().content + " | last: " + records.back().content;
    }
    InteractionRecord summary;
    summary.kind = InteractionRecord::Kind::summary;
    summary.content = detail::truncate_to_units(std::move(content), cap);
    return summary;
}

// Builds the file-index component: all workspace descriptors, merged down by
// summarization until they fit the sub-budget. Stale descriptors are merged,
// not evicted.
inline std::vector<Descriptor> compress_descriptors(
    std::vector<std::pair<Address, Descriptor>> entries, std::uint64_t sub_budget,
    const ContextConfig& cfg) {
    std::vector<Descriptor> index;
    index.reserve(entries.size());
    for (auto& [addr, desc] : entries) {
        Descriptor d = desc;
        d.text = addr.value + ": " + desc.text;
        index.push_back(std::move(d));
    }
    auto total = [&] {
        std::uint64_t units = 0;
        for (const auto& d : index) units += cfg.measure(d.text);
        return units;
    };
    while (total() > sub_budget && index.size() > 1) {
        // merging at least two entries guarantees the list shrinks
        const std::size_t merge_count = std::max<std::size_t>(2, (index.size() + 1) / 2);
        std::uint64_t merged_units = 0;
        std::uint64_t merged_bytes = 0;
        for (std::size_t i = 0; i < merge_count; ++i) {
            merged_units += cfg.measure(index[i].text);
            merged_bytes += index[i].size_bytes;
        }
        const std::uint64_t cap = std::max<std::uint64_t>(
            cfg.compress_floor,
            static_cast<std::uint64_t>(static_cast<double>(merged_units) * cfg.compress_fraction));
        Descriptor summary;
        summary.content_kind = "summary";
        summary.size_bytes = merged_bytes;
        summary.text = detail::truncate_to_units(
            "[index summary] " + std::to_string(merge_count) + " files | first: " +
                index.front().text + " | last: " + index[merge_count - 1].text,
            cap);
        index.erase(index.begin(), index.begin() + static_cast<std::ptrdiff_t>(merge_count));
        index.insert(index.begin(), std::move(summary));
    }
    if (!index.empty() && total() > sub_budget) {
        index.front().text = detail::truncate_to_units(index.front().text, sub_budget);
        index.resize(1);
    }
    return index;
}

inline std::string default_system_prompt(const AgentNode& agent) {
    std::string prompt = "You are agent " + agent.id + " (" + to_string(agent.role) + ").";
    if (!agent.capability.summary.empty()) {
        prompt += " Capability: " + agent.capability.summary + ".";
    }
    if (!agent.tool_names.empty()) {
        prompt += " Available tools:";
        for (const auto& t : agent.tool_names) prompt += " " + t;
        prompt += ".";
    }
    return prompt;
}

// Assembles a fresh context for one agent invocation: the agent's prompt, the
// compressed workspace index, the active invocation path, and an empty
// interaction log.
inline ExecutionContext build_context(const AgentNode& agent, const Workspace& ws,
                                      std::vector<StackFrame> stack, ContextConfig cfg) {
    ExecutionContext ctx;
    ctx.cfg = cfg;
    ctx.sys = agent.system_prompt.empty() ? default_system_prompt(agent) : agent.system_prompt;
    if (ctx.cfg.measure(ctx.sys) > cfg.token_budget) {
        fail(Errc::budget_impossible,
             "system prompt alone measures " + std::to_string(ctx.cfg.measure(ctx.sys)) +
                 " > budget " + std::to_string(cfg.token_budget));
    }
    ctx.lm_index = compress_descriptors(ws.descriptors(), cfg.lm_budget(), cfg);
    ctx.shared_stack = std::move(stack);
    if (measure(ctx) > cfg.token_budget) {
        fail(Errc::budget_impossible, "context skeleton exceeds budget before any interaction");
    }
    return ctx;
}

// Appends to both the full history (always, uncompressed) and the context's
// interaction log, then restores the log bound by summarizing the oldest
// prefix. The newest record survives verbatim unless it alone exceeds the
// bound, which escalates.
inline void append_interaction(ExecutionContext& ctx, const InteractionRecord& rec,
                               HistoryLog& hist, const Summarizer& summarizer = {}) {
    if (rec.kind == InteractionRecord::Kind::summary) {
        fail(Errc::contract_violation, "summary records are produced only by compression");
    }
    hist.append(rec, ctx.cfg);
    ctx.env_log.push_back(rec);

    const std::uint64_t skeleton = measure_sys(ctx) + measure_lm(ctx) + measure_sm(ctx);
    if (skeleton > ctx.cfg.token_budget) {
        fail(Errc::budget_impossible, "context skeleton exceeds budget");
    }
    const std::uint64_t cap =
        std::min<std::uint64_t>(ctx.cfg.effective_tau(), ctx.cfg.token_budget - skeleton);

    while (measure_env(ctx) > cap) {
        const std::size_t n = ctx.env_log.size();
        if (n == 1) {
            // A lone record has nothing older to fold into; truncating it would
            // silently lose data, so this escalates.
            fail(Errc::budget_impossible,
                 "single interaction record of " + std::to_string(measure_env(ctx)) +
                     " units exceeds the compression threshold " + std::to_string(cap));
        }
        // Smallest prefix whose summarization restores the bound; the most
        // recent record is never folded in while older ones remain.
        const std::uint64_t env_units = measure_env(ctx);
        std::uint64_t prefix_units = 0;
        std::size_t chosen = 0;
        InteractionRecord summary;
        for (std::size_t k = 1; k <= n - 1; ++k) {
            prefix_units += ctx.cfg.measure(ctx.env_log[k - 1].content);
            const std::vector<InteractionRecord> prefix(
                ctx.env_log.begin(), ctx.env_log.begin() + static_cast<std::ptrdiff_t>(k));
            InteractionRecord candidate = compress_records(prefix, ctx.cfg, summarizer);
            const std::uint64_t new_units =
                env_units - prefix_units + ctx.cfg.measure(candidate.content);
            if (new_units <= cap || k == n - 1) {
                chosen = k;
                summary = std::move(candidate);
                break;
            }
        }
        const std::uint64_t summary_units = ctx.cfg.measure(summary.content);
        const bool progress = prefix_units > summary_units;
        ctx.env_log.erase(ctx.env_log.begin(),
                          ctx.env_log.begin() + static_cast<std::ptrdiff_t>(chosen));
        ctx.env_log.insert(ctx.env_log.begin(), summary);
        if (measure_env(ctx) > cap && !progress) {
            // The largest allowed prefix no longer shrinks: collapse the whole log.
            const InteractionRecord all = compress_records(ctx.env_log, ctx.cfg, summarizer);
            ctx.env_log.clear();
            ctx.env_log.push_back(all);
            if (ctx.cfg.measure(all.content) > cap) {
                fail(Errc::budget_impossible, "interaction log cannot re-enter the bound");
            }
        }
    }
}

} // namespace ziggurat
