#pragma once
// Git-style self-evolution: candidate branches execute tasks in isolated
// workspace sub-roots, a judge gates which deltas merge into the main branch,
// the main branch doubles as the training-data repository, weak branches are
// pruned, and the topology restructures by fusing similar functional siblings
// and splitting fan-out-pressured planners.
//
// The actual training step is a pluggable hook invoked with (branch, dataset
// file); the default hook only records the invocation.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/audit.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/task.hpp"
#include "ziggurat/tokens.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ziggurat {

struct EvolutionConfig {
    double prune_threshold = 0.4;
    std::size_t min_observations = 5;
    double fuse_threshold = 0.8;
    int split_observations = 3;
};

struct Delta {
    std::string id;
    std::string branch_id;
    std::string task_id;
    std::string task_description;
    std::string output_json;              // accepted output, strict contract form
    std::vector<std::string> artifact_addrs;
    std::optional<bool> judge_accept;     // J(delta): must be set before merging

    bool operator==(const Delta& other) const { return id == other.id; }

    nlohmann::json to_json() const {
        nlohmann::json j{{"id", id},
                         {"branch", branch_id},
                         {"task", task_id},
                         {"task_description", task_description},
                         {"output", output_json},
                         {"artifacts", artifact_addrs}};
        if (judge_accept) j["accepted"] = *judge_accept;
        return j;
    }
};

struct Branch {
    std::string id;
    std::string model_ref;
    std::filesystem::path workspace_root;
    double quality = 0.5;
    std::size_t observations = 0;
    std::vector<Delta> deltas;  // ordered by creation time
};

struct TrainingExample {
    std::string task_description;
    std::string output_json;
    std::vector<std::string> refs;

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"task", task_description}, {"output", output_json}, {"refs", refs}};
    }
};

struct TrainingDataset {
    std::vector<TrainingExample> examples;

    // Line-delimited export; byte-deterministic for identical inputs.
    std::string to_jsonl() const {
        std::string out;
        for (const auto& e : examples) out += e.to_json().dump() + "\n";
        return out;
    }
};

struct MainBranch {
    std::vector<Delta> merged;    // accepted deltas, order-preserving
    std::vector<Delta> rejected;  // recorded but excluded
    TrainingDataset dataset;

    bool contains(const std::string& delta_id) const {
        return std::any_of(merged.begin(), merged.end(),
                           [&](const Delta& d) { return d.id == delta_id; });
    }
};

struct SpawnResult {
    std::vector<Branch> branches;
    std::vector<std::string> warnings;
};

// One branch per backend, each with a disjoint workspace sub-root. Duplicate
// backend ids are collapsed with a warning.
inline SpawnResult spawn_branches(const Task& task, const std::vector<std::string>& backend_ids,
                                  const std::filesystem::path& run_root) {
    if (backend_ids.empty()) fail(Errc::no_backends, "at least one backend required");
    SpawnResult result;
    std::set<std::string> seen;
    for (const auto& backend : backend_ids) {
        if (!seen.insert(backend).second) {
            result.warnings.push_back("duplicate backend id dropped: " + backend);
            continue;
        }
        Branch b;
        b.id = backend;
        b.model_ref = backend;
        b.workspace_root = run_root / "branches" / backend;
        result.branches.push_back(std::move(b));
    }
    (void)task;
    return result;
}

// B_main' = B_main ∪ { delta : J(delta) = 1 }, order-preserving and
// idempotent on delta ids. Each newly accepted delta contributes one training
// example; rejected deltas are recorded but never merged.
inline MainBranch merge_deltas(MainBranch main, const std::vector<Delta>& deltas) {
    for (const auto& delta : deltas) {
        if (!delta.judge_accept.has_value()) {
            fail(Errc::contract_violation, "delta " + delta.id + " carries no judge verdict");
        }
        if (*delta.judge_accept) {
            if (main.contains(delta.id)) continue;
            main.merged.push_back(delta);
            main.dataset.examples.push_back(
                {delta.task_description, delta.output_json, delta.artifact_addrs});
        } else {
            main.rejected.push_back(delta);
        }
    }
    return main;
}

// D(B_main): deterministic extraction of the accumulated training data.
inline TrainingDataset accumulate_training_data(const MainBranch& main) {
    TrainingDataset dataset;
    for (const auto& delta : main.merged) {
        dataset.examples.push_back(
            {delta.task_description, delta.output_json, delta.artifact_addrs});
    }
    return dataset;
}

inline std::filesystem::path export_dataset(const TrainingDataset& dataset,
                                            const std::filesystem::path& path) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::storage_failure, "cannot write " + path.string());
    out << dataset.to_jsonl();
    return path;
}

// The training boundary: a fine-tuning pipeline can attach here. The default
// hook records invocations and trains nothing.
using TrainHook = std::function<void(const Branch&, const std::filesystem::path& dataset_file)>;

struct PruneResult {
    std::vector<Branch> kept;
    std::vector<Branch> pruned;
};

// Prunes branches whose audited quality fell below the threshold after enough
// observations. The single best branch always survives; ties break on id.
inline PruneResult prune_branches(std::vector<Branch> branches, const QualityLedger& ledger,
                                  const EvolutionConfig& cfg = {}) {
    if (branches.empty()) fail(Errc::no_backends, "prune requires at least one branch");
    for (auto& b : branches) {
        if (ledger.observations(b.id) > 0) {
            b.quality = ledger.score(b.id);
            b.observations = ledger.observations(b.id);
        }
    }
    PruneResult result;
    for (const auto& b : branches) {
        const bool prunable =
            b.observations >= cfg.min_observations && b.quality < cfg.prune_threshold;
        (prunable ? result.pruned : result.kept).push_back(b);
    }
    if (result.kept.empty()) {
        auto best = std::max_element(result.pruned.begin(), result.pruned.end(),
                                     [](const Branch& a, const Branch& b) {
                                         if (a.quality != b.quality) return a.quality < b.quality;
                                         return a.id > b.id;  // smaller id wins ties
                                     });
        result.kept.push_back(*best);
        result.pruned.erase(best);
    }
    return result;
}

struct RestructureResult {
    AgentGraph graph;
    std::map<AgentId, std::vector<AgentId>> lineage;  // survivor -> absorbed ids
    std::vector<std::string> actions;
    std::vector<std::string> rolled_back;

    nlohmann::json lineage_to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [survivor, absorbed] : lineage) j[survivor] = absorbed;
        return j;
    }
};

namespace detail {

// Applies one fuse: `absorbed` disappears into `survivor` (union tags/tools,
// all edges re-pointed). Returns false when the result would violate graph
// invariants, leaving the graph untouched.
inline bool try_fuse(AgentGraph& graph, const AgentId& survivor, const AgentId& absorbed) {
    AgentGraph candidate = graph;
    AgentNode& keep = candidate.node_mut(survivor);
    const AgentNode& gone = candidate.node(absorbed);
    keep.capability.tags.insert(gone.capability.tags.begin(), gone.capability.tags.end());
    keep.tool_names.insert(gone.tool_names.begin(), gone.tool_names.end());
    if (!gone.capability.summary.empty() && gone.capability.summary != keep.capability.summary) {
        keep.capability.summary += keep.capability.summary.empty() ? "" : " / ";
        keep.capability.summary += gone.capability.summary;
    }
    for (const auto& parent : candidate.parents_of(absorbed)) {
        AgentNode& p = candidate.node_mut(parent);
        const bool already_points = std::find(p.children.begin(), p.children.end(), survivor) !=
                                    p.children.end();
        p.children.erase(std::remove(p.children.begin(), p.children.end(), absorbed),
                         p.children.end());
        if (!already_points) p.children.push_back(survivor);
    }
    candidate.erase_agent(absorbed);
    if (!candidate.validate().ok()) return false;
    graph = std::move(candidate);
    return true;
}

// Splits one planner: its children move under fresh intermediate planners in
// deterministic chunks of at most k_max, restoring headroom at the planner.
inline bool try_split(AgentGraph& graph, const AgentId& planner_id) {
    AgentGraph candidate = graph;
    const AgentNode planner = candidate.node(planner_id);
    if (planner.children.empty()) return false;
    std::vector<AgentId> children = planner.children;
    const std::size_t k_max = static_cast<std::size_t>(candidate.k_max());
    const std::size_t groups = (children.size() + k_max - 1) / k_max;
    if (groups > k_max) return false;  // would need recursive splitting

    std::vector<AgentId> intermediates;
    for (std::size_t g = 0; g < groups; ++g) {
        const AgentId sub_id = planner_id + ".sub" + std::to_string(g + 1);
        if (candidate.contains(sub_id)) return false;
        AgentNode sub;
        sub.id = sub_id;
        sub.role = Role::planner;
        sub.level = planner.level + 1;
        sub.capability.summary = "delegation group " + std::to_string(g + 1) + " of " + planner_id;
        const std::size_t begin = g * k_max;
        const std::size_t end = std::min(children.size(), begin + k_max);
        for (std::size_t i = begin; i < end; ++i) {
            sub.children.push_back(children[i]);
            sub.capability.tags.insert(candidate.node(children[i]).capability.tags.begin(),
                                       candidate.node(children[i]).capability.tags.end());
        }
        intermediates.push_back(sub_id);
        try {
            candidate.add_agent(std::move(sub));
        } catch (const Error&) {
            return false;
        }
    }
    candidate.node_mut(planner_id).children = intermediates;
    candidate.refresh_levels();
    if (!candidate.validate().ok()) return false;
    graph = std::move(candidate);
    return true;
}

} // namespace detail

// Invariant-preserving topology restructuring:
//   fuse  — functional siblings whose capability-tag cosine reaches the
//           threshold merge into one node (smallest id survives, tags union)
//   split — planners whose decompositions kept getting truncated gain
//           intermediate child planners that redistribute their children
// Every transformation is validated on a copy and rolled back when it would
// violate an invariant; the returned graph is always validate-clean for
// valid inputs.
inline RestructureResult restructure_topology(const AgentGraph& graph, const QualityLedger& ledger,
                                              const EvolutionConfig& cfg = {},
                                              const std::map<AgentId, int>& truncation_pressure = {}) {
    (void)ledger;
    RestructureResult result;
    result.graph = graph;

    // Fusion candidates: pairs of functional children sharing a parent,
    // compared on tags alone, smallest id first.
    std::vector<std::pair<AgentId, AgentId>> fuse_pairs;
    for (const auto& [pid, parent] : graph.nodes()) {
        std::vector<AgentId> functional;
        for (const auto& cid : parent.children) {
            if (graph.contains(cid) && graph.node(cid).role == Role::functional) {
                functional.push_back(cid);
            }
        }
        std::sort(functional.begin(), functional.end());
        for (std::size_t i = 0; i < functional.size(); ++i) {
            for (std::size_t j = i + 1; j < functional.size(); ++j) {
                const double sim = cosine_overlap(graph.node(functional[i]).capability.tags,
                                                  graph.node(functional[j]).capability.tags);
                if (sim >= cfg.fuse_threshold) {
                    fuse_pairs.emplace_back(functional[i], functional[j]);
                }
            }
        }
    }
    std::sort(fuse_pairs.begin(), fuse_pairs.end());
    fuse_pairs.erase(std::unique(fuse_pairs.begin(), fuse_pairs.end()), fuse_pairs.end());
    for (const auto& [survivor, absorbed] : fuse_pairs) {
        if (!result.graph.contains(survivor) || !result.graph.contains(absorbed)) continue;
        if (detail::try_fuse(result.graph, survivor, absorbed)) {
            result.lineage[survivor].push_back(absorbed);
            result.actions.push_back("fused " + absorbed + " into " + survivor);
        } else {
            result.rolled_back.push_back("fuse " + absorbed + " into " + survivor);
        }
    }

    // Splits: planners under sustained fan-out pressure.
    std::vector<AgentId> to_split;
    for (const auto& [agent, count] : truncation_pressure) {
        if (count >= cfg.split_observations && result.graph.contains(agent) &&
            result.graph.node(agent).role == Role::planner) {
            to_split.push_back(agent);
        }
    }
    std::sort(to_split.begin(), to_split.end());
    for (const auto& planner : to_split) {
        if (detail::try_split(result.graph, planner)) {
            result.actions.push_back("split " + planner);
        } else {
            result.rolled_back.push_back("split " + planner);
        }
    }
    return result;
}

} // namespace ziggurat
