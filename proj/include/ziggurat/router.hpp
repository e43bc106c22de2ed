#pragma once
// Task-to-agent matching. route() consults an inverted token index so only
// agents sharing a token with the task are scored; exhaustive_route() scores
// every node by full enumeration and serves as the ground-truth oracle. Both
// apply identical tie-breaks: higher score, then lower level, then smaller id.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/task.hpp"
#include "ziggurat/tokens.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ziggurat {

struct RouterConfig {
    double score_floor = 0.0;  // exclusive: candidates must score strictly above
};

struct RouteResult {
    AgentId target;
    double score = 0.0;
    std::vector<AgentId> path;                           // root -> target
    std::vector<std::pair<AgentId, double>> alternatives;  // ranked, target excluded

    bool operator==(const RouteResult&) const = default;

    nlohmann::json to_json() const {
        nlohmann::json alts = nlohmann::json::array();
        for (const auto& [id, s] : alternatives) alts.push_back({{"agent", id}, {"score", s}});
        return nlohmann::json{
            {"target", target}, {"score", score}, {"path", path}, {"alternatives", alts}};
    }
};

// Cosine overlap between the task token set and the agent's capability tokens
// (tags plus summary tokens). Pure and deterministic.
inline double score(const Task& task, const AgentNode& agent) {
    return cosine_overlap(tokenize(task.description), agent.capability.all_tokens());
}

namespace detail {

struct ScoredAgent {
    AgentId id;
    double score;
    int level;
};

inline bool ranks_before(const ScoredAgent& a, const ScoredAgent& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.level != b.level) return a.level < b.level;
    return a.id < b.id;
}

// Shortest root-to-target path; among equally short paths the lexicographically
// smallest id sequence, built greedily from the root side.
inline std::vector<AgentId> shortest_path(const AgentGraph& graph, const AgentId& target) {
    const auto dist_from_roots = graph.derive_levels();
    auto it = dist_from_roots.find(target);
    if (it == dist_from_roots.end()) return {target};  // unreachable: degenerate path
    const int total = it->second;

    // distance to target along child edges, reverse BFS
    std::map<AgentId, int> dist_to_target;
    dist_to_target[target] = 0;
    std::deque<AgentId> queue{target};
    std::map<AgentId, std::vector<AgentId>> parents;
    for (const auto& [id, n] : graph.nodes()) {
        for (const auto& child : n.children) parents[child].push_back(id);
    }
    while (!queue.empty()) {
        AgentId cur = queue.front();
        queue.pop_front();
        for (const auto& p : parents[cur]) {
            if (dist_to_target.count(p)) continue;
            dist_to_target[p] = dist_to_target[cur] + 1;
            queue.push_back(p);
        }
    }

    std::vector<AgentId> path;
    AgentId current;
    for (const auto& r : graph.roots()) {  // roots() is ordered; first valid = smallest
        auto d = dist_to_target.find(r);
        if (d != dist_to_target.end() && d->second == total) {
            current = r;
            break;
        }
    }
    if (current.empty()) return {target};
    path.push_back(current);
    int remaining = total;
    while (remaining > 0) {
        const AgentNode& n = graph.node(current);
        std::vector<AgentId> next(n.children.begin(), n.children.end());
        std::sort(next.begin(), next.end());
        AgentId chosen;
        for (const auto& c : next) {
            auto d = dist_to_target.find(c);
            if (d != dist_to_target.end() && d->second == remaining - 1) {
                chosen = c;
                break;
            }
        }
        if (chosen.empty()) return {target};
        path.push_back(chosen);
        current = chosen;
        --remaining;
    }
    return path;
}

inline RouteResult pick(const AgentGraph& graph, std::vector<ScoredAgent> scored,
                        const RouterConfig& cfg) {
    std::erase_if(scored, [&](const ScoredAgent& s) { return s.score <= cfg.score_floor; });
    if (scored.empty()) {
        fail(Errc::no_candidate, "no agent scores above floor " + std::to_string(cfg.score_floor));
    }
    std::sort(scored.begin(), scored.end(), ranks_before);
    RouteResult result;
    result.target = scored.front().id;
    result.score = scored.front().score;
    result.path = shortest_path(graph, result.target);
    for (std::size_t i = 1; i < scored.size(); ++i) {
        result.alternatives.emplace_back(scored[i].id, scored[i].score);
    }
    return result;
}

} // namespace detail

// Ground-truth oracle: scores every node by full enumeration.
inline RouteResult exhaustive_route(const Task& task, const AgentGraph& graph,
                                    const RouterConfig& cfg = {}) {
    if (cfg.score_floor < 0.0) fail(Errc::config_error, "score_floor must be >= 0");
    std::vector<detail::ScoredAgent> scored;
    for (const auto& [id, n] : graph.nodes()) {
        scored.push_back({id, score(task, n), n.level});
    }
    return detail::pick(graph, std::move(scored), cfg);
}

// Indexed route: an inverted token index narrows scoring to agents sharing at
// least one token with the task. Agrees with exhaustive_route on all inputs
// because zero-overlap agents score 0, below any non-negative floor.
inline RouteResult route(const Task& task, const AgentGraph& graph, const RouterConfig& cfg = {}) {
    if (cfg.score_floor < 0.0) fail(Errc::config_error, "score_floor must be >= 0");
    std::map<std::string, std::vector<AgentId>> index;
    for (const auto& [id, n] : graph.nodes()) {
        for (const auto& token : n.capability.all_tokens()) index[token].push_back(id);
    }
    std::set<AgentId> candidates;
    for (const auto& token : tokenize(task.description)) {
        auto it = index.find(token);
        if (it == index.end()) continue;
        candidates.insert(it->second.begin(), it->second.end());
    }
    std::vector<detail::ScoredAgent> scored;
    for (const auto& id : candidates) {
        const AgentNode& n = graph.node(id);
        scored.push_back({id, score(task, n), n.level});
    }
    return detail::pick(graph, std::move(scored), cfg);
}

} // namespace ziggurat
