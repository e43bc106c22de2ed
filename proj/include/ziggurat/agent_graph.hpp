#pragma once
// The pyramid-like agent DAG: nodes, parent->child edges, roles, fan-out
// bounds and capacity accounting. Nodes added at level 0 are roots; levels of
// connected nodes are re-derived as shortest distance from any root.
//
// add_agent/connect enforce the construction invariants strictly; validate()
// re-checks everything and reports violations without throwing, so graphs
// planted with violations (via node_mut) are diagnosable.

#include "ziggurat/errors.hpp"
#include "ziggurat/tokens.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ziggurat {

using AgentId = std::string;

enum class Role { planner, functional, judge, router };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::planner:    return "planner";
        case Role::functional: return "functional";
        case Role::judge:      return "judge";
        case Role::router:     return "router";
    }
    return "unknown";
}

inline Role role_from_string(const std::string& s) {
    if (s == "planner") return Role::planner;
    if (s == "functional") return Role::functional;
    if (s == "judge") return Role::judge;
    if (s == "router") return Role::router;
    fail(Errc::invalid_role, "unknown role: " + s);
}

struct CapabilityDescriptor {
    std::string summary;
    std::set<std::string> tags;   // normalized lowercase tokens
    std::string io_contract;

    std::set<std::string> all_tokens() const {
        std::set<std::string> out = tags;
        for (const auto& t : tokenize(summary)) out.insert(t);
        return out;
    }

    bool operator==(const CapabilityDescriptor&) const = default;
};

struct AgentNode {
    AgentId id;
    int level = 0;                 // 0 = top; shortest distance from a root once connected
    Role role = Role::functional;
    CapabilityDescriptor capability;
    std::vector<AgentId> children; // ordered
    std::set<std::string> tool_names;
    std::string system_prompt;

    bool operator==(const AgentNode&) const = default;
};

enum class GraphFault {
    cycle,
    fan_out_exceeded,
    unreachable,
    depth_exceeded,
    functional_with_children,
    unknown_child,
    missing_capability_tags,
};

inline const char* to_string(GraphFault f) {
    switch (f) {
        case GraphFault::cycle:                    return "Cycle";
        case GraphFault::fan_out_exceeded:         return "FanOutExceeded";
        case GraphFault::unreachable:              return "Unreachable";
        case GraphFault::depth_exceeded:           return "DepthExceeded";
        case GraphFault::functional_with_children: return "FunctionalWithChildren";
        case GraphFault::unknown_child:            return "UnknownChild";
        case GraphFault::missing_capability_tags:  return "MissingCapabilityTags";
    }
    return "Unknown";
}

struct GraphFinding {
    GraphFault fault;
    AgentId agent;
    std::string detail;
};

struct ValidationReport {
    std::vector<GraphFinding> findings;

    bool ok() const { return findings.empty(); }

    std::size_t count(GraphFault f) const {
        return static_cast<std::size_t>(
            std::count_if(findings.begin(), findings.end(),
                          [f](const GraphFinding& g) { return g.fault == f; }));
    }

    std::string to_text() const {
        std::ostringstream out;
        for (const auto& f : findings) {
            out << to_string(f.fault) << " " << f.agent;
            if (!f.detail.empty()) out << ": " << f.detail;
            out << "\n";
        }
        return out.str();
    }
};

namespace detail {

inline bool valid_agent_id(const AgentId& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        const auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '_' && c != '-' && c != '.' && c != ':') return false;
    }
    return true;
}

} // namespace detail

class AgentGraph {
public:
    AgentGraph() = default;

    AgentGraph(int k_max, int max_depth) : k_max_(k_max), max_depth_(max_depth) {
        if (k_max_ < 1) fail(Errc::config_error, "k_max must be >= 1");
        if (max_depth_ < 1) fail(Errc::config_error, "max_depth must be >= 1");
    }

    int k_max() const { return k_max_; }
    int max_depth() const { return max_depth_; }
    std::size_t size() const { return nodes_.size(); }
    const std::map<AgentId, AgentNode>& nodes() const { return nodes_; }
    const std::set<AgentId>& roots() const { return roots_; }

    bool contains(const AgentId& id) const { return nodes_.count(id) != 0; }

    const AgentNode& node(const AgentId& id) const {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) fail(Errc::unknown_id, id);
        return it->second;
    }

    // Unchecked mutable access. Callers can break invariants through this;
    // validate() is the diagnostic for graphs mutated here.
    AgentNode& node_mut(const AgentId& id) {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) fail(Errc::unknown_id, id);
        return it->second;
    }

    // Adds a node. A node declared at level 0 becomes a root. Pre-declared
    // children are allowed (ids may not exist yet), but must respect the
    // fan-out bound and may not close a cycle.
    void add_agent(AgentNode node) {
        if (!detail::valid_agent_id(node.id)) {
            fail(Errc::unknown_id, "invalid agent id: '" + node.id + "'");
        }
        if (contains(node.id)) fail(Errc::duplicate_id, node.id);
        if (node.role == Role::functional && !node.children.empty()) {
            fail(Errc::invalid_role, "functional agent " + node.id + " declared with children");
        }
        if (static_cast<int>(node.children.size()) > k_max_) {
            fail(Errc::fan_out_exceeded,
                 node.id + " declares " + std::to_string(node.children.size()) +
                     " children, k_max=" + std::to_string(k_max_));
        }
        for (const auto& child : node.children) {
            if (child == node.id) fail(Errc::cycle_detected, node.id + " lists itself as child");
        }
        const bool is_root = node.level == 0;
        const AgentId id = node.id;
        nodes_.emplace(id, std::move(node));
        if (is_root) roots_.insert(id);
        if (find_cycle().has_value()) {
            nodes_.erase(id);
            roots_.erase(id);
            fail(Errc::cycle_detected, "adding " + id + " closes a cycle");
        }
        refresh_levels();
    }

    // Adds the edge parent -> child. Connecting twice is a no-op.
    void connect(const AgentId& parent, const AgentId& child) {
        auto pit = nodes_.find(parent);
        if (pit == nodes_.end()) fail(Errc::unknown_id, parent);
        if (!contains(child)) fail(Errc::unknown_id, child);
        AgentNode& p = pit->second;
        if (p.role == Role::functional) {
            fail(Errc::invalid_role, "functional agent " + parent + " cannot have children");
        }
        if (std::find(p.children.begin(), p.children.end(), child) != p.children.end()) {
            return;
        }
        if (parent == child) fail(Errc::cycle_detected, parent + " -> itself");
        if (reachable(child, parent)) {
            fail(Errc::cycle_detected, parent + " -> " + child + " closes a cycle");
        }
        if (static_cast<int>(p.children.size()) + 1 > k_max_) {
            fail(Errc::fan_out_exceeded,
                 parent + " already has " + std::to_string(p.children.size()) +
                     " children, k_max=" + std::to_string(k_max_));
        }
        p.children.push_back(child);
        refresh_levels();
    }

    // Removes a node and every edge pointing at it (used by fusion).
    void erase_agent(const AgentId& id) {
        if (!contains(id)) fail(Errc::unknown_id, id);
        nodes_.erase(id);
        roots_.erase(id);
        for (auto& [nid, n] : nodes_) {
            n.children.erase(std::remove(n.children.begin(), n.children.end(), id),
                             n.children.end());
        }
        refresh_levels();
    }

    std::vector<AgentId> parents_of(const AgentId& id) const {
        std::vector<AgentId> out;
        for (const auto& [nid, n] : nodes_) {
            if (std::find(n.children.begin(), n.children.end(), id) != n.children.end()) {
                out.push_back(nid);
            }
        }
        return out;
    }

    // True when `to` is reachable from `from` along child edges.
    bool reachable(const AgentId& from, const AgentId& to) const {
        if (from == to) return true;
        std::set<AgentId> seen;
        std::deque<AgentId> queue{from};
        while (!queue.empty()) {
            AgentId cur = queue.front();
            queue.pop_front();
            if (!seen.insert(cur).second) continue;
            auto it = nodes_.find(cur);
            if (it == nodes_.end()) continue;
            for (const auto& child : it->second.children) {
                if (child == to) return true;
                queue.push_back(child);
            }
        }
        return false;
    }

    // Shortest distance from any root, BFS. Unreachable nodes are absent.
    std::map<AgentId, int> derive_levels() const {
        std::map<AgentId, int> dist;
        std::deque<AgentId> queue;
        for (const auto& r : roots_) {
            if (contains(r)) {
                dist[r] = 0;
                queue.push_back(r);
            }
        }
        while (!queue.empty()) {
            AgentId cur = queue.front();
            queue.pop_front();
            auto it = nodes_.find(cur);
            if (it == nodes_.end()) continue;
            for (const auto& child : it->second.children) {
                if (!contains(child) || dist.count(child)) continue;
                dist[child] = dist[cur] + 1;
                queue.push_back(child);
            }
        }
        return dist;
    }

    // Rewrites node levels from topology. Unreachable nodes keep their
    // declared level until connected.
    void refresh_levels() {
        const auto levels = derive_levels();
        for (auto& [id, node] : nodes_) {
            auto it = levels.find(id);
            if (it != levels.end()) node.level = it->second;
        }
    }

    ValidationReport validate() const {
        ValidationReport report;
        for (const auto& [id, n] : nodes_) {
            if (n.role == Role::functional && !n.children.empty()) {
                report.findings.push_back({GraphFault::functional_with_children, id,
                                           std::to_string(n.children.size()) + " children"});
            }
            if (static_cast<int>(n.children.size()) > k_max_) {
                report.findings.push_back(
                    {GraphFault::fan_out_exceeded, id,
                     std::to_string(n.children.size()) + " > k_max=" + std::to_string(k_max_)});
            }
            for (const auto& child : n.children) {
                if (!contains(child)) {
                    report.findings.push_back({GraphFault::unknown_child, id, child});
                }
            }
            if (n.role == Role::functional && n.capability.tags.empty()) {
                report.findings.push_back({GraphFault::missing_capability_tags, id, ""});
            }
        }
        const auto levels = derive_levels();
        for (const auto& [id, n] : nodes_) {
            auto it = levels.find(id);
            if (it == levels.end()) {
                report.findings.push_back({GraphFault::unreachable, id, ""});
            } else if (it->second > max_depth_) {
                report.findings.push_back(
                    {GraphFault::depth_exceeded, id,
                     std::to_string(it->second) + " > max_depth=" + std::to_string(max_depth_)});
            }
        }
        if (auto cycle = find_cycle()) {
            std::string path;
            for (const auto& id : *cycle) {
                if (!path.empty()) path += " -> ";
                path += id;
            }
            report.findings.push_back({GraphFault::cycle, cycle->front(), path});
        }
        return report;
    }

    bool operator==(const AgentGraph& other) const {
        return k_max_ == other.k_max_ && max_depth_ == other.max_depth_ &&
               roots_ == other.roots_ && nodes_ == other.nodes_;
    }

private:
    // Returns one cycle as a node sequence, if any (DFS, three-color).
    std::optional<std::vector<AgentId>> find_cycle() const {
        std::map<AgentId, int> color;  // 0 white, 1 grey, 2 black
        std::vector<AgentId> stack;
        std::optional<std::vector<AgentId>> found;

        auto dfs = [&](auto&& self, const AgentId& id) -> bool {
            color[id] = 1;
            stack.push_back(id);
            auto it = nodes_.find(id);
            if (it != nodes_.end()) {
                for (const auto& child : it->second.children) {
                    if (!contains(child)) continue;
                    const int c = color.count(child) ? color[child] : 0;
                    if (c == 1) {
                        auto pos = std::find(stack.begin(), stack.end(), child);
                        std::vector<AgentId> cycle(pos, stack.end());
                        cycle.push_back(child);
                        found = cycle;
                        return true;
                    }
                    if (c == 0 && self(self, child)) return true;
                }
            }
            color[id] = 2;
            stack.pop_back();
            return false;
        };

        for (const auto& [id, n] : nodes_) {
            if ((color.count(id) ? color[id] : 0) == 0) {
                if (dfs(dfs, id)) return found;
            }
        }
        return std::nullopt;
    }

    std::map<AgentId, AgentNode> nodes_;
    std::set<AgentId> roots_;
    int k_max_ = 5;
    int max_depth_ = 8;
};

inline ValidationReport validate_graph(const AgentGraph& graph) { return graph.validate(); }

// Approximate reachable functional-agent count of a depth-L pyramid with
// average branching factor b: b^L. Exact for integer inputs below 2^53.
inline double functional_capacity(double branching, int depth) {
    if (branching < 1.0) fail(Errc::out_of_range, "branching factor must be >= 1");
    if (depth < 0) fail(Errc::out_of_range, "depth must be >= 0");
    double result = 1.0;
    double base = branching;
    int exp = depth;
    while (exp > 0) {
        if (exp & 1) result *= base;
        base *= base;
        exp >>= 1;
    }
    return result;
}

// --- serialization: one human-editable JSON document per graph -------------

inline nlohmann::json graph_to_json(const AgentGraph& graph) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, n] : graph.nodes()) {
        nlohmann::json jn{
            {"id", n.id},
            {"level", n.level},
            {"role", to_string(n.role)},
            {"summary", n.capability.summary},
            {"tags", n.capability.tags},
            {"io_contract", n.capability.io_contract},
            {"children", n.children},
            {"tool_names", n.tool_names},
        };
        if (!n.system_prompt.empty()) jn["system_prompt"] = n.system_prompt;
        nodes.push_back(std::move(jn));
    }
    return nlohmann::json{
        {"k_max", graph.k_max()},
        {"max_depth", graph.max_depth()},
        {"nodes", std::move(nodes)},
    };
}

inline AgentGraph graph_from_json(const nlohmann::json& j) {
    AgentGraph graph(j.value("k_max", 5), j.value("max_depth", 8));
    // Two passes so forward child references load: nodes first without
    // children, then edges via unchecked access (files are validated after).
    std::vector<AgentNode> parsed;
    for (const auto& jn : j.at("nodes")) {
        AgentNode n;
        n.id = jn.at("id").get<std::string>();
        n.level = jn.value("level", 0);
        n.role = role_from_string(jn.at("role").get<std::string>());
        n.capability.summary = jn.value("summary", "");
        if (jn.contains("tags")) n.capability.tags = jn.at("tags").get<std::set<std::string>>();
        n.capability.io_contract = jn.value("io_contract", "");
        if (jn.contains("children")) n.children = jn.at("children").get<std::vector<AgentId>>();
        if (jn.contains("tool_names")) {
            n.tool_names = jn.at("tool_names").get<std::set<std::string>>();
        }
        n.system_prompt = jn.value("system_prompt", "");
        parsed.push_back(std::move(n));
    }
    for (const auto& n : parsed) {
        AgentNode bare = n;
        bare.children.clear();
        graph.add_agent(std::move(bare));
    }
    for (const auto& n : parsed) {
        graph.node_mut(n.id).children = n.children;
    }
    graph.refresh_levels();
    return graph;
}

inline std::string save_graph(const AgentGraph& graph) { return graph_to_json(graph).dump(2) + "\n"; }

inline AgentGraph load_graph(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(Errc::config_error, "graph file is not valid JSON");
    return graph_from_json(j);
}

inline void save_graph_file(const AgentGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::storage_failure, "cannot write " + path);
    out << save_graph(graph);
}

inline AgentGraph load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::storage_failure, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_graph(buf.str());
}

} // namespace ziggurat
