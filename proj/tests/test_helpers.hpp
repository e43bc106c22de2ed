#pragma once
// Shared fixtures: temp directories, reference graphs and scenarios.

#include "ziggurat/ziggurat.hpp"

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

namespace zt {

using namespace ziggurat;

// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ziggurat-test-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline AgentNode make_node(AgentId id, int level, Role role,
                           std::set<std::string> tags = {}, std::string summary = "") {
    AgentNode n;
    n.id = std::move(id);
    n.level = level;
    n.role = role;
    n.capability.tags = std::move(tags);
    n.capability.summary = std::move(summary);
    return n;
}

// One planner, three functional specialists. Valid; routes cleanly for the
// sales-analysis scenarios.
inline AgentGraph sales_pyramid() {
    AgentGraph g(5, 8);
    g.add_agent(make_node("top", 0, Role::planner,
                          {"analyze", "sales", "data", "write", "report", "plan"}));
    g.add_agent(make_node("collector", 1, Role::functional, {"collect", "sales", "data"}));
    g.add_agent(make_node("analyst", 1, Role::functional, {"analyze", "statistics", "sales"}));
    g.add_agent(make_node("writer", 1, Role::functional, {"write", "report", "sales"}));
    g.connect("top", "collector");
    g.connect("top", "analyst");
    g.connect("top", "writer");
    return g;
}

inline ScenarioEntry decompose_entry(std::string match, std::vector<std::string> subtasks) {
    ScenarioEntry e;
    e.kind = "decompose";
    e.match = std::move(match);
    e.subtasks = std::move(subtasks);
    return e;
}

inline ScenarioEntry atom_entry(std::string match, std::string addr, std::string content,
                                std::string desc, std::string output = "done") {
    ScenarioEntry e;
    e.kind = "atom";
    e.match = std::move(match);
    e.output = std::move(output);
    e.artifacts.push_back({std::move(addr), std::move(content), std::move(desc)});
    return e;
}

// The clean depth-2 run: decompose into three atoms, each writing one
// task-scoped artifact.
inline Scenario sales_scenario() {
    Scenario s;
    s.tasks = {"analyze sales data and write report"};
    s.entries.push_back(decompose_entry(
        "analyze sales data",
        {"collect sales data", "analyze sales statistics", "write sales report"}));
    s.entries.push_back(
        atom_entry("collect sales data", "tasks/{task}/data.csv", "1,2,3", "raw sales data"));
    s.entries.push_back(atom_entry("analyze sales statistics", "tasks/{task}/stats.txt",
                                   "mean=2", "sales statistics"));
    s.entries.push_back(atom_entry("write sales report", "tasks/{task}/report.md",
                                   "# report", "final sales report"));
    return s;
}

inline std::string join_findings(const std::vector<std::string>& findings) {
    std::string out;
    for (const auto& f : findings) out += f + "; ";
    return out;
}

} // namespace zt
