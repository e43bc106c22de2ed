#pragma once
// A unit of work flowing through the pyramid. Sub-tasks keep parent links and
// a depth counter so the fan-out and depth bounds are checkable everywhere.

#include <optional>
#include <string>
#include <vector>

namespace ziggurat {

enum class TaskStatus { pending, running, succeeded, failed };

inline const char* to_string(TaskStatus s) {
    switch (s) {
        case TaskStatus::pending:   return "pending";
        case TaskStatus::running:   return "running";
        case TaskStatus::succeeded: return "succeeded";
        case TaskStatus::failed:    return "failed";
    }
    return "unknown";
}

struct Task {
    std::string id;
    std::string description;
    int depth = 0;
    std::optional<std::string> parent;
    std::vector<std::string> children;
    TaskStatus status = TaskStatus::pending;

    static Task root(std::string id, std::string description) {
        Task t;
        t.id = std::move(id);
        t.description = std::move(description);
        return t;
    }

    Task child(std::size_t index, std::string description) const {
        Task t;
        t.id = id + "." + std::to_string(index + 1);
        t.description = std::move(description);
        t.depth = depth + 1;
        t.parent = id;
        return t;
    }
};

} // namespace ziggurat
