#pragma once
// Per-run counters and size series. Context and history series are keyed by
// task so parallel runs stay byte-deterministic; wall-clock figures live in a
// separate section that canonical serialization omits.

#include <json.hpp>

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace ziggurat {

class Metrics {
public:
    void count_task() { bump(tasks_); }
    void count_retry() { bump(retries_); }
    void count_audit() { bump(audits_); }
    void count_reject() { bump(rejects_); }
    void count_judge() { bump(judge_calls_); }
    void count_executor_call() { bump(executor_calls_); }
    void count_fault() { bump(faults_seen_); }

    void add_tokens(std::uint64_t n) {
        std::scoped_lock lock(mutex_);
        tokens_consumed_ += n;
    }

    void record_context_size(const std::string& task_id, std::uint64_t units) {
        std::scoped_lock lock(mutex_);
        context_series_[task_id].push_back(units);
    }

    void record_history_size(const std::string& task_id, std::uint64_t units) {
        std::scoped_lock lock(mutex_);
        history_series_[task_id].push_back(units);
    }

    void set_history_total(std::uint64_t units) {
        std::scoped_lock lock(mutex_);
        history_units_final_ = units;
    }

    void set_wall_ms(double ms) {
        std::scoped_lock lock(mutex_);
        wall_ms_ = ms;
    }

    std::uint64_t tasks() const { return read(tasks_); }
    std::uint64_t retries() const { return read(retries_); }
    std::uint64_t audits() const { return read(audits_); }
    std::uint64_t rejects() const { return read(rejects_); }
    std::uint64_t judge_calls() const { return read(judge_calls_); }
    std::uint64_t executor_calls() const { return read(executor_calls_); }
    std::uint64_t history_units_final() const { return read(history_units_final_); }
    double wall_ms() const {
        std::scoped_lock lock(mutex_);
        return wall_ms_;
    }

    std::map<std::string, std::vector<std::uint64_t>> context_series() const {
        std::scoped_lock lock(mutex_);
        return context_series_;
    }

    nlohmann::json to_json(bool include_wall = false) const {
        std::scoped_lock lock(mutex_);
        nlohmann::json j{
            {"tasks", tasks_},
            {"retries", retries_},
            {"audits", audits_},
            {"rejects", rejects_},
            {"judge_calls", judge_calls_},
            {"executor_calls", executor_calls_},
            {"faults_seen", faults_seen_},
            {"tokens_consumed", tokens_consumed_},
            {"history_units_final", history_units_final_},
            {"context_series", context_series_},
            {"history_series", history_series_},
        };
        if (include_wall) j["wall_ms"] = wall_ms_;
        return j;
    }

private:
    void bump(std::uint64_t& field) {
        std::scoped_lock lock(mutex_);
        ++field;
    }

    std::uint64_t read(const std::uint64_t& field) const {
        std::scoped_lock lock(mutex_);
        return field;
    }

    mutable std::mutex mutex_;
    std::uint64_t tasks_ = 0;
    std::uint64_t retries_ = 0;
    std::uint64_t audits_ = 0;
    std::uint64_t rejects_ = 0;
    std::uint64_t judge_calls_ = 0;
    std::uint64_t executor_calls_ = 0;
    std::uint64_t faults_seen_ = 0;
    std::uint64_t tokens_consumed_ = 0;
    std::uint64_t history_units_final_ = 0;
    double wall_ms_ = 0.0;
    std::map<std::string, std::vector<std::uint64_t>> context_series_;
    std::map<std::string, std::vector<std::uint64_t>> history_series_;
};

} // namespace ziggurat
