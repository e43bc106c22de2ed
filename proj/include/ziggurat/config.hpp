#pragma once
// Run-wide configuration. Every tunable default lives here so a config file
// maps 1:1 onto the struct.

#include "ziggurat/errors.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace ziggurat {

struct RunConfig {
    int k_max = 5;                      // fan-out bound per parent
    int max_depth = 8;                  // pyramid depth bound
    int retries = 2;                    // retry budget after audit rejection
    int max_parallel = 4;               // sibling-task worker bound
    std::uint64_t token_budget = 4096;  // per-context size bound
    std::uint64_t tau = 0;              // env-log compression threshold; 0 -> budget/4
    double lm_fraction = 0.15;          // file-index sub-budget as fraction of budget
    double alpha = 0.9;                 // quality EMA smoothing
    double initial_quality = 0.5;       // Q0 for unseen agents
    double acceptance_threshold = 0.7;  // validation verdict cutoff
    double prune_threshold = 0.4;       // branch pruning cutoff
    double fuse_threshold = 0.8;        // capability-tag cosine for fusion
    int min_observations = 5;           // audited tasks before a branch may be pruned
    int split_observations = 3;         // truncation events before a planner splits
    bool strict_coverage = false;       // coverage gaps reject the decomposition
    bool strict_judge = false;          // judge unavailability rejects instead of flagging
    std::uint64_t seed = 0;             // scheduling jitter seed (logic is seed-free)
    int task_timeout_ms = 300000;       // per-task wall budget; deterministic executors skip it
    std::size_t max_inline_output = 4096;  // merge outputs longer than this are inlined payloads
    double score_floor = 0.0;           // routing floor, exclusive

    std::uint64_t effective_tau() const { return tau == 0 ? token_budget / 4 : tau; }

    void validate() const {
        auto check = [](bool ok, const std::string& what) {
            if (!ok) fail(Errc::config_error, what);
        };
        check(k_max >= 1, "k_max must be >= 1");
        check(max_depth >= 1, "max_depth must be >= 1");
        check(retries >= 0, "retries must be >= 0");
        check(max_parallel >= 1, "max_parallel must be >= 1");
        check(token_budget >= 64, "token_budget must be >= 64");
        check(tau <= token_budget, "tau must not exceed token_budget");
        check(lm_fraction > 0.0 && lm_fraction < 1.0, "lm_fraction must be in (0,1)");
        check(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0,1]");
        check(initial_quality >= 0.0 && initial_quality <= 1.0, "initial_quality must be in [0,1]");
        check(acceptance_threshold >= 0.0 && acceptance_threshold <= 1.0,
              "acceptance_threshold must be in [0,1]");
        check(prune_threshold >= 0.0 && prune_threshold <= 1.0, "prune_threshold must be in [0,1]");
        check(fuse_threshold >= 0.0 && fuse_threshold <= 1.0, "fuse_threshold must be in [0,1]");
        check(min_observations >= 1, "min_observations must be >= 1");
        check(split_observations >= 1, "split_observations must be >= 1");
        check(task_timeout_ms >= 0, "task_timeout_ms must be >= 0");
        check(score_floor >= 0.0, "score_floor must be >= 0");
    }

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"k_max", k_max},
            {"max_depth", max_depth},
            {"retries", retries},
            {"max_parallel", max_parallel},
            {"token_budget", token_budget},
            {"tau", tau},
            {"lm_fraction", lm_fraction},
            {"alpha", alpha},
            {"initial_quality", initial_quality},
            {"acceptance_threshold", acceptance_threshold},
            {"prune_threshold", prune_threshold},
            {"fuse_threshold", fuse_threshold},
            {"min_observations", min_observations},
            {"split_observations", split_observations},
            {"strict_coverage", strict_coverage},
            {"strict_judge", strict_judge},
            {"seed", seed},
            {"task_timeout_ms", task_timeout_ms},
            {"max_inline_output", max_inline_output},
            {"score_floor", score_floor},
        };
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig cfg;
        auto pick = [&j](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        pick("k_max", cfg.k_max);
        pick("max_depth", cfg.max_depth);
        pick("retries", cfg.retries);
        pick("max_parallel", cfg.max_parallel);
        pick("token_budget", cfg.token_budget);
        pick("tau", cfg.tau);
        pick("lm_fraction", cfg.lm_fraction);
        pick("alpha", cfg.alpha);
        pick("initial_quality", cfg.initial_quality);
        pick("acceptance_threshold", cfg.acceptance_threshold);
        pick("prune_threshold", cfg.prune_threshold);
        pick("fuse_threshold", cfg.fuse_threshold);
        pick("min_observations", cfg.min_observations);
        pick("split_observations", cfg.split_observations);
        pick("strict_coverage", cfg.strict_coverage);
        pick("strict_judge", cfg.strict_judge);
        pick("seed", cfg.seed);
        pick("task_timeout_ms", cfg.task_timeout_ms);
        pick("max_inline_output", cfg.max_inline_output);
        pick("score_floor", cfg.score_floor);
        cfg.validate();
        return cfg;
    }
};

} // namespace ziggurat
