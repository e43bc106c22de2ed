#pragma once
// Offline ledger reconstruction from a persisted record tree, mirroring the
// orchestrator's deterministic replay order (children, prior attempts, final).

#include "ziggurat/audit.hpp"
#include "ziggurat/record.hpp"

#include <vector>

namespace ziggurat {

inline void replay_record_audits(const ExecutionRecord& rec, QualityLedger& ledger) {
    for (const auto& child : rec.children) replay_record_audits(child, ledger);
    for (const auto& prior : rec.prior_attempts) {
        if (prior.validation && !prior.agent.empty()) {
            ledger.update(prior.agent, prior.validation->score);
        }
    }
    if (rec.validation && !rec.agent.empty()) {
        ledger.update(rec.agent, rec.validation->score);
    }
}

inline QualityLedger reconstruct_ledger(const std::vector<ExecutionRecord>& roots,
                                        double alpha = 0.9, double initial = 0.5) {
    QualityLedger ledger(alpha, initial);
    for (const auto& root : roots) replay_record_audits(root, ledger);
    return ledger;
}

} // namespace ziggurat
