#pragma once
// Error codes and the exception type shared across the library.

#include <stdexcept>
#include <string>

namespace ziggurat {

enum class Errc {
    duplicate_id,
    invalid_role,
    fan_out_exceeded,
    cycle_detected,
    unknown_id,
    no_candidate,
    executor_failure,
    depth_exceeded,
    empty_decomposition,
    routing_failure,
    audit_rejected,
    timeout,
    contract_violation,
    coverage_gap,
    address_escape,
    descriptor_too_long,
    storage_failure,
    not_found,
    dangling_address,
    unknown_recipient,
    budget_impossible,
    out_of_range,
    judge_unavailable,
    verify_only_violation,
    unmatched_request,
    transport_error,
    auth_missing,
    no_backends,
    would_violate_invariant,
    scenario_error,
    config_error,
};

inline const char* to_string(Errc c) {
    switch (c) {
        case Errc::duplicate_id:           return "DuplicateId";
        case Errc::invalid_role:           return "InvalidRole";
        case Errc::fan_out_exceeded:       return "FanOutExceeded";
        case Errc::cycle_detected:         return "CycleDetected";
        case Errc::unknown_id:             return "UnknownId";
        case Errc::no_candidate:           return "NoCandidate";
        case Errc::executor_failure:       return "ExecutorFailure";
        case Errc::depth_exceeded:         return "DepthExceeded";
        case Errc::empty_decomposition:    return "EmptyDecomposition";
        case Errc::routing_failure:        return "RoutingFailure";
        case Errc::audit_rejected:         return "AuditRejected";
        case Errc::timeout:                return "Timeout";
        case Errc::contract_violation:     return "ContractViolation";
        case Errc::coverage_gap:           return "CoverageGap";
        case Errc::address_escape:         return "AddressEscape";
        case Errc::descriptor_too_long:    return "DescriptorTooLong";
        case Errc::storage_failure:        return "StorageFailure";
        case Errc::not_found:              return "NotFound";
        case Errc::dangling_address:       return "DanglingAddress";
        case Errc::unknown_recipient:      return "UnknownRecipient";
        case Errc::budget_impossible:      return "BudgetImpossible";
        case Errc::out_of_range:           return "OutOfRange";
        case Errc::judge_unavailable:      return "JudgeUnavailable";
        case Errc::verify_only_violation:  return "VerifyOnlyViolation";
        case Errc::unmatched_request:      return "UnmatchedRequest";
        case Errc::transport_error:        return "Transport";
        case Errc::auth_missing:           return "AuthMissing";
        case Errc::no_backends:            return "NoBackends";
        case Errc::would_violate_invariant: return "WouldViolateInvariant";
        case Errc::scenario_error:         return "ScenarioError";
        case Errc::config_error:           return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace ziggurat
