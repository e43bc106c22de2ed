#pragma once
// The strict three-field output contract every agent reply must satisfy:
// a JSON object with exactly {status, output, error_information}, all strings.
// Workspace references are embedded in the output text as "@ref <addr> | <desc>"
// lines so the contract itself stays payload-free.

#include "ziggurat/errors.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ziggurat {

struct ArtifactRef {
    std::string addr;
    std::string desc;

    bool operator==(const ArtifactRef&) const = default;
};

inline std::string ref_line(const ArtifactRef& ref) {
    return "@ref " + ref.addr + " | " + ref.desc;
}

// Extracts every "@ref <addr> | <desc>" line from an output text.
inline std::vector<ArtifactRef> extract_refs(std::string_view output_text) {
    std::vector<ArtifactRef> refs;
    std::size_t pos = 0;
    while (pos <= output_text.size()) {
        std::size_t eol = output_text.find('\n', pos);
        if (eol == std::string_view::npos) eol = output_text.size();
        std::string_view line = output_text.substr(pos, eol - pos);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        if (line.rfind("@ref ", 0) == 0) {
            line.remove_prefix(5);
            const std::size_t sep = line.find('|');
            std::string addr;
            std::string desc;
            if (sep == std::string_view::npos) {
                addr = std::string(line);
            } else {
                addr = std::string(line.substr(0, sep));
                desc = std::string(line.substr(sep + 1));
            }
            auto trim = [](std::string& s) {
                while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
                while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
            };
            trim(addr);
            trim(desc);
            if (!addr.empty()) refs.push_back({addr, desc});
        }
        pos = eol + 1;
    }
    return refs;
}

// Finds the first balanced JSON object in free text (used when a backend wraps
// its reply in prose). Returns std::nullopt when no balanced object exists.
inline std::optional<std::string> extract_first_json_object(std::string_view text) {
    const std::size_t start = text.find('{');
    if (start == std::string_view::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
            if (depth == 0) return std::string(text.substr(start, i - start + 1));
        }
    }
    return std::nullopt;
}

struct AgentOutput {
    enum class Status { success, error };

    Status status = Status::success;
    std::string output;
    std::string error_information;

    bool ok() const { return status == Status::success; }

    std::vector<ArtifactRef> refs() const { return extract_refs(output); }

    std::string to_json() const {
        nlohmann::json j;
        j["status"] = status == Status::success ? "success" : "error";
        j["output"] = output;
        j["error_information"] = error_information;
        return j.dump();
    }

    // Strict parse: exactly the three contract fields, all strings, with
    // error_information non-empty iff status is "error".
    static AgentOutput from_json_text(std::string_view text) {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) fail(Errc::contract_violation, "reply is not valid JSON");
        if (!j.is_object()) fail(Errc::contract_violation, "reply is not a JSON object");
        if (j.size() != 3 || !j.contains("status") || !j.contains("output") ||
            !j.contains("error_information")) {
            fail(Errc::contract_violation,
                 "object must contain exactly status, output, error_information");
        }
        for (const char* key : {"status", "output", "error_information"}) {
            if (!j.at(key).is_string()) {
                fail(Errc::contract_violation, std::string(key) + " must be a string");
            }
        }
        AgentOutput out;
        const std::string status = j.at("status").get<std::string>();
        if (status == "success") {
            out.status = Status::success;
        } else if (status == "error") {
            out.status = Status::error;
        } else {
            fail(Errc::contract_violation, "status must be success or error, got: " + status);
        }
        out.output = j.at("output").get<std::string>();
        out.error_information = j.at("error_information").get<std::string>();
        if (out.status == Status::error && out.error_information.empty()) {
            fail(Errc::contract_violation, "error status requires error_information");
        }
        if (out.status == Status::success && !out.error_information.empty()) {
            fail(Errc::contract_violation, "success status forbids error_information");
        }
        return out;
    }

    static AgentOutput success_with(std::string text) {
        return AgentOutput{Status::success, std::move(text), ""};
    }

    static AgentOutput failure(std::string text, std::string error_info) {
        return AgentOutput{Status::error, std::move(text), std::move(error_info)};
    }

    bool operator==(const AgentOutput&) const = default;
};

inline const char* to_string(AgentOutput::Status s) {
    return s == AgentOutput::Status::success ? "success" : "error";
}

} // namespace ziggurat
