#pragma once
// Run-directory layout and serialization. Canonical artifacts (record trees,
// metrics) are byte-deterministic; wall-clock figures go to timings.json.

#include "ziggurat/errors.hpp"
#include "ziggurat/metrics.hpp"
#include "ziggurat/record.hpp"
#include "ziggurat/system_audit.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ziggurat {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::storage_failure, "cannot write " + path.string());
    out << content;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::storage_failure, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_records(const std::filesystem::path& run_dir,
                          const std::vector<ExecutionRecord>& roots) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : roots) arr.push_back(record_to_json(r, /*include_timings=*/false));
    write_text_file(run_dir / "records.json", arr.dump(2) + "\n");
}

inline std::vector<ExecutionRecord> load_records(const std::filesystem::path& run_dir) {
    const std::string text = read_text_file(run_dir / "records.json");
    nlohmann::json arr = nlohmann::json::parse(text, nullptr, false);
    if (arr.is_discarded()) fail(Errc::storage_failure, "records.json is not valid JSON");
    std::vector<ExecutionRecord> roots;
    for (const auto& j : arr) roots.push_back(record_from_json(j));
    return roots;
}

inline void write_metrics(const std::filesystem::path& run_dir, const Metrics& metrics) {
    write_text_file(run_dir / "metrics.json", metrics.to_json(false).dump(2) + "\n");
    write_text_file(run_dir / "timings.json",
                    nlohmann::json{{"wall_ms", metrics.wall_ms()}}.dump(2) + "\n");
}

inline void write_audit_report(const std::filesystem::path& run_dir,
                               const SystemAuditReport& report) {
    write_text_file(run_dir / "audit_report.json", report.to_json().dump(2) + "\n");
    write_text_file(run_dir / "audit_report.txt", report.to_text());
}

} // namespace ziggurat
