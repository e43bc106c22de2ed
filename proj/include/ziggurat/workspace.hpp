#pragma once
// Shared artifact store. Agents exchange only (addr, desc) messages; payloads
// live on disk under <run>/artifacts/<addr>. Inboxes are append-only per-agent
// logs, and every put lands in an index.jsonl descriptor ledger, so a run is
// inspectable after the fact.
//
// Size discipline: descriptor text, address, agent ids and content kind are
// all length-limited in their JSON-escaped form, which makes the serialized
// size of any Message bounded by a constant independent of artifact payloads.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/tokens.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace ziggurat {

struct WorkspaceConfig {
    std::size_t descriptor_limit = 512;  // max escaped descriptor text length
    std::size_t address_limit = 256;     // max address length
    std::size_t agent_id_limit = 64;     // max agent id length (graph enforces too)
    std::size_t kind_limit = 32;         // max content_kind length
};

// JSON key scaffolding plus up to 20 digits of size_bytes.
inline constexpr std::size_t kMessageEnvelope = 96;

inline std::size_t max_message_wire_size(const WorkspaceConfig& cfg) {
    return cfg.address_limit + cfg.descriptor_limit + 2 * cfg.agent_id_limit + cfg.kind_limit +
           kMessageEnvelope;
}

struct Address {
    std::string value;  // workspace-relative path, normalized

    Address() = default;
    explicit Address(std::string v) : value(std::move(v)) {}

    bool operator==(const Address&) const = default;
    auto operator<=>(const Address&) const = default;
};

struct Descriptor {
    std::string text;
    std::string content_kind = "text";
    std::uint64_t size_bytes = 0;

    bool operator==(const Descriptor&) const = default;
};

struct Message {
    AgentId from;
    AgentId to;
    Address addr;
    Descriptor desc;

    bool operator==(const Message&) const = default;
};

struct DeliveryReceipt {
    std::string message_id;
    std::size_t inbox_size = 0;
};

inline nlohmann::json message_to_json(const Message& msg) {
    return nlohmann::json{
        {"addr", msg.addr.value},
        {"desc",
         {{"kind", msg.desc.content_kind},
          {"size_bytes", msg.desc.size_bytes},
          {"text", msg.desc.text}}},
        {"from", msg.from},
        {"to", msg.to},
    };
}

inline Message message_from_json(const nlohmann::json& j) {
    Message msg;
    msg.addr = Address(j.at("addr").get<std::string>());
    msg.desc.content_kind = j.at("desc").value("kind", "text");
    msg.desc.size_bytes = j.at("desc").value("size_bytes", std::uint64_t{0});
    msg.desc.text = j.at("desc").value("text", "");
    msg.from = j.value("from", "");
    msg.to = j.value("to", "");
    return msg;
}

// Compact single-line wire form; this is what the size bound is stated over.
inline std::string serialize_message(const Message& msg) { return message_to_json(msg).dump(); }

namespace detail {

// Length of a string as it appears inside a JSON document (escapes included).
inline std::size_t json_escaped_length(std::string_view text) {
    const std::string dumped = nlohmann::json(std::string(text)).dump();
    return dumped.size() - 2;  // strip surrounding quotes
}

inline bool plain_kind(std::string_view kind) {
    for (char c : kind) {
        const auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '_' && c != '-' && c != '/') return false;
    }
    return true;
}

// Normalizes a workspace-relative address: forward slashes, safe segment
// charset, no absolute paths, no "." or ".." segments.
inline std::string normalize_address(std::string_view raw, const WorkspaceConfig& cfg) {
    if (raw.empty()) fail(Errc::address_escape, "empty address");
    if (raw.size() > cfg.address_limit) {
        fail(Errc::address_escape, "address exceeds limit of " +
                                       std::to_string(cfg.address_limit) + " chars");
    }
    if (raw.front() == '/' || raw.find('\\') != std::string_view::npos) {
        fail(Errc::address_escape, std::string(raw));
    }
    std::vector<std::string> segments;
    std::string current;
    auto flush = [&] {
        if (current.empty()) fail(Errc::address_escape, "empty path segment in " + std::string(raw));
        if (current == "." || current == "..") {
            fail(Errc::address_escape, std::string(raw));
        }
        segments.push_back(current);
        current.clear();
    };
    for (char c : raw) {
        if (c == '/') {
            flush();
            continue;
        }
        const auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '_' && c != '-' && c != '.') {
            fail(Errc::address_escape, "illegal character in address: " + std::string(raw));
        }
        current.push_back(c);
    }
    flush();
    std::string out;
    for (const auto& s : segments) {
        if (!out.empty()) out += '/';
        out += s;
    }
    return out;
}

} // namespace detail

class Workspace {
public:
    explicit Workspace(std::filesystem::path root, WorkspaceConfig cfg = {})
        : root_(std::move(root)), cfg_(cfg) {
        std::error_code ec;
        std::filesystem::create_directories(root_ / "artifacts", ec);
        std::filesystem::create_directories(root_ / "inbox", ec);
        if (ec) fail(Errc::storage_failure, "cannot create workspace at " + root_.string());
    }

    // Reopens a persisted workspace: replays index.jsonl and inbox logs.
    static Workspace open(std::filesystem::path root, WorkspaceConfig cfg = {}) {
        Workspace ws(root, cfg);
        std::ifstream index(ws.root_ / "index.jsonl", std::ios::binary);
        std::string line;
        while (std::getline(index, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;
            Address addr(j.at("addr").get<std::string>());
            Descriptor desc{j.value("text", ""), j.value("kind", "text"),
                            j.value("size", std::uint64_t{0})};
            ws.record_index_entry(addr, desc);
        }
        const auto inbox_dir = ws.root_ / "inbox";
        if (std::filesystem::exists(inbox_dir)) {
            for (const auto& entry : std::filesystem::directory_iterator(inbox_dir)) {
                std::ifstream log(entry.path(), std::ios::binary);
                while (std::getline(log, line)) {
                    if (line.empty()) continue;
                    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
                    if (j.is_discarded()) continue;
                    Message msg = message_from_json(j);
                    ws.registered_.insert(msg.to);
                    ws.inboxes_[msg.to].push_back(std::move(msg));
                }
            }
        }
        return ws;
    }

    const std::filesystem::path& root() const { return root_; }
    const WorkspaceConfig& config() const { return cfg_; }

    void register_agent(const AgentId& id) {
        if (id.empty() || id.size() > cfg_.agent_id_limit) {
            fail(Errc::unknown_recipient, "invalid agent id: '" + id + "'");
        }
        std::scoped_lock lock(*mutex_);
        registered_.insert(id);
    }

    bool is_registered(const AgentId& id) const {
        std::scoped_lock lock(*mutex_);
        return registered_.count(id) != 0;
    }

    // Stores a payload and returns the (addr, desc) message template for it.
    // The descriptor's size_bytes is always set from the payload; an empty
    // descriptor text is auto-drafted from the address.
    Message put(const Address& addr, std::string_view payload, Descriptor desc) {
        const std::string norm = detail::normalize_address(addr.value, cfg_);
        if (desc.text.empty()) {
            desc.text = "artifact " + norm + " (" + std::to_string(payload.size()) + " bytes)";
        }
        if (detail::json_escaped_length(desc.text) > cfg_.descriptor_limit) {
            fail(Errc::descriptor_too_long,
                 "descriptor is " + std::to_string(detail::json_escaped_length(desc.text)) +
                     " chars, limit " + std::to_string(cfg_.descriptor_limit));
        }
        if (desc.content_kind.size() > cfg_.kind_limit || !detail::plain_kind(desc.content_kind)) {
            fail(Errc::descriptor_too_long, "invalid content kind: " + desc.content_kind);
        }
        desc.size_bytes = payload.size();

        std::scoped_lock lock(*mutex_);
        const auto path = root_ / "artifacts" / norm;
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) fail(Errc::storage_failure, "cannot create " + path.parent_path().string());
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) fail(Errc::storage_failure, "cannot write " + path.string());
            out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
            if (!out) fail(Errc::storage_failure, "short write to " + path.string());
        }
        const Address final_addr(norm);
        record_index_entry(final_addr, desc);
        ++thread_mutations_;
        append_line(root_ / "index.jsonl", nlohmann::json{{"addr", norm},
                                                          {"kind", desc.content_kind},
                                                          {"size", desc.size_bytes},
                                                          {"text", desc.text}}
                                               .dump());
        ++mutations_;
        return Message{"", "", final_addr, desc};
    }

    // Bitwise-exact payload retrieval.
    std::string get(const Address& addr) const {
        const std::string norm = detail::normalize_address(addr.value, cfg_);
        {
            std::scoped_lock lock(*mutex_);
            if (!latest_.count(norm)) fail(Errc::not_found, norm);
        }
        std::ifstream in(root_ / "artifacts" / norm, std::ios::binary);
        if (!in) fail(Errc::storage_failure, "cannot read " + norm);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    bool exists(const Address& addr) const {
        std::string norm;
        try {
            norm = detail::normalize_address(addr.value, cfg_);
        } catch (const Error&) {
            return false;
        }
        std::scoped_lock lock(*mutex_);
        return latest_.count(norm) != 0;
    }

    // Appends the message to the recipient's inbox. The payload never moves.
    DeliveryReceipt send(const Message& msg) {
        if (!exists(msg.addr)) fail(Errc::dangling_address, msg.addr.value);
        std::scoped_lock lock(*mutex_);
        if (!registered_.count(msg.to)) fail(Errc::unknown_recipient, msg.to);
        auto& box = inboxes_[msg.to];
        box.push_back(msg);
        append_line(root_ / "inbox" / (sanitize_filename(msg.to) + ".log"),
                    serialize_message(msg));
        ++mutations_;
        ++thread_mutations_;
        return DeliveryReceipt{msg.to + "#" + std::to_string(box.size()), box.size()};
    }

    std::vector<Message> inbox(const AgentId& id) const {
        std::scoped_lock lock(*mutex_);
        auto it = inboxes_.find(id);
        return it == inboxes_.end() ? std::vector<Message>{} : it->second;
    }

    std::optional<Descriptor> descriptor_for(const Address& addr) const {
        std::string norm;
        try {
            norm = detail::normalize_address(addr.value, cfg_);
        } catch (const Error&) {
            return std::nullopt;
        }
        std::scoped_lock lock(*mutex_);
        auto it = latest_.find(norm);
        return it == latest_.end() ? std::nullopt : std::optional<Descriptor>(it->second);
    }

    // Latest descriptor per address, in first-put order. This is the file
    // index the context controller compresses into C_LM.
    std::vector<std::pair<Address, Descriptor>> descriptors() const {
        std::scoped_lock lock(*mutex_);
        std::vector<std::pair<Address, Descriptor>> out;
        out.reserve(put_order_.size());
        for (const auto& addr : put_order_) {
            out.emplace_back(Address(addr), latest_.at(addr));
        }
        return out;
    }

    // Full descriptor ledger including overwritten versions (audit trail).
    std::vector<std::pair<Address, Descriptor>> index_entries() const {
        std::scoped_lock lock(*mutex_);
        return trail_;
    }

    // Counts artifact puts and message sends across all threads.
    std::uint64_t mutation_count() const {
        std::scoped_lock lock(*mutex_);
        return mutations_;
    }

    // Mutations performed by the calling thread (any workspace). The judge
    // harness compares this around a judgment: sibling tasks writing from
    // other threads must not trip the verify-only guard.
    static std::uint64_t thread_mutation_count() { return thread_mutations_; }

    // Hash of the on-disk descriptor ledger.
    std::uint64_t ledger_hash() const {
        std::ifstream in(root_ / "index.jsonl", std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return detail::fnv1a(buf.str());
    }

private:
    void record_index_entry(const Address& addr, const Descriptor& desc) {
        if (!latest_.count(addr.value)) put_order_.push_back(addr.value);
        latest_[addr.value] = desc;
        trail_.emplace_back(addr, desc);
    }

    static std::string sanitize_filename(const AgentId& id) {
        std::string out;
        for (char c : id) {
            const auto u = static_cast<unsigned char>(c);
            out.push_back(std::isalnum(u) || c == '-' || c == '_' || c == '.' ? c : '_');
        }
        return out;
    }

    void append_line(const std::filesystem::path& path, const std::string& line) {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        if (!out) fail(Errc::storage_failure, "cannot append to " + path.string());
        out << line << "\n";
    }

    std::filesystem::path root_;
    WorkspaceConfig cfg_;
    // heap-held so Workspace stays movable
    mutable std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
    std::map<std::string, Descriptor> latest_;
    std::vector<std::string> put_order_;
    std::vector<std::pair<Address, Descriptor>> trail_;
    std::map<AgentId, std::vector<Message>> inboxes_;
    std::set<AgentId> registered_;
    std::uint64_t mutations_ = 0;
    inline static thread_local std::uint64_t thread_mutations_ = 0;
};

} // namespace ziggurat
