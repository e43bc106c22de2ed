#pragma once
// Chat-completion HTTP backend. Builds messages as [system: C_sys, user:
// rendered context + request], parses the strict contract out of the reply,
// and re-asks exactly once with the parse error appended before giving up.
// The credential is read from an environment variable and never logged.

#include "ziggurat/agent_output.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/executor.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <string>

namespace ziggurat {

struct HttpExecutorConfig {
    std::string base_url = "http://localhost:8080";
    std::string path = "/v1/chat/completions";
    std::string model = "default";
    std::string api_key_env = "ZIGGURAT_API_KEY";
    int concurrency_limit = 4;
    double temperature = 0.0;
};

class HttpExecutor : public Executor {
public:
    explicit HttpExecutor(HttpExecutorConfig cfg) : cfg_(std::move(cfg)) {}

    std::string name() const override { return "http"; }
    int concurrency_limit() const override { return cfg_.concurrency_limit; }
    bool semantic_review() const override { return true; }
    bool deterministic() const override { return false; }
    std::uint64_t tokens_consumed() const override { return tokens_.load(); }

    std::string invoke_raw(const std::string& role_prompt, const ExecutionContext& ctx,
                           const std::string& request) override {
        return complete(role_prompt, render_prompt(ctx, request, /*include_sys=*/false));
    }

    AgentOutput invoke(const std::string& role_prompt, const ExecutionContext& ctx,
                       const std::string& request) override {
        std::string reply = invoke_raw(role_prompt, ctx, request);
        std::string parse_error;
        if (auto out = try_parse(reply, parse_error)) return *out;
        // One re-ask with the parse error appended, then give up.
        const std::string re_request =
            request + "\nprevious reply violated the output contract (" + parse_error +
            "); return only the JSON object";
        reply = complete(role_prompt, render_prompt(ctx, re_request, /*include_sys=*/false));
        if (auto out = try_parse(reply, parse_error)) return *out;
        fail(Errc::contract_violation, "after re-ask: " + parse_error);
    }

private:
    static std::optional<AgentOutput> try_parse(const std::string& reply,
                                                std::string& parse_error) {
        // Tolerate prose around the object: take the first balanced one.
        const auto object = extract_first_json_object(reply);
        if (!object) {
            parse_error = "no JSON object in reply";
            return std::nullopt;
        }
        try {
            return AgentOutput::from_json_text(*object);
        } catch (const Error& e) {
            parse_error = e.what();
            return std::nullopt;
        }
    }

    std::string complete(const std::string& system_prompt, const std::string& user_prompt) {
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            fail(Errc::auth_missing, "environment variable " + cfg_.api_key_env + " is not set");
        }
        const nlohmann::json payload{
            {"model", cfg_.model},
            {"temperature", cfg_.temperature},
            {"messages",
             {{{"role", "system"}, {"content", system_prompt}},
              {{"role", "user"}, {"content", user_prompt}}}},
        };
        httplib::Client client(cfg_.base_url);
        client.set_read_timeout(300, 0);
        httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
        auto res = client.Post(cfg_.path, headers, payload.dump(), "application/json");
        if (!res) {
            fail(Errc::transport_error, "POST " + cfg_.base_url + cfg_.path + " failed: " +
                                            httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
            fail(Errc::transport_error,
                 "HTTP " + std::to_string(res->status) + " from " + cfg_.path);
        }
        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded()) fail(Errc::transport_error, "response body is not JSON");
        if (j.contains("usage") && j.at("usage").contains("total_tokens")) {
            tokens_ += j.at("usage").at("total_tokens").get<std::uint64_t>();
        }
        try {
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            fail(Errc::transport_error, "response lacks choices[0].message.content");
        }
    }

    HttpExecutorConfig cfg_;
    std::atomic<std::uint64_t> tokens_{0};
};

} // namespace ziggurat
