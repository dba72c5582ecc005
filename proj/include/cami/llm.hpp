#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cami/core.hpp"

namespace cami {

enum class Role { System, User, Assistant };

std::string to_string(Role r);
Role role_from_string(const std::string& s);

struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

struct SamplingConfig {
    double temperature = 0.8;
    double top_p = 0.7;
    std::optional<int> max_tokens;  // unset -> provider default
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    SamplingConfig sampling;
    std::string tag;  // which pipeline step issued it

    /// Convenience for single-prompt steps.
    static ChatRequest single(std::string tag, std::string prompt,
                              SamplingConfig sampling = {});
};

struct ChatResponse {
    std::string text;
    std::optional<std::string> raw_id;
    std::optional<std::int64_t> latency_ms;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScriptExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyCompletion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Uniform chat-completion interface. Implementations must tolerate concurrent
/// calls from independent sessions unless documented otherwise.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
    virtual std::string fingerprint() const = 0;
};

struct HttpBackendConfig {
    std::string base_url;  // e.g. "https://api.openai.com/v1"
    std::string model;
    std::string api_key_env = "CAMI_API_KEY";
    int retries = 3;
    int retry_backoff_ms = 1000;  // doubles per attempt
};

/// OpenAI-compatible /chat/completions client. Thread-safe; each call opens its
/// own connection.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ChatResponse complete(const ChatRequest& req) override;
    std::string fingerprint() const override;

private:
    HttpBackendConfig config_;
    std::string api_key_;
};

enum class ScriptMatch { ByTag, ByExactPrompt, Next };

struct ScriptEntry {
    ScriptMatch match = ScriptMatch::Next;
    std::string key;      // tag or exact final-message content
    std::string response;
};

/// Deterministic backend replaying scripted entries. Single consumer per
/// session; exhaustion raises ScriptExhausted instead of wrapping around.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptEntry> entries, std::string name = "inline");

    /// Accepts both the script format ({"entries": [...]}) and a recorded
    /// exchange log (array of {tag, request_messages, response_text}).
    static ScriptedBackend from_json(const std::string& text, std::string name = "inline");
    static ScriptedBackend from_file(const std::string& path);
    static ScriptedBackend from_exchange_log(const std::vector<Exchange>& log,
                                             std::string name = "replay");

    ChatResponse complete(const ChatRequest& req) override;
    std::string fingerprint() const override;

    size_t remaining() const;
    std::vector<ScriptEntry> entries_copy() const { return entries_; }

private:
    std::vector<ScriptEntry> entries_;
    std::vector<bool> consumed_;
    std::string name_;
};

/// Session-scoped wrapper appending every exchange to the session's log.
class RecordingBackend : public Backend {
public:
    RecordingBackend(Backend& inner, std::vector<Exchange>& log)
        : inner_(inner), log_(log) {}

    ChatResponse complete(const ChatRequest& req) override;
    std::string fingerprint() const override { return inner_.fingerprint(); }

private:
    Backend& inner_;
    std::vector<Exchange>& log_;
};

struct UnknownTemplate : std::runtime_error {
    explicit UnknownTemplate(const std::string& id)
        : std::runtime_error("unknown prompt template: " + id) {}
};

struct MissingBinding : std::runtime_error {
    explicit MissingBinding(std::string placeholder)
        : std::runtime_error("missing binding: " + placeholder), name(std::move(placeholder)) {}
    std::string name;
};

/// Prompt catalog loaded from a data file; templates are keyed by id and carry
/// their declared placeholder set.
class PromptCatalog {
public:
    static PromptCatalog load(const std::string& json_text);
    static PromptCatalog load_file(const std::string& path);

    /// Replaces every declared [placeholder]; all of them must be bound.
    std::string render(const std::string& template_id,
                       const std::map<std::string, std::string>& bindings) const;

    bool contains(const std::string& template_id) const;
    std::vector<std::string> template_ids() const;
    const std::vector<std::string>& placeholders(const std::string& template_id) const;

private:
    struct Template {
        std::string text;
        std::vector<std::string> placeholders;
    };
    std::map<std::string, Template> templates_;
};

}  // namespace cami
