#include "cami/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include <httplib.h>

namespace cami {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Splits "https://host:port/base/path" into origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = base_url.find('/', host_start);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string origin = base_url.substr(0, path_start);
    std::string path = base_url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {origin, path};
}

}  // namespace

std::string to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    throw std::invalid_argument("unknown role: " + s);
}

ChatRequest ChatRequest::single(std::string tag, std::string prompt, SamplingConfig sampling) {
    ChatRequest req;
    req.tag = std::move(tag);
    req.sampling = sampling;
    req.messages.push_back({Role::User, std::move(prompt)});
    return req;
}

// --- HttpBackend ---

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::string HttpBackend::fingerprint() const {
    return "http:" + config_.base_url + "#" + config_.model;
}

ChatResponse HttpBackend::complete(const ChatRequest& req) {
    auto [origin, path_prefix] = split_base_url(config_.base_url);
    const std::string path = path_prefix + "/chat/completions";

    json body;
    body["model"] = config_.model;
    body["messages"] = json::array();
    for (const auto& m : req.messages) {
        body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    body["temperature"] = req.sampling.temperature;
    body["top_p"] = req.sampling.top_p;
    if (req.sampling.max_tokens) body["max_tokens"] = *req.sampling.max_tokens;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const int attempts = std::max(1, config_.retries);
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            auto backoff = std::chrono::milliseconds(
                static_cast<long long>(config_.retry_backoff_ms) << (attempt - 1));
            std::this_thread::sleep_for(backoff);
        }
        auto start = std::chrono::steady_clock::now();
        httplib::Client client(origin);
        client.set_connection_timeout(30);
        client.set_read_timeout(300);
        auto result = client.Post(path, headers, payload, "application/json");
        if (!result) {
            last_error = "transport failure: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status < 200 || result->status >= 300) {
            last_error = "HTTP " + std::to_string(result->status) + ": " + result->body;
            continue;
        }
        json parsed;
        try {
            parsed = json::parse(result->body);
        } catch (const json::exception& e) {
            last_error = std::string("unparseable completion body: ") + e.what();
            continue;
        }
        ChatResponse resp;
        try {
            resp.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            last_error = std::string("completion body missing content: ") + e.what();
            continue;
        }
        if (parsed.contains("id") && parsed["id"].is_string()) resp.raw_id = parsed["id"];
        resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        if (resp.text.empty()) throw EmptyCompletion("empty completion from " + origin);
        return resp;
    }
    throw TransportError("chat completion failed after " + std::to_string(attempts) +
                         " attempt(s): " + last_error);
}

// --- ScriptedBackend ---

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries, std::string name)
    : entries_(std::move(entries)), consumed_(entries_.size(), false), name_(std::move(name)) {}

ScriptedBackend ScriptedBackend::from_json(const std::string& text, std::string name) {
    json doc = json::parse(text);
    std::vector<ScriptEntry> entries;
    if (doc.is_array()) {
        // exchange-log format: replay responses in order
        for (const auto& item : doc) {
            entries.push_back({ScriptMatch::Next, "", item.at("response_text")});
        }
    } else {
        for (const auto& item : doc.at("entries")) {
            ScriptEntry e;
            std::string match = item.value("match", "next");
            if (match == "tag") e.match = ScriptMatch::ByTag;
            else if (match == "prompt") e.match = ScriptMatch::ByExactPrompt;
            else if (match == "next") e.match = ScriptMatch::Next;
            else throw std::invalid_argument("unknown script matcher: " + match);
            e.key = item.value("key", std::string{});
            e.response = item.at("response").get<std::string>();
            entries.push_back(std::move(e));
        }
    }
    return ScriptedBackend(std::move(entries), std::move(name));
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
    return from_json(slurp(path), path);
}

ScriptedBackend ScriptedBackend::from_exchange_log(const std::vector<Exchange>& log,
                                                   std::string name) {
    std::vector<ScriptEntry> entries;
    for (const auto& e : log) entries.push_back({ScriptMatch::Next, "", e.response_text});
    return ScriptedBackend(std::move(entries), std::move(name));
}

ChatResponse ScriptedBackend::complete(const ChatRequest& req) {
    for (size_t i = 0; i < entries_.size(); ++i) {
        if (consumed_[i]) continue;
        const auto& e = entries_[i];
        bool hit = false;
        switch (e.match) {
            case ScriptMatch::Next: hit = true; break;
            case ScriptMatch::ByTag: hit = (e.key == req.tag); break;
            case ScriptMatch::ByExactPrompt:
                hit = !req.messages.empty() && req.messages.back().content == e.key;
                break;
        }
        if (!hit) continue;
        consumed_[i] = true;
        if (e.response.empty()) throw EmptyCompletion("scripted entry " + std::to_string(i) +
                                                      " has empty response");
        return ChatResponse{e.response, std::nullopt, std::nullopt};
    }
    throw ScriptExhausted("script '" + name_ + "' exhausted at tag '" + req.tag + "'");
}

std::string ScriptedBackend::fingerprint() const {
    return "scripted:" + name_ + ":" + std::to_string(entries_.size());
}

size_t ScriptedBackend::remaining() const {
    size_t n = 0;
    for (bool c : consumed_) {
        if (!c) ++n;
    }
    return n;
}

ChatResponse RecordingBackend::complete(const ChatRequest& req) {
    ChatResponse resp = inner_.complete(req);
    Exchange ex;
    ex.tag = req.tag;
    for (const auto& m : req.messages) {
        ex.request_messages.emplace_back(to_string(m.role), m.content);
    }
    ex.response_text = resp.text;
    log_.push_back(std::move(ex));
    return resp;
}

// --- PromptCatalog ---

PromptCatalog PromptCatalog::load(const std::string& json_text) {
    json doc = json::parse(json_text);
    PromptCatalog catalog;
    for (const auto& [id, body] : doc.at("templates").items()) {
        Template t;
        t.text = body.at("text").get<std::string>();
        for (const auto& p : body.at("placeholders")) t.placeholders.push_back(p);
        catalog.templates_.emplace(id, std::move(t));
    }
    return catalog;
}

PromptCatalog PromptCatalog::load_file(const std::string& path) {
    return load(slurp(path));
}

std::string PromptCatalog::render(const std::string& template_id,
                                  const std::map<std::string, std::string>& bindings) const {
    auto it = templates_.find(template_id);
    if (it == templates_.end()) throw UnknownTemplate(template_id);
    const auto& t = it->second;

    for (const auto& name : t.placeholders) {
        if (!bindings.count(name)) throw MissingBinding(name);
    }

    // Single pass over the template text; substituted values are never rescanned.
    std::string out;
    out.reserve(t.text.size());
    size_t pos = 0;
    while (pos < t.text.size()) {
        size_t open = t.text.find('[', pos);
        if (open == std::string::npos) {
            out.append(t.text, pos, std::string::npos);
            break;
        }
        out.append(t.text, pos, open - pos);
        size_t close = t.text.find(']', open);
        bool replaced = false;
        if (close != std::string::npos) {
            std::string name = t.text.substr(open + 1, close - open - 1);
            auto binding = bindings.find(name);
            if (binding != bindings.end() &&
                std::find(t.placeholders.begin(), t.placeholders.end(), name) !=
                    t.placeholders.end()) {
                out += binding->second;
                pos = close + 1;
                replaced = true;
            }
        }
        if (!replaced) {
            out += '[';
            pos = open + 1;
        }
    }
    return out;
}

bool PromptCatalog::contains(const std::string& template_id) const {
    return templates_.count(template_id) > 0;
}

std::vector<std::string> PromptCatalog::template_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, t] : templates_) out.push_back(id);
    return out;
}

const std::vector<std::string>& PromptCatalog::placeholders(
    const std::string& template_id) const {
    auto it = templates_.find(template_id);
    if (it == templates_.end()) throw UnknownTemplate(template_id);
    return it->second.placeholders;
}

}  // namespace cami
