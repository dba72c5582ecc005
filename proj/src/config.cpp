#include "cami/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cami/catalogs.hpp"

namespace cami {

namespace {
using nlohmann::ordered_json;
}

AppConfig AppConfig::from_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    AppConfig cfg;
    cfg.data_dir = doc.value("data_dir", std::string{});
    try {
        if (doc.contains("backend")) {
            const auto& b = doc["backend"];
            cfg.backend.type = b.value("type", std::string{"http"});
            cfg.backend.http.base_url = b.value("base_url", std::string{});
            cfg.backend.http.model = b.value("model", std::string{});
            cfg.backend.http.api_key_env =
                b.value("api_key_env", std::string{"CAMI_API_KEY"});
            cfg.backend.http.retries = b.value("retries", 3);
            cfg.backend.http.retry_backoff_ms = b.value("retry_backoff_ms", 1000);
            cfg.backend.script_path = b.value("script", std::string{});
            cfg.backend.sampling.temperature = b.value("temperature", 0.8);
            cfg.backend.sampling.top_p = b.value("top_p", 0.7);
            if (b.contains("max_tokens") && !b["max_tokens"].is_null()) {
                cfg.backend.sampling.max_tokens = b["max_tokens"].get<int>();
            }
        }
        if (doc.contains("counselor")) {
            const auto& c = doc["counselor"];
            if (c.contains("preset")) {
                cfg.counselor = CounselorConfig::preset(c["preset"].get<std::string>());
            }
            if (c.contains("use_state_inference")) {
                cfg.counselor.use_state_inference = c["use_state_inference"].get<bool>();
                cfg.counselor.id = "custom";
            }
            if (c.contains("use_topic_exploration")) {
                cfg.counselor.use_topic_exploration = c["use_topic_exploration"].get<bool>();
                cfg.counselor.id = "custom";
            }
            if (c.contains("use_strategies")) {
                cfg.counselor.use_strategies = c["use_strategies"].get<bool>();
                cfg.counselor.id = "custom";
            }
            cfg.counselor.strategy_cap = c.value("strategy_cap", cfg.counselor.strategy_cap);
            cfg.counselor.init_phase_turns =
                c.value("init_phase_turns", cfg.counselor.init_phase_turns);
            cfg.counselor.init_prob_threshold =
                c.value("init_prob_threshold", cfg.counselor.init_prob_threshold);
            cfg.counselor.response_char_hint =
                c.value("response_char_hint", cfg.counselor.response_char_hint);
            if (cfg.counselor.strategy_cap < 1) {
                throw ConfigError("counselor.strategy_cap must be >= 1");
            }
            if (cfg.counselor.init_prob_threshold <= 0.0 ||
                cfg.counselor.init_prob_threshold >= 1.0) {
                throw ConfigError("counselor.init_prob_threshold must be in (0,1)");
            }
        }
        if (doc.contains("client")) {
            const auto& c = doc["client"];
            if (c.contains("receptivity_tilt")) {
                cfg.client.tilt_resistant_scale =
                    c["receptivity_tilt"].value("resistant", cfg.client.tilt_resistant_scale);
                cfg.client.tilt_cooperative_scale = c["receptivity_tilt"].value(
                    "cooperative", cfg.client.tilt_cooperative_scale);
            }
            cfg.client.match_window = c.value("match_window", cfg.client.match_window);
            if (c.contains("reference_session") && !c["reference_session"].is_null()) {
                std::ifstream ref(c["reference_session"].get<std::string>());
                if (!ref) {
                    throw ConfigError("client.reference_session file not readable");
                }
                std::ostringstream buf;
                buf << ref.rdbuf();
                cfg.client.reference_session = buf.str();
            }
        }
        if (doc.contains("moderator")) {
            const auto& m = doc["moderator"];
            cfg.moderator.window = m.value("window", cfg.moderator.window);
            if (m.contains("motivated_keywords")) {
                cfg.moderator.motivated_keywords =
                    m["motivated_keywords"].get<std::vector<std::string>>();
            }
            if (m.contains("explicit_keywords")) {
                cfg.moderator.explicit_keywords =
                    m["explicit_keywords"].get<std::vector<std::string>>();
            }
        }
        if (doc.contains("runner")) {
            const auto& r = doc["runner"];
            cfg.runner.workers = r.value("workers", cfg.runner.workers);
            cfg.runner.sessions_per_profile =
                r.value("sessions_per_profile", cfg.runner.sessions_per_profile);
            if (cfg.runner.sessions_per_profile < 1) {
                throw ConfigError("runner.sessions_per_profile must be >= 1");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    cfg.counselor.sampling = cfg.backend.sampling;
    cfg.client.sampling = cfg.backend.sampling;
    cfg.moderator.sampling = cfg.backend.sampling;
    if (cfg.data_dir.empty()) cfg.data_dir = default_data_dir();
    return cfg;
}

AppConfig AppConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string AppConfig::resolved_json() const {
    ordered_json j;
    j["backend"] = {{"type", backend.type},
                    {"base_url", backend.http.base_url},
                    {"model", backend.http.model},
                    {"api_key_env", backend.http.api_key_env},
                    {"retries", backend.http.retries},
                    {"retry_backoff_ms", backend.http.retry_backoff_ms},
                    {"script", backend.script_path},
                    {"temperature", backend.sampling.temperature},
                    {"top_p", backend.sampling.top_p}};
    if (backend.sampling.max_tokens) j["backend"]["max_tokens"] = *backend.sampling.max_tokens;
    j["counselor"] = {{"id", counselor.id},
                      {"use_state_inference", counselor.use_state_inference},
                      {"use_topic_exploration", counselor.use_topic_exploration},
                      {"use_strategies", counselor.use_strategies},
                      {"strategy_cap", counselor.strategy_cap},
                      {"init_phase_turns", counselor.init_phase_turns},
                      {"init_prob_threshold", counselor.init_prob_threshold},
                      {"response_char_hint", counselor.response_char_hint}};
    j["client"] = {{"receptivity_tilt",
                    {{"resistant", client.tilt_resistant_scale},
                     {"cooperative", client.tilt_cooperative_scale}}},
                   {"match_window", client.match_window},
                   {"reference_session_overridden", client.reference_session.has_value()}};
    j["moderator"] = {{"window", moderator.window},
                      {"motivated_keywords", moderator.motivated_keywords},
                      {"explicit_keywords", moderator.explicit_keywords}};
    j["runner"] = {{"workers", runner.workers},
                   {"sessions_per_profile", runner.sessions_per_profile}};
    j["data_dir"] = data_dir;
    return j.dump(2) + "\n";
}

std::vector<std::string> AppConfig::known_keys() {
    return {
        "backend.type",          "backend.base_url",
        "backend.model",         "backend.api_key_env",
        "backend.retries",       "backend.retry_backoff_ms",
        "backend.script",        "backend.temperature",
        "backend.top_p",         "backend.max_tokens",
        "counselor.preset",      "counselor.use_state_inference",
        "counselor.use_topic_exploration", "counselor.use_strategies",
        "counselor.strategy_cap", "counselor.init_phase_turns",
        "counselor.init_prob_threshold", "counselor.response_char_hint",
        "client.receptivity_tilt.resistant", "client.receptivity_tilt.cooperative",
        "client.match_window",   "client.reference_session",
        "moderator.window",      "moderator.motivated_keywords",
        "moderator.explicit_keywords", "runner.workers",
        "runner.sessions_per_profile", "data_dir",
    };
}

}  // namespace cami
