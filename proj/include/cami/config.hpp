#pragma once

#include <optional>
#include <string>

#include "cami/client_sim.hpp"
#include "cami/counselor.hpp"
#include "cami/llm.hpp"
#include "cami/moderator.hpp"

namespace cami {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendSettings {
    std::string type = "http";  // "http" or "scripted"
    HttpBackendConfig http;
    std::string script_path;  // scripted backends only
    SamplingConfig sampling;
};

struct RunnerSettings {
    int workers = 4;
    int sessions_per_profile = 5;
};

/// Effective application configuration: file values overlaid by CLI flags.
struct AppConfig {
    BackendSettings backend;
    CounselorConfig counselor;
    ClientConfig client;
    ModeratorConfig moderator;
    RunnerSettings runner;
    std::string data_dir;

    static AppConfig from_json(const std::string& text);
    static AppConfig load_file(const std::string& path);

    /// Full resolved configuration, the form recorded in run manifests.
    std::string resolved_json() const;

    /// Config keys accepted in the file; `--help` must surface all of them.
    static std::vector<std::string> known_keys();
};

}  // namespace cami
