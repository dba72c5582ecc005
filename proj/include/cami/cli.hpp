#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cami/config.hpp"
#include "cami/session.hpp"

namespace cami {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIoError = 1;
inline constexpr int kExitConfigError = 2;

struct CommonOptions {
    std::string config_path;
    std::string backend_type;  // overrides config
    std::string script_path;   // overrides config
    std::string data_dir;      // overrides config
    bool verbose = false;
};

struct SimulateOptions {
    CommonOptions common;
    std::string profiles_path;  // file or directory, required
    std::string out_dir;        // required
    std::string preset;         // overrides config counselor section
    std::string tree_path;      // defaults to <data_dir>/topic_tree.json
    std::uint64_t seed = 0;
    std::optional<int> sessions_per_profile;
    std::optional<int> workers;
};

struct EvaluateOptions {
    CommonOptions common;
    std::string transcripts_dir;
    std::string profiles_path;
    std::string tree_path;
    std::string out_path = "report.json";
    std::string proposer = "llm";  // "llm" or "sidecar"
    std::string sidecar_path;
};

struct TreeOptions {
    CommonOptions common;
    std::string tree_path;
    std::string parent;  // expand only
};

struct ChatOptions {
    CommonOptions common;
    std::string profile_path;  // defaults to the shipped demo profile
    std::string out_dir;
    std::string preset = "cami";
    std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_tree_validate(const TreeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_tree_expand(const TreeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_chat(const ChatOptions& opts, std::istream& in, std::ostream& out, std::ostream& err);

/// Loads the config file (when given) and applies command-line overrides.
AppConfig resolve_config(const CommonOptions& common, const std::string& preset = "");

/// Loads one profile file or every *.json profile in a directory, sorted.
std::vector<ClientProfile> load_profiles(const std::string& path);

/// Root-to-leaf check of each profile's motivation topic path.
void validate_profiles(const std::vector<ClientProfile>& profiles, const TopicTree& tree);

/// A backend factory honoring the settings; scripted backends are recreated
/// per session.
BackendFactory make_backend_factory(const BackendSettings& settings);
std::shared_ptr<Backend> make_backend(const BackendSettings& settings);

/// Writes the run manifest (command, config path, resolved config, version,
/// timestamp) into `dir`; exactly one manifest per output directory.
void write_manifest(const std::string& dir, const std::string& command,
                    const std::string& config_path, const AppConfig& cfg);

/// Interactive loop used by cmd_chat, factored for testing: reads client lines
/// from `in`, persists the transcript like a simulated session.
SessionTranscript chat_loop(Backend& backend, const SessionSetup& setup,
                            const ClientProfile& profile, std::uint64_t seed,
                            std::istream& in, std::ostream& out);

}  // namespace cami
