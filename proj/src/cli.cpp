#include "cami/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cami/evaluation.hpp"
#include "cami/text.hpp"
#include "cami/tree_expand.hpp"

namespace cami {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::string> transcript_files(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::exists(dir)) return files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() != ".json") continue;
        if (name == "batch_summary.json" || name == "manifest.json") continue;
        if (name.find("report") != std::string::npos) continue;
        files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

bool fully_annotated(const SessionTranscript& t) {
    for (const auto& u : t.utterances) {
        if (u.speaker == Speaker::Counselor && !u.annotations.behavior_code) return false;
    }
    return true;
}

}  // namespace

AppConfig resolve_config(const CommonOptions& common, const std::string& preset) {
    AppConfig cfg;
    if (!common.config_path.empty()) cfg = AppConfig::load_file(common.config_path);
    if (!preset.empty()) {
        SamplingConfig sampling = cfg.counselor.sampling;
        cfg.counselor = CounselorConfig::preset(preset);
        cfg.counselor.sampling = sampling;
    }
    if (!common.backend_type.empty()) cfg.backend.type = common.backend_type;
    if (!common.script_path.empty()) cfg.backend.script_path = common.script_path;
    if (!common.data_dir.empty()) cfg.data_dir = common.data_dir;
    if (cfg.data_dir.empty()) cfg.data_dir = default_data_dir();

    if (cfg.backend.type != "http" && cfg.backend.type != "scripted") {
        throw ConfigError("backend.type must be http or scripted");
    }
    if (cfg.backend.type == "scripted" && cfg.backend.script_path.empty()) {
        throw ConfigError("scripted backend requires a script path");
    }
    if (cfg.backend.type == "http" && cfg.backend.http.base_url.empty()) {
        // The default points at the conventional local proxy port so scripted
        // demos do not need a config file; real runs set backend.base_url.
        cfg.backend.http.base_url = "http://127.0.0.1:8000/v1";
    }
    return cfg;
}

std::vector<ClientProfile> load_profiles(const std::string& path) {
    std::vector<ClientProfile> profiles;
    if (fs::is_directory(path)) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path().string());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) profiles.push_back(load_profile_file(f));
    } else if (fs::is_regular_file(path)) {
        profiles.push_back(load_profile_file(path));
    } else {
        throw std::runtime_error("profiles path not found: " + path);
    }
    return profiles;
}

void validate_profiles(const std::vector<ClientProfile>& profiles, const TopicTree& tree) {
    for (const auto& p : profiles) {
        const auto& path = p.motivation_topic_path;
        if (path.size() != 3) {
            throw ConfigError("profile " + p.id + ": motivation_topic_path must have 3 ids");
        }
        for (const auto& id : path) {
            if (!tree.contains(id)) {
                throw ConfigError("profile " + p.id + ": unknown topic " + id);
            }
        }
        const auto& fine = tree.node(path[2]);
        if (fine.level != TopicLevel::Fine || !fine.parent || *fine.parent != path[1]) {
            throw ConfigError("profile " + p.id + ": path does not end at a fine topic "
                              "under " + path[1]);
        }
        const auto& coarse = tree.node(path[1]);
        if (!coarse.parent || *coarse.parent != path[0]) {
            throw ConfigError("profile " + p.id + ": " + path[1] + " is not under " +
                              path[0]);
        }
    }
}

std::shared_ptr<Backend> make_backend(const BackendSettings& settings) {
    if (settings.type == "scripted") {
        return std::make_shared<ScriptedBackend>(
            ScriptedBackend::from_file(settings.script_path));
    }
    return std::make_shared<HttpBackend>(settings.http);
}

BackendFactory make_backend_factory(const BackendSettings& settings) {
    if (settings.type == "scripted") {
        const std::string path = settings.script_path;
        return [path](std::size_t) {
            return std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(path));
        };
    }
    auto shared = std::make_shared<HttpBackend>(settings.http);
    return [shared](std::size_t) { return shared; };
}

void write_manifest(const std::string& dir, const std::string& command,
                    const std::string& config_path, const AppConfig& cfg) {
    fs::create_directories(dir);
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["resolved_config"] = nlohmann::ordered_json::parse(cfg.resolved_json());
    j["version"] = kVersion;
    j["timestamp"] = utc_timestamp();
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir);
    out << j.dump(2) << "\n";
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
    AppConfig cfg;
    std::vector<ClientProfile> profiles;
    TopicTree tree;
    Catalogs catalogs;
    try {
        cfg = resolve_config(opts.common, opts.preset);
        if (opts.profiles_path.empty()) {
            err << "error: --profiles is required\n"
                << "usage: cami simulate --profiles <dir|file> --out <dir> [--preset name]"
                   " [--backend http|scripted] [--script file] [--seed n]"
                   " [--sessions-per-profile k] [--workers w]\n";
            return kExitConfigError;
        }
        if (opts.out_dir.empty()) {
            err << "error: --out is required\n";
            return kExitConfigError;
        }
        if (opts.sessions_per_profile) {
            cfg.runner.sessions_per_profile = *opts.sessions_per_profile;
        }
        if (opts.workers) cfg.runner.workers = *opts.workers;
        if (cfg.runner.sessions_per_profile < 1) {
            throw ConfigError("sessions-per-profile must be >= 1");
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        catalogs = Catalogs::load(cfg.data_dir);
        const std::string tree_path =
            opts.tree_path.empty() ? cfg.data_dir + "/topic_tree.json" : opts.tree_path;
        tree = TopicTree::load_file(tree_path);
        profiles = load_profiles(opts.profiles_path);
    } catch (const std::exception& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitIoError;
    }
    try {
        if (profiles.empty()) throw ConfigError("no profiles found");
        validate_profiles(profiles, tree);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    SessionSetup setup;
    setup.catalogs = &catalogs;
    setup.tree = &tree;
    setup.counselor = cfg.counselor;
    setup.client = cfg.client;
    setup.moderator = cfg.moderator;

    BatchSpec spec;
    spec.profiles = profiles;
    spec.sessions_per_profile = cfg.runner.sessions_per_profile;
    spec.seed_base = opts.seed;
    spec.output_dir = opts.out_dir;
    spec.workers = cfg.runner.workers;

    try {
        auto factory = make_backend_factory(cfg.backend);
        BatchResult result = run_batch(factory, setup, spec);
        write_manifest(opts.out_dir, "simulate", opts.common.config_path, cfg);
        out << "sessions: " << result.completed + result.aborted
            << " completed: " << result.completed << " aborted: " << result.aborted << "\n";
        if (result.aborted > 0) {
            err << "warning: " << result.aborted << " session(s) aborted\n";
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitIoError;
    }
}

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err) {
    AppConfig cfg;
    try {
        cfg = resolve_config(opts.common);
        if (opts.proposer != "llm" && opts.proposer != "sidecar") {
            throw ConfigError("--proposer must be llm or sidecar");
        }
        if (opts.proposer == "sidecar" && opts.sidecar_path.empty()) {
            throw ConfigError("--proposer sidecar requires a sidecar file");
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        Catalogs catalogs = Catalogs::load(cfg.data_dir);
        const std::string tree_path =
            opts.tree_path.empty() ? cfg.data_dir + "/topic_tree.json" : opts.tree_path;
        TopicTree tree = TopicTree::load_file(tree_path);
        auto profiles = load_profiles(opts.profiles_path);

        auto files = transcript_files(opts.transcripts_dir);
        if (files.empty()) {
            err << "error: no transcripts in " << opts.transcripts_dir << "\n";
            return kExitIoError;
        }
        std::vector<SessionTranscript> transcripts;
        for (const auto& f : files) transcripts.push_back(load_transcript_file(f));

        std::unique_ptr<CodeProposer> proposer;
        if (opts.proposer == "sidecar") {
            proposer = std::make_unique<SidecarCodeProposer>(
                SidecarCodeProposer::from_file(opts.sidecar_path));
        } else {
            proposer = std::make_unique<LlmCodeProposer>(catalogs);
        }
        auto backend = make_backend(cfg.backend);

        std::map<std::string, const ClientProfile*> by_id;
        for (const auto& p : profiles) by_id[p.id] = &p;

        std::vector<SessionMetrics> metrics;
        std::string method = "unknown";
        for (auto& t : transcripts) {
            if (!t.counselor_config_id.empty()) method = t.counselor_config_id;
            if (!fully_annotated(t)) {
                t = annotate_behavior(*backend, *proposer, catalogs, std::move(t));
            }
            SessionMetrics m;
            m.profile_id = t.profile_id;
            m.ratios = miti_ratios(behavior_counts(t));
            m.globals = global_scores(*backend, catalogs, t);
            auto profile_it = by_id.find(t.profile_id);
            if (profile_it == by_id.end()) {
                throw std::runtime_error("transcript " + t.session_id +
                                         " references unknown profile " + t.profile_id);
            }
            m.foc = exploration_focus(*backend, catalogs, tree, t, *profile_it->second);
            metrics.push_back(std::move(m));
        }

        EvaluationReport report = build_report(method, profiles, transcripts, metrics, tree);
        fs::path out_path(opts.out_path);
        if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
        {
            std::ofstream file(out_path);
            if (!file) throw std::runtime_error("cannot write " + opts.out_path);
            file << report.to_json();
        }
        fs::path tables_path = out_path;
        tables_path.replace_extension(".tables.txt");
        {
            std::ofstream file(tables_path);
            file << report.render_tables();
        }
        write_manifest(out_path.has_parent_path() ? out_path.parent_path().string() : ".",
                       "evaluate", opts.common.config_path, cfg);
        out << report.render_tables();
        return kExitOk;
    } catch (const AnnotationAlignmentError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIoError;
    }
}

int cmd_tree_validate(const TreeOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        TopicTree tree = TopicTree::load_file(opts.tree_path);
        out << "valid: " << tree.count(TopicLevel::Superclass) << " superclass, "
            << tree.count(TopicLevel::Coarse) << " coarse, " << tree.count(TopicLevel::Fine)
            << " fine topics\n";
        return kExitOk;
    } catch (const TreeStructureError& e) {
        for (const auto& v : e.violations) err << "violation: " << v << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIoError;
    }
}

int cmd_tree_expand(const TreeOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        AppConfig cfg = resolve_config(opts.common);
        Catalogs catalogs = Catalogs::load(cfg.data_dir);
        TopicTree tree = TopicTree::load_file(opts.tree_path);
        if (opts.parent.empty()) {
            err << "error: --parent is required\n";
            return kExitConfigError;
        }
        auto backend = make_backend(cfg.backend);
        auto proposals = expand_tree(tree, *backend, catalogs, opts.parent);
        for (const auto& node : proposals) {
            out << to_string(node.level) << ": " << node.id << " (parent " << opts.parent
                << ")\n";
        }
        if (proposals.empty()) out << "no new proposals\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ExpansionParseError& e) {
        err << "error: " << e.what() << "\nraw completion:\n" << e.raw << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIoError;
    }
}

SessionTranscript chat_loop(Backend& backend, const SessionSetup& setup,
                            const ClientProfile& profile, std::uint64_t seed,
                            std::istream& in, std::ostream& out) {
    SessionTranscript t;
    t.session_id = "chat-" + profile.id + "-" + std::to_string(seed);
    t.profile_id = profile.id;
    t.counselor_config_id = setup.counselor.id;
    t.seed = seed;
    t.backend_fingerprint = backend.fingerprint();

    RecordingBackend recorder(backend, t.exchange_log);
    Counselor counselor(*setup.catalogs, *setup.tree, setup.counselor, profile);
    Moderator moderator(*setup.catalogs, setup.moderator);

    t.utterances.push_back({1, Speaker::Counselor, kCounselorOpener, {}});
    t.utterances.push_back({2, Speaker::Client, kClientOpener, {}});
    out << "Counselor: " << kCounselorOpener << "\n";
    out << "Client: " << kClientOpener << "\n";

    CounselorTurnState state;
    while (t.utterances.size() < static_cast<size_t>(kMaxUtterances)) {
        auto [turn, next_state] = counselor.next_turn(recorder, t.utterances, std::move(state));
        state = std::move(next_state);
        t.utterances.push_back(std::move(turn));
        out << "Counselor: " << t.utterances.back().text << "\n";
        if (t.utterances.size() >= static_cast<size_t>(kMaxUtterances)) break;

        out << "Client> " << std::flush;
        std::string line;
        if (!std::getline(in, line)) {
            t.termination = Termination::ExplicitEnd;
            return t;
        }
        line = trim(line);
        if (line == "/quit" || line == "/exit") {
            t.termination = Termination::ExplicitEnd;
            return t;
        }
        if (line.empty()) line = "...";
        Utterance u;
        u.index = static_cast<int>(t.utterances.size()) + 1;
        u.speaker = Speaker::Client;
        u.text = line;
        t.utterances.push_back(std::move(u));

        auto decision = moderator.should_terminate(recorder, t.utterances);
        if (decision.stop) {
            t.termination = decision.reason == StopReason::ClientMotivated
                                ? Termination::ClientMotivated
                                : Termination::ExplicitEnd;
            return t;
        }
    }
    t.termination = Termination::MaxTurns;
    return t;
}

int cmd_chat(const ChatOptions& opts, std::istream& in, std::ostream& out, std::ostream& err) {
    AppConfig cfg;
    try {
        cfg = resolve_config(opts.common, opts.preset);
        if (cfg.backend.type != "http") {
            throw ConfigError("chat requires an HTTP backend");
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        Catalogs catalogs = Catalogs::load(cfg.data_dir);
        TopicTree tree = TopicTree::load_file(cfg.data_dir + "/topic_tree.json");
        ClientProfile profile = load_profile_file(
            opts.profile_path.empty() ? cfg.data_dir + "/profiles/smoking_parent.json"
                                      : opts.profile_path);

        out << "Notice: you are chatting with an automated counseling research agent, not a"
               " human counselor.\n"
            << "It is a computer program under evaluation; do not rely on it for care."
               " Type /quit to end.\n\n";

        SessionSetup setup;
        setup.catalogs = &catalogs;
        setup.tree = &tree;
        setup.counselor = cfg.counselor;
        setup.client = cfg.client;
        setup.moderator = cfg.moderator;

        auto backend = make_backend(cfg.backend);
        SessionTranscript t = chat_loop(*backend, setup, profile, opts.seed, in, out);

        std::string dir = opts.out_dir.empty() ? "." : opts.out_dir;
        fs::create_directories(dir);
        fs::path path = fs::path(dir) / (t.session_id + ".json");
        std::ofstream file(path);
        if (!file) throw std::runtime_error("cannot write transcript: " + path.string());
        file << transcript_to_json(t);
        write_manifest(dir, "chat", opts.common.config_path, cfg);
        out << "\nsession saved to " << path.string() << " ("
            << (t.termination ? to_string(*t.termination) : std::string("aborted")) << ")\n";
        return kExitOk;
    } catch (const TransportError& e) {
        err << "transport error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIoError;
    }
}

}  // namespace cami
