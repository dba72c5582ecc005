#include "cami/session.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace cami {

namespace fs = std::filesystem;

SessionTranscript run_session(Backend& backend, const SessionSetup& setup,
                              const ClientProfile& profile, std::uint64_t seed,
                              const std::string& session_id, Diagnostics* diag) {
    SessionTranscript t;
    t.session_id = session_id.empty() ? profile.id + "-" + std::to_string(seed) : session_id;
    t.profile_id = profile.id;
    t.counselor_config_id = setup.counselor.id;
    t.seed = seed;
    t.backend_fingerprint = backend.fingerprint();

    RecordingBackend recorder(backend, t.exchange_log);
    Counselor counselor(*setup.catalogs, *setup.tree, setup.counselor, profile, diag);
    ClientSimulator client(*setup.catalogs, *setup.tree, setup.client, profile, diag);
    Moderator moderator(*setup.catalogs, setup.moderator, diag);
    SessionRng rng(seed);

    t.utterances.push_back({1, Speaker::Counselor, kCounselorOpener, {}});
    t.utterances.push_back({2, Speaker::Client, kClientOpener, {}});

    CounselorTurnState counselor_state;
    ClientTurnState client_state;
    client_state.state = profile.initial_state;
    client_state.rng_seed = seed;

    try {
        while (t.utterances.size() < static_cast<size_t>(kMaxUtterances)) {
            auto [counselor_turn, next_counselor_state] =
                counselor.next_turn(recorder, t.utterances, std::move(counselor_state));
            counselor_state = std::move(next_counselor_state);
            t.utterances.push_back(std::move(counselor_turn));

            auto [client_turn, next_client_state] =
                client.next_turn(recorder, t.utterances, client_state, rng);
            client_state = next_client_state;
            t.utterances.push_back(std::move(client_turn));

            auto decision = moderator.should_terminate(recorder, t.utterances);
            if (decision.stop) {
                t.termination = decision.reason == StopReason::ClientMotivated
                                    ? Termination::ClientMotivated
                                    : Termination::ExplicitEnd;
                break;
            }
            if (t.utterances.size() >= static_cast<size_t>(kMaxUtterances)) {
                t.termination = Termination::MaxTurns;
                break;
            }
        }
        if (!t.termination && !t.aborted) t.termination = Termination::MaxTurns;
    } catch (const TransportError& e) {
        t.aborted = true;
        if (diag) diag->note(std::string("session aborted: ") + e.what());
    } catch (const ScriptExhausted& e) {
        t.aborted = true;
        if (diag) diag->note(std::string("session aborted: ") + e.what());
    } catch (const EmptyCompletion& e) {
        t.aborted = true;
        if (diag) diag->note(std::string("session aborted: ") + e.what());
    }
    return t;
}

std::string BatchResult::summary_json() const {
    nlohmann::ordered_json j;
    j["sessions_total"] = completed + aborted;
    j["completed"] = completed;
    j["aborted"] = aborted;
    j["per_profile"] = nlohmann::ordered_json::object();
    for (const auto& [id, counts] : per_profile) {
        j["per_profile"][id] = {{"completed", counts.first}, {"aborted", counts.second}};
    }
    j["transcripts"] = transcript_paths;
    return j.dump(2) + "\n";
}

BatchResult run_batch(const BackendFactory& factory, const SessionSetup& setup,
                      const BatchSpec& spec) {
    if (spec.sessions_per_profile < 1) {
        throw std::invalid_argument("sessions_per_profile must be >= 1");
    }
    const size_t total = spec.profiles.size() * static_cast<size_t>(spec.sessions_per_profile);
    std::vector<SessionTranscript> transcripts(total);
    std::vector<std::string> paths(total);

    fs::create_directories(spec.output_dir);
    for (const auto& p : spec.profiles) {
        fs::create_directories(fs::path(spec.output_dir) / p.id);
    }

    std::atomic<size_t> cursor{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&]() {
        while (true) {
            size_t i = cursor.fetch_add(1);
            if (i >= total) return;
            try {
                const auto& profile = spec.profiles[i / spec.sessions_per_profile];
                const int k = static_cast<int>(i % spec.sessions_per_profile);
                const std::uint64_t seed = spec.seed_base + i;
                auto backend = factory(i);
                std::string session_id = profile.id + "-" + std::to_string(k + 1);
                transcripts[i] = run_session(*backend, setup, profile, seed, session_id);

                fs::path out = fs::path(spec.output_dir) / profile.id /
                               ("session_" + std::to_string(k + 1) + ".json");
                std::ofstream file(out);
                if (!file) {
                    throw std::runtime_error("cannot write transcript: " + out.string());
                }
                file << transcript_to_json(transcripts[i]);
                paths[i] = out.string();
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const int workers = std::max(1, spec.workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    BatchResult result;
    result.transcript_paths = std::move(paths);
    for (size_t p = 0; p < spec.profiles.size(); ++p) {
        int done = 0;
        int failed = 0;
        for (int k = 0; k < spec.sessions_per_profile; ++k) {
            const auto& t = transcripts[p * spec.sessions_per_profile + k];
            if (t.aborted) ++failed;
            else ++done;
        }
        result.per_profile.emplace_back(spec.profiles[p].id, std::make_pair(done, failed));
        result.completed += done;
        result.aborted += failed;
    }

    std::ofstream summary(fs::path(spec.output_dir) / "batch_summary.json");
    summary << result.summary_json();
    return result;
}

}  // namespace cami
