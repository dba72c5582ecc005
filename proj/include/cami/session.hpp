#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cami/catalogs.hpp"
#include "cami/client_sim.hpp"
#include "cami/core.hpp"
#include "cami/counselor.hpp"
#include "cami/llm.hpp"
#include "cami/moderator.hpp"
#include "cami/topic_tree.hpp"

namespace cami {

struct SessionSetup {
    const Catalogs* catalogs = nullptr;
    const TopicTree* tree = nullptr;
    CounselorConfig counselor;
    ClientConfig client;
    ModeratorConfig moderator;
};

/// Runs one full counselor/client/moderator session. Transport failures abort
/// the session and return a partial transcript flagged `aborted`.
SessionTranscript run_session(Backend& backend, const SessionSetup& setup,
                              const ClientProfile& profile, std::uint64_t seed,
                              const std::string& session_id = "",
                              Diagnostics* diag = nullptr);

/// Supplies the backend for a session. Scripted backends are single-consumer,
/// so batches get a fresh instance per session; a shared HTTP backend can be
/// returned every time.
using BackendFactory = std::function<std::shared_ptr<Backend>(std::size_t session_index)>;

struct BatchSpec {
    std::vector<ClientProfile> profiles;
    int sessions_per_profile = 5;
    std::uint64_t seed_base = 0;
    std::string output_dir;
    int workers = 4;
};

struct BatchResult {
    std::vector<std::string> transcript_paths;
    int completed = 0;
    int aborted = 0;
    std::vector<std::pair<std::string, std::pair<int, int>>> per_profile;  // id -> (done, aborted)

    std::string summary_json() const;
};

/// Runs |profiles| x sessions_per_profile sessions with seeds seed_base + i,
/// up to `workers` concurrently. Individual aborts do not fail the batch.
BatchResult run_batch(const BackendFactory& factory, const SessionSetup& setup,
                      const BatchSpec& spec);

}  // namespace cami
