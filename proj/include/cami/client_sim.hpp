#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cami/catalogs.hpp"
#include "cami/core.hpp"
#include "cami/counselor.hpp"
#include "cami/llm.hpp"
#include "cami/topic_tree.hpp"

namespace cami {

/// Deterministic session RNG; draws are identical across platforms for a seed.
class SessionRng {
public:
    explicit SessionRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64();
    double next_double();  // uniform in [0, 1)

private:
    std::uint64_t state_;
};

struct ClientConfig {
    double tilt_resistant_scale = 2.0;    // resistant weight factor = scale - receptivity
    double tilt_cooperative_scale = 1.0;  // cooperative weight factor = scale + receptivity
    int match_window = 3;                 // utterances shown to the motivation judge
    std::optional<std::string> reference_session;  // overrides the shipped exemplar
    SamplingConfig sampling;
};

struct ClientTurnState {
    ChangeState state = ChangeState::Precontemplation;
    std::optional<int> last_engagement_distance;
    std::uint64_t rng_seed = 0;
    std::optional<ClientAction> last_action;
};

struct ActionDistribution {
    std::map<ClientAction, double> weights;

    void normalize();
    double weight(ClientAction a) const;
};

/// Multiplies resistant weights by (resistant_scale - receptivity) and
/// cooperative weights by (cooperative_scale + receptivity), then renormalizes.
/// Hesitate and Terminate are untouched.
ActionDistribution tilt_distribution(ActionDistribution dist, double receptivity,
                                     const ClientConfig& cfg = {});

ClientAction sample_action(const ActionDistribution& dist, ChangeState state,
                           SessionRng& rng);

/// Profile-driven client agent; one instance per session.
class ClientSimulator {
public:
    ClientSimulator(const Catalogs& catalogs, const TopicTree& tree, ClientConfig config,
                    ClientProfile profile, Diagnostics* diag = nullptr);

    /// Monotone state transition. From Precontemplation a motivation-match
    /// judgment decides; from Contemplation a prior Acknowledge plus a concrete
    /// plan proposal in the counselor's last utterance advances to Preparation.
    ChangeState transition_state(Backend& backend, const std::vector<Utterance>& context,
                                 ChangeState prev, std::optional<ClientAction> last_action);

    /// Topic-match judgments at fine, coarse and superclass level of the
    /// profile's motivation path. First Yes wins: fine 0, coarse 1,
    /// superclass 2; all No gives 3.
    int engagement_level(Backend& backend, const std::vector<Utterance>& context);

    /// Parses the action distribution from a JSON completion, applies the
    /// receptivity tilt and samples with the session rng.
    ClientAction select_action(Backend& backend, const std::string& context,
                               ChangeState state, double receptivity, SessionRng& rng);

    std::pair<Utterance, ClientTurnState> next_turn(Backend& backend,
                                                    const std::vector<Utterance>& context,
                                                    ClientTurnState state, SessionRng& rng);

private:
    const Catalogs& catalogs_;
    const TopicTree& tree_;
    ClientConfig config_;
    ClientProfile profile_;
    Diagnostics* diag_;

    std::string system_prompt() const;
    void note(const std::string& msg) {
        if (diag_) diag_->note(msg);
    }
};

}  // namespace cami
