#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cami/catalogs.hpp"
#include "cami/core.hpp"
#include "cami/llm.hpp"
#include "cami/topic_tree.hpp"

namespace cami {

/// Degradation notes collected by the agents; parse fallbacks land here rather
/// than failing the turn.
struct Diagnostics {
    std::vector<std::string> entries;
    void note(std::string message) { entries.push_back(std::move(message)); }
};

struct CounselorConfig {
    std::string id = "cami";  // preset name, or "custom"
    bool use_state_inference = true;
    bool use_topic_exploration = true;
    bool use_strategies = true;  // off only for the bare system-prompt preset
    int strategy_cap = 2;
    int init_phase_turns = 6;
    double init_prob_threshold = 0.40;  // strict: transition needs prob > threshold
    int response_char_hint = 150;
    SamplingConfig sampling;

    /// Presets: base (system prompt only), cos (strategies), cami-te (state +
    /// strategies), cami (everything).
    static CounselorConfig preset(const std::string& name);
};

enum class EngagementPhase { InitialEngagement, FocusedEngagement, PostExploration };

std::string to_string(EngagementPhase p);

struct CounselorTurnState {
    ChangeState inferred_state = ChangeState::Precontemplation;
    EngagementPhase phase = EngagementPhase::InitialEngagement;
    std::map<std::string, double> superclass_probs;
    std::optional<std::string> current_topic;  // absent during InitialEngagement
    ExplorationPath exploration_path;
};

struct TopicProbParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NavigationResult {
    NavigationOp op = NavigationOp::Hold;
    std::optional<std::string> next_topic;
    bool fallback_used = false;
};

/// Phase transition: InitialEngagement ends at turn >= init_phase_turns or when
/// some superclass probability exceeds the threshold; ties resolve to the first
/// root in canonical order. Monotone: never leaves FocusedEngagement.
CounselorTurnState maybe_enter_focused(CounselorTurnState state, const CounselorConfig& cfg,
                                       int turn_index,
                                       const std::vector<std::string>& root_order);

/// The counselor agent. One instance per session; sub-operations run strictly
/// sequentially within a turn.
class Counselor {
public:
    Counselor(const Catalogs& catalogs, const TopicTree& tree, CounselorConfig config,
              ClientProfile profile, Diagnostics* diag = nullptr);

    /// Parses the inferred state from the completion's closing sentence;
    /// unparseable degrades to Precontemplation.
    ChangeState infer_state(Backend& backend, const std::string& context);

    /// Superclass probability map parsed from a JSON completion. Percent-style
    /// values are rescaled; the map is renormalized to sum 1.
    std::map<std::string, double> init_topic_probs(Backend& backend,
                                                   const std::string& context);

    /// Two-stage navigation: one completion picks the op, a second picks the
    /// target among the candidates. Everything degrades to Hold or to the first
    /// candidate rather than failing.
    NavigationResult navigate(Backend& backend, const ExplorationPath& path,
                              const std::string& current_topic, const std::string& context,
                              ChangeState state);

    std::vector<MIStrategy> select_strategies(Backend& backend, const std::string& context,
                                              ChangeState state, const std::string& topic);

    /// One generation per strategy plus the concatenated pair, then a ranking
    /// completion; rank-parse failure falls back to the concatenated candidate.
    std::string generate_and_rank(Backend& backend, const std::vector<Utterance>& context,
                                  ChangeState state,
                                  const std::optional<std::string>& topic,
                                  const std::vector<MIStrategy>& strategies);

    std::pair<Utterance, CounselorTurnState> next_turn(Backend& backend,
                                                       const std::vector<Utterance>& context,
                                                       CounselorTurnState state);

    const CounselorConfig& config() const { return config_; }

private:
    const Catalogs& catalogs_;
    const TopicTree& tree_;
    CounselorConfig config_;
    ClientProfile profile_;
    Diagnostics* diag_;

    std::string system_prompt() const;
    std::string instruction(ChangeState state, const std::optional<std::string>& topic,
                            const std::vector<MIStrategy>& strategies,
                            EngagementPhase phase) const;
    std::string generate_once(Backend& backend, const std::vector<Utterance>& context,
                              const std::string& instruction_text);
    void note(const std::string& msg) {
        if (diag_) diag_->note(msg);
    }
};

}  // namespace cami
