#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cami/topic_tree.hpp"

namespace cami {

enum class Speaker { Counselor, Client };

/// Readiness-to-change states covered by the counselor and client agents.
/// Ordering Precontemplation < Contemplation < Preparation is total.
enum class ChangeState { Precontemplation, Contemplation, Preparation };

enum class MIStrategy {
    Advise,
    Affirm,
    Direct,
    EmphasizeControl,
    Facilitate,
    Inform,
    ClosedQuestion,
    OpenQuestion,
    RaiseConcern,
    Confront,
    SimpleReflection,
    ComplexReflection,
    Reframe,
    Support,
    Warn,
    Structure,
    NoStrategy,
};
inline constexpr int kStrategyCount = 17;

enum class ClientAction {
    Deny,
    Downplay,
    Blame,
    Hesitate,
    Doubt,
    Engage,
    Inform,
    Acknowledge,
    Accept,
    Reject,
    Plan,
    Terminate,
};
inline constexpr int kClientActionCount = 12;

/// MITI behavior codes assigned by the evaluation annotator.
enum class BehaviorCode {
    AdviseWithPermission,
    AdviseWithoutPermission,
    Affirm,
    Direct,
    EmphasizeControl,
    Facilitate,
    Inform,
    ClosedQuestion,
    OpenQuestion,
    RaiseConcern,
    Confront,
    SimpleReflection,
    ComplexReflection,
    Reframe,
    Support,
    Warn,
    Structure,
    Filter,
};
inline constexpr int kBehaviorCodeCount = 18;

enum class Termination { ExplicitEnd, ClientMotivated, MaxTurns };

std::string to_string(Speaker s);
std::string to_string(ChangeState s);
std::string to_string(MIStrategy s);  // display name, e.g. "Open Question"
std::string to_string(ClientAction a);
std::string to_string(BehaviorCode c);  // display name, e.g. "Advise with Permission"
std::string to_string(Termination t);

Speaker speaker_from_string(const std::string& s);
ChangeState change_state_from_string(const std::string& s);
MIStrategy strategy_from_string(const std::string& s);
ClientAction client_action_from_string(const std::string& s);
BehaviorCode behavior_code_from_string(const std::string& s);
Termination termination_from_string(const std::string& s);

std::vector<MIStrategy> all_strategies();
std::vector<ClientAction> all_client_actions();
std::vector<BehaviorCode> all_behavior_codes();

/// Actions available to a client in the given state.
std::vector<ClientAction> state_action_set(ChangeState s);

struct TurnAnnotation {
    // counselor-only fields
    std::optional<ChangeState> inferred_state;
    std::optional<std::string> counselor_topic;
    std::optional<NavigationOp> navigation_op;
    std::optional<std::vector<MIStrategy>> strategies;  // length <= 2
    std::optional<BehaviorCode> behavior_code;          // filled by evaluation
    // client-only fields
    std::optional<ChangeState> true_state;
    std::optional<int> engagement_distance;  // 0..3
    std::optional<ClientAction> client_action;

    bool empty() const;
};

struct Utterance {
    int index = 0;  // 1-based turn number
    Speaker speaker = Speaker::Counselor;
    std::string text;
    TurnAnnotation annotations;
};

struct ClientProfile {
    std::string id;
    std::string behavior;  // problematic behavior, e.g. "Smoking"
    std::string goal;      // counseling goal, e.g. "smoking cessation"
    ChangeState initial_state = ChangeState::Precontemplation;
    std::vector<std::string> personas;
    std::string motivation;
    std::vector<std::string> beliefs;
    double receptivity = 0.5;  // 0 = highly resistant, 1 = highly receptive
    std::vector<std::string> motivation_topic_path;  // [superclass, coarse, fine]
};

/// One request/response pair recorded during a session.
struct Exchange {
    std::string tag;
    std::vector<std::pair<std::string, std::string>> request_messages;  // (role, content)
    std::string response_text;
};

inline constexpr int kMaxUtterances = 50;
inline constexpr const char* kCounselorOpener = "Hello. How are you?";
inline constexpr const char* kClientOpener = "I am good. What about you?";

struct SessionTranscript {
    std::string session_id;
    std::string profile_id;
    std::string counselor_config_id;
    std::uint64_t seed = 0;
    std::string backend_fingerprint;
    bool aborted = false;
    std::optional<Termination> termination;  // absent only on aborted sessions
    std::vector<Utterance> utterances;
    std::vector<Exchange> exchange_log;
};

struct Violation {
    std::string code;     // e.g. "AlternationViolation"
    int index = -1;       // 1-based utterance index when applicable
    std::string message;
};

/// Returns every invariant violation (empty list <=> valid). Never mutates.
std::vector<Violation> validate_transcript(const SessionTranscript& t, const TopicTree& tree);

// --- canonical serialization (stable key order, byte-stable) ---

std::string profile_to_json(const ClientProfile& p);
ClientProfile profile_from_json(const std::string& text);
ClientProfile load_profile_file(const std::string& path);

std::string transcript_to_json(const SessionTranscript& t);
SessionTranscript transcript_from_json(const std::string& text);
SessionTranscript load_transcript_file(const std::string& path);

/// Canonical form of the session content (utterances, annotations, termination)
/// excluding the exchange log and backend fingerprint; two runs that produced
/// the same conversation hash identically regardless of the backend used.
std::string transcript_content_json(const SessionTranscript& t);
std::uint64_t transcript_content_hash(const SessionTranscript& t);

/// Renders a window of the conversation as "Counselor: ..." / "Client: ..." lines.
/// window = 0 means the full transcript.
std::string render_context(const std::vector<Utterance>& utterances, size_t window = 0);

/// Whitespace-token count, the talk-time approximation used by evaluation.
int word_count(const std::string& text);

}  // namespace cami
