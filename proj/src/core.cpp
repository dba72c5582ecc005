#include "cami/core.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cami {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<const char*, 2> kSpeakerNames = {"Counselor", "Client"};
constexpr std::array<const char*, 3> kStateNames = {"Precontemplation", "Contemplation",
                                                    "Preparation"};
constexpr std::array<const char*, kStrategyCount> kStrategyNames = {
    "Advise",          "Affirm",         "Direct",
    "Emphasize Control", "Facilitate",   "Inform",
    "Closed Question", "Open Question",  "Raise Concern",
    "Confront",        "Simple Reflection", "Complex Reflection",
    "Reframe",         "Support",        "Warn",
    "Structure",       "No Strategy"};
constexpr std::array<const char*, kClientActionCount> kActionNames = {
    "Deny",  "Downplay", "Blame",       "Hesitate", "Doubt", "Engage",
    "Inform", "Acknowledge", "Accept",  "Reject",   "Plan",  "Terminate"};
constexpr std::array<const char*, kBehaviorCodeCount> kBehaviorCodeNames = {
    "Advise with Permission", "Advise without Permission", "Affirm",
    "Direct",                 "Emphasize Control",         "Facilitate",
    "Inform",                 "Closed Question",           "Open Question",
    "Raise Concern",          "Confront",                  "Simple Reflection",
    "Complex Reflection",     "Reframe",                   "Support",
    "Warn",                   "Structure",                 "Filter"};
constexpr std::array<const char*, 3> kTerminationNames = {"ExplicitEnd", "ClientMotivated",
                                                          "MaxTurns"};

template <typename Enum, size_t N>
Enum from_name(const std::array<const char*, N>& names, const std::string& s,
               const char* what) {
    for (size_t i = 0; i < N; ++i) {
        if (s == names[i]) return static_cast<Enum>(i);
    }
    throw std::invalid_argument(std::string("unknown ") + what + ": " + s);
}

ordered_json annotation_to_json(const TurnAnnotation& a) {
    ordered_json j = ordered_json::object();
    if (a.inferred_state) j["inferred_state"] = to_string(*a.inferred_state);
    if (a.true_state) j["true_state"] = to_string(*a.true_state);
    if (a.counselor_topic) j["counselor_topic"] = *a.counselor_topic;
    if (a.navigation_op) j["navigation_op"] = to_string(*a.navigation_op);
    if (a.strategies) {
        ordered_json arr = ordered_json::array();
        for (auto s : *a.strategies) arr.push_back(to_string(s));
        j["strategies"] = std::move(arr);
    }
    if (a.engagement_distance) j["engagement_distance"] = *a.engagement_distance;
    if (a.client_action) j["client_action"] = to_string(*a.client_action);
    if (a.behavior_code) j["behavior_code"] = to_string(*a.behavior_code);
    return j;
}

TurnAnnotation annotation_from_json(const ordered_json& j) {
    TurnAnnotation a;
    if (j.contains("inferred_state"))
        a.inferred_state = change_state_from_string(j["inferred_state"]);
    if (j.contains("true_state")) a.true_state = change_state_from_string(j["true_state"]);
    if (j.contains("counselor_topic")) a.counselor_topic = j["counselor_topic"];
    if (j.contains("navigation_op"))
        a.navigation_op = navigation_op_from_string(j["navigation_op"]);
    if (j.contains("strategies")) {
        std::vector<MIStrategy> v;
        for (const auto& s : j["strategies"]) v.push_back(strategy_from_string(s));
        a.strategies = std::move(v);
    }
    if (j.contains("engagement_distance"))
        a.engagement_distance = j["engagement_distance"].get<int>();
    if (j.contains("client_action"))
        a.client_action = client_action_from_string(j["client_action"]);
    if (j.contains("behavior_code"))
        a.behavior_code = behavior_code_from_string(j["behavior_code"]);
    return a;
}

ordered_json utterance_to_json(const Utterance& u) {
    ordered_json j;
    j["index"] = u.index;
    j["speaker"] = to_string(u.speaker);
    j["text"] = u.text;
    if (!u.annotations.empty()) j["annotations"] = annotation_to_json(u.annotations);
    return j;
}

Utterance utterance_from_json(const ordered_json& j) {
    Utterance u;
    u.index = j.at("index").get<int>();
    u.speaker = speaker_from_string(j.at("speaker"));
    u.text = j.at("text").get<std::string>();
    if (j.contains("annotations")) u.annotations = annotation_from_json(j["annotations"]);
    return u;
}

ordered_json content_json(const SessionTranscript& t) {
    ordered_json j;
    j["session_id"] = t.session_id;
    j["profile_id"] = t.profile_id;
    j["counselor_config_id"] = t.counselor_config_id;
    j["seed"] = t.seed;
    if (t.aborted) j["aborted"] = true;
    if (t.termination) j["termination"] = to_string(*t.termination);
    j["utterances"] = ordered_json::array();
    for (const auto& u : t.utterances) j["utterances"].push_back(utterance_to_json(u));
    return j;
}

}  // namespace

std::string to_string(Speaker s) { return kSpeakerNames[static_cast<int>(s)]; }
std::string to_string(ChangeState s) { return kStateNames[static_cast<int>(s)]; }
std::string to_string(MIStrategy s) { return kStrategyNames[static_cast<int>(s)]; }
std::string to_string(ClientAction a) { return kActionNames[static_cast<int>(a)]; }
std::string to_string(BehaviorCode c) { return kBehaviorCodeNames[static_cast<int>(c)]; }
std::string to_string(Termination t) { return kTerminationNames[static_cast<int>(t)]; }

Speaker speaker_from_string(const std::string& s) {
    return from_name<Speaker>(kSpeakerNames, s, "speaker");
}
ChangeState change_state_from_string(const std::string& s) {
    return from_name<ChangeState>(kStateNames, s, "change state");
}
MIStrategy strategy_from_string(const std::string& s) {
    return from_name<MIStrategy>(kStrategyNames, s, "strategy");
}
ClientAction client_action_from_string(const std::string& s) {
    return from_name<ClientAction>(kActionNames, s, "client action");
}
BehaviorCode behavior_code_from_string(const std::string& s) {
    return from_name<BehaviorCode>(kBehaviorCodeNames, s, "behavior code");
}
Termination termination_from_string(const std::string& s) {
    return from_name<Termination>(kTerminationNames, s, "termination");
}

std::vector<MIStrategy> all_strategies() {
    std::vector<MIStrategy> v;
    for (int i = 0; i < kStrategyCount; ++i) v.push_back(static_cast<MIStrategy>(i));
    return v;
}

std::vector<ClientAction> all_client_actions() {
    std::vector<ClientAction> v;
    for (int i = 0; i < kClientActionCount; ++i) v.push_back(static_cast<ClientAction>(i));
    return v;
}

std::vector<BehaviorCode> all_behavior_codes() {
    std::vector<BehaviorCode> v;
    for (int i = 0; i < kBehaviorCodeCount; ++i) v.push_back(static_cast<BehaviorCode>(i));
    return v;
}

std::vector<ClientAction> state_action_set(ChangeState s) {
    switch (s) {
        case ChangeState::Precontemplation:
            return {ClientAction::Inform, ClientAction::Engage, ClientAction::Deny,
                    ClientAction::Blame, ClientAction::Downplay};
        case ChangeState::Contemplation:
            return {ClientAction::Inform, ClientAction::Engage, ClientAction::Hesitate,
                    ClientAction::Doubt, ClientAction::Acknowledge};
        case ChangeState::Preparation:
            return {ClientAction::Accept, ClientAction::Reject, ClientAction::Plan,
                    ClientAction::Terminate, ClientAction::Engage, ClientAction::Inform};
    }
    return {};
}

bool TurnAnnotation::empty() const {
    return !inferred_state && !true_state && !counselor_topic && !navigation_op &&
           !strategies && !engagement_distance && !client_action && !behavior_code;
}

std::vector<Violation> validate_transcript(const SessionTranscript& t,
                                           const TopicTree& tree) {
    std::vector<Violation> out;
    auto add = [&out](std::string code, int index, std::string message) {
        out.push_back(Violation{std::move(code), index, std::move(message)});
    };

    const auto& us = t.utterances;
    if (us.size() > static_cast<size_t>(kMaxUtterances)) {
        add("MaxTurnsViolation", static_cast<int>(us.size()),
            "transcript has " + std::to_string(us.size()) + " utterances, cap is 50");
    }
    for (size_t i = 0; i < us.size(); ++i) {
        const auto& u = us[i];
        if (u.index != static_cast<int>(i) + 1) {
            add("IndexViolation", u.index,
                "expected index " + std::to_string(i + 1) + ", found " +
                    std::to_string(u.index));
        }
        if (u.text.empty()) add("EmptyTextViolation", static_cast<int>(i) + 1, "empty text");
        if (i > 0 && us[i - 1].speaker == u.speaker) {
            add("AlternationViolation", static_cast<int>(i) + 1,
                "speaker repeats at index " + std::to_string(i + 1));
        }
        const auto& a = u.annotations;
        if (u.speaker == Speaker::Counselor) {
            if (a.true_state || a.engagement_distance || a.client_action) {
                add("AnnotationSideViolation", static_cast<int>(i) + 1,
                    "client-only annotation on a counselor turn");
            }
        } else {
            if (a.inferred_state || a.counselor_topic || a.navigation_op || a.strategies ||
                a.behavior_code) {
                add("AnnotationSideViolation", static_cast<int>(i) + 1,
                    "counselor-only annotation on a client turn");
            }
        }
        if (a.strategies && a.strategies->size() > 2) {
            add("StrategyCapViolation", static_cast<int>(i) + 1,
                "more than 2 strategies recorded");
        }
        if (a.engagement_distance &&
            (*a.engagement_distance < 0 || *a.engagement_distance > 3)) {
            add("EngagementRangeViolation", static_cast<int>(i) + 1,
                "engagement distance outside 0..3");
        }
        if (a.counselor_topic && !tree.contains(*a.counselor_topic)) {
            add("TopicUnknownViolation", static_cast<int>(i) + 1,
                "annotated topic not in tree: " + *a.counselor_topic);
        }
    }
    if (!us.empty()) {
        if (us[0].speaker != Speaker::Counselor || us[0].text != kCounselorOpener) {
            add("OpenerViolation", 1, "turn 1 must be the counselor opener");
        }
        if (us.size() >= 2 &&
            (us[1].speaker != Speaker::Client || us[1].text != kClientOpener)) {
            add("OpenerViolation", 2, "turn 2 must be the client opener");
        }
    }
    if (!t.aborted) {
        if (!t.termination) {
            add("TerminationViolation", -1, "missing termination on a completed session");
        } else if (*t.termination == Termination::MaxTurns &&
                   us.size() < static_cast<size_t>(kMaxUtterances)) {
            add("TerminationViolation", -1,
                "MaxTurns termination with fewer than 50 utterances");
        }
    }
    return out;
}

std::string profile_to_json(const ClientProfile& p) {
    ordered_json j;
    j["id"] = p.id;
    j["behavior"] = p.behavior;
    j["goal"] = p.goal;
    j["initial_state"] = to_string(p.initial_state);
    j["personas"] = p.personas;
    j["motivation"] = p.motivation;
    j["beliefs"] = p.beliefs;
    j["receptivity"] = p.receptivity;
    j["motivation_topic_path"] = p.motivation_topic_path;
    return j.dump(2) + "\n";
}

ClientProfile profile_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    ClientProfile p;
    p.id = j.at("id").get<std::string>();
    p.behavior = j.at("behavior").get<std::string>();
    p.goal = j.value("goal", std::string{});
    p.initial_state = change_state_from_string(j.value("initial_state", "Precontemplation"));
    p.personas = j.value("personas", std::vector<std::string>{});
    p.motivation = j.value("motivation", std::string{});
    p.beliefs = j.value("beliefs", std::vector<std::string>{});
    p.receptivity = j.value("receptivity", 0.5);
    if (p.receptivity < 0.0 || p.receptivity > 1.0) {
        throw std::invalid_argument("receptivity must be in [0,1] for profile " + p.id);
    }
    p.motivation_topic_path = j.value("motivation_topic_path", std::vector<std::string>{});
    return p;
}

ClientProfile load_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return profile_from_json(buf.str());
}

std::string transcript_to_json(const SessionTranscript& t) {
    ordered_json j = content_json(t);
    j["backend_fingerprint"] = t.backend_fingerprint;
    j["exchange_log"] = ordered_json::array();
    for (const auto& e : t.exchange_log) {
        ordered_json entry;
        entry["tag"] = e.tag;
        entry["request_messages"] = ordered_json::array();
        for (const auto& [role, content] : e.request_messages) {
            entry["request_messages"].push_back({{"role", role}, {"content", content}});
        }
        entry["response_text"] = e.response_text;
        j["exchange_log"].push_back(std::move(entry));
    }
    return j.dump(2) + "\n";
}

SessionTranscript transcript_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    SessionTranscript t;
    t.session_id = j.at("session_id").get<std::string>();
    t.profile_id = j.at("profile_id").get<std::string>();
    t.counselor_config_id = j.value("counselor_config_id", std::string{});
    t.seed = j.value("seed", std::uint64_t{0});
    t.aborted = j.value("aborted", false);
    if (j.contains("termination")) t.termination = termination_from_string(j["termination"]);
    t.backend_fingerprint = j.value("backend_fingerprint", std::string{});
    for (const auto& u : j.at("utterances")) t.utterances.push_back(utterance_from_json(u));
    if (j.contains("exchange_log")) {
        for (const auto& e : j["exchange_log"]) {
            Exchange ex;
            ex.tag = e.value("tag", std::string{});
            if (e.contains("request_messages")) {
                for (const auto& m : e["request_messages"]) {
                    ex.request_messages.emplace_back(m.at("role").get<std::string>(),
                                                     m.at("content").get<std::string>());
                }
            }
            ex.response_text = e.value("response_text", std::string{});
            t.exchange_log.push_back(std::move(ex));
        }
    }
    return t;
}

SessionTranscript load_transcript_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open transcript file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return transcript_from_json(buf.str());
}

std::string transcript_content_json(const SessionTranscript& t) {
    return content_json(t).dump(2) + "\n";
}

std::uint64_t transcript_content_hash(const SessionTranscript& t) {
    // FNV-1a, 64-bit
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : transcript_content_json(t)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string render_context(const std::vector<Utterance>& utterances, size_t window) {
    size_t start = 0;
    if (window > 0 && utterances.size() > window) start = utterances.size() - window;
    std::string out;
    for (size_t i = start; i < utterances.size(); ++i) {
        if (!out.empty()) out += "\n";
        out += to_string(utterances[i].speaker) + ": " + utterances[i].text;
    }
    return out;
}

int word_count(const std::string& text) {
    std::istringstream in(text);
    std::string token;
    int n = 0;
    while (in >> token) ++n;
    return n;
}

}  // namespace cami
