#include "cami/client_sim.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cami/text.hpp"

namespace cami {

namespace {

bool is_resistant(ClientAction a) {
    switch (a) {
        case ClientAction::Deny:
        case ClientAction::Blame:
        case ClientAction::Downplay:
        case ClientAction::Doubt:
        case ClientAction::Reject:
            return true;
        default:
            return false;
    }
}

bool is_cooperative(ClientAction a) {
    switch (a) {
        case ClientAction::Engage:
        case ClientAction::Inform:
        case ClientAction::Acknowledge:
        case ClientAction::Accept:
        case ClientAction::Plan:
            return true;
        default:
            return false;
    }
}

// Plan-proposal cues gating the Contemplation -> Preparation transition.
const std::vector<std::string>& plan_keywords() {
    static const std::vector<std::string> kw = {"plan",   "step",    "start",
                                                "try",    "commit",  "schedule",
                                                "begin",  "concrete"};
    return kw;
}

std::optional<std::string> last_counselor_text(const std::vector<Utterance>& context) {
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
        if (it->speaker == Speaker::Counselor) return it->text;
    }
    return std::nullopt;
}

}  // namespace

std::uint64_t SessionRng::next_u64() {
    // splitmix64; stable across platforms and standard libraries
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double SessionRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

void ActionDistribution::normalize() {
    double sum = 0.0;
    for (auto& [a, w] : weights) {
        if (w < 0.0) w = 0.0;
        sum += w;
    }
    if (sum <= 0.0) return;
    for (auto& [a, w] : weights) w /= sum;
}

double ActionDistribution::weight(ClientAction a) const {
    auto it = weights.find(a);
    return it == weights.end() ? 0.0 : it->second;
}

ActionDistribution tilt_distribution(ActionDistribution dist, double receptivity,
                                     const ClientConfig& cfg) {
    for (auto& [action, w] : dist.weights) {
        if (is_resistant(action)) w *= (cfg.tilt_resistant_scale - receptivity);
        else if (is_cooperative(action)) w *= (cfg.tilt_cooperative_scale + receptivity);
    }
    dist.normalize();
    return dist;
}

ClientAction sample_action(const ActionDistribution& dist, ChangeState state,
                           SessionRng& rng) {
    auto actions = state_action_set(state);
    double total = 0.0;
    for (auto a : actions) total += dist.weight(a);
    if (total <= 0.0) {
        // uniform over the state's action set
        size_t pick = static_cast<size_t>(rng.next_double() * actions.size());
        if (pick >= actions.size()) pick = actions.size() - 1;
        return actions[pick];
    }
    double u = rng.next_double() * total;
    double acc = 0.0;
    for (auto a : actions) {
        acc += dist.weight(a);
        if (u < acc) return a;
    }
    return actions.back();
}

ClientSimulator::ClientSimulator(const Catalogs& catalogs, const TopicTree& tree,
                                 ClientConfig config, ClientProfile profile,
                                 Diagnostics* diag)
    : catalogs_(catalogs),
      tree_(tree),
      config_(std::move(config)),
      profile_(std::move(profile)),
      diag_(diag) {}

ChangeState ClientSimulator::transition_state(Backend& backend,
                                              const std::vector<Utterance>& context,
                                              ChangeState prev,
                                              std::optional<ClientAction> last_action) {
    if (prev == ChangeState::Preparation) return prev;

    if (prev == ChangeState::Precontemplation) {
        std::string prompt = catalogs_.prompts.render(
            "client_motivation_match",
            {{"examples", catalogs_.motivation_examples},
             {"goal", profile_.goal},
             {"context", render_context(context, config_.match_window)},
             {"motivation", profile_.motivation}});
        ChatRequest req = ChatRequest::single("client_motivation_match", std::move(prompt),
                                              config_.sampling);
        std::string text = backend.complete(req).text;
        auto verdict = parse_final_yes_no(text);
        if (!verdict) {
            note("transition_state: unparseable motivation judgment, state unchanged");
            return prev;
        }
        return *verdict ? ChangeState::Contemplation : prev;
    }

    // Contemplation: advance only after the client acknowledged change and the
    // counselor proposed concrete next steps.
    if (last_action == ClientAction::Acknowledge) {
        auto counselor = last_counselor_text(context);
        if (counselor) {
            for (const auto& kw : plan_keywords()) {
                if (contains_word_ci(*counselor, kw)) return ChangeState::Preparation;
            }
        }
    }
    return prev;
}

int ClientSimulator::engagement_level(Backend& backend,
                                      const std::vector<Utterance>& context) {
    auto counselor = last_counselor_text(context);
    std::string snippet = counselor ? "Counselor: " + *counselor : render_context(context, 1);

    const auto& path = profile_.motivation_topic_path;
    if (path.size() != 3) return 3;
    const std::string levels[3] = {path[2], path[1], path[0]};  // fine, coarse, superclass
    for (int i = 0; i < 3; ++i) {
        std::string prompt = catalogs_.prompts.render(
            "client_engagement", {{"examples", catalogs_.engagement_examples},
                                  {"context", snippet},
                                  {"topic", levels[i]}});
        ChatRequest req = ChatRequest::single("client_engagement", std::move(prompt),
                                              config_.sampling);
        std::string text = backend.complete(req).text;
        auto verdict = parse_final_yes_no(text);
        if (!verdict) {
            note("engagement_level: unparseable judgment at level " + std::to_string(i) +
                 ", treated as No");
            continue;
        }
        if (*verdict) return i;
    }
    return 3;
}

ClientAction ClientSimulator::select_action(Backend& backend, const std::string& context,
                                            ChangeState state, double receptivity,
                                            SessionRng& rng) {
    std::string prompt = catalogs_.prompts.render(
        "client_action",
        {{"context", context}, {"actions", catalogs_.actions_block(state)}});
    ChatRequest req = ChatRequest::single("client_action", std::move(prompt), config_.sampling);
    std::string text = backend.complete(req).text;

    ActionDistribution dist;
    auto allowed = state_action_set(state);
    bool parsed_any = false;
    if (auto blob = extract_json_object(text)) {
        nlohmann::json parsed;
        std::string fixed = *blob;
        std::replace(fixed.begin(), fixed.end(), '\'', '"');
        try {
            parsed = nlohmann::json::parse(fixed);
        } catch (const nlohmann::json::exception&) {
            parsed = nlohmann::json();
        }
        if (parsed.is_object()) {
            for (const auto& [key, value] : parsed.items()) {
                if (!value.is_number()) continue;
                for (auto a : allowed) {
                    if (to_lower(key) == to_lower(to_string(a))) {
                        double w = value.get<double>();
                        if (w > 0.0) {
                            dist.weights[a] = w;
                            parsed_any = true;
                        }
                    }
                }
            }
        }
    }
    if (!parsed_any) {
        note("select_action: unparseable distribution, using uniform over action set");
        for (auto a : allowed) dist.weights[a] = 1.0;
    }
    dist.normalize();
    dist = tilt_distribution(std::move(dist), receptivity, config_);
    return sample_action(dist, state, rng);
}

std::string ClientSimulator::system_prompt() const {
    std::string personas;
    for (const auto& p : profile_.personas) personas += "- " + p + "\n";
    return catalogs_.prompts.render(
        "client_system",
        {{"behavior", profile_.behavior},
         {"personas", personas},
         {"reference", config_.reference_session.value_or(catalogs_.reference_session)}});
}

std::pair<Utterance, ClientTurnState> ClientSimulator::next_turn(
    Backend& backend, const std::vector<Utterance>& context, ClientTurnState state,
    SessionRng& rng) {
    ChangeState next_state =
        transition_state(backend, context, state.state, state.last_action);
    int distance = engagement_level(backend, context);
    ClientAction action = select_action(backend, render_context(context), next_state,
                                        profile_.receptivity, rng);

    std::string instruction =
        " [State: " + to_string(next_state) + " - " +
        catalogs_.client_state_descriptions.at(next_state) + "]" +
        " [Action: " + to_string(action) + " - " + catalogs_.action_descriptions.at(action) +
        "]" + " [Engagement: " + catalogs_.engagement_descriptions[distance] + "]";

    ChatRequest req;
    req.tag = "client_generate";
    req.sampling = config_.sampling;
    req.messages.push_back({Role::System, system_prompt()});
    for (const auto& u : context) {
        if (u.speaker == Speaker::Client) {
            req.messages.push_back({Role::Assistant, "Client: " + u.text});
        } else {
            req.messages.push_back({Role::User, "Counselor: " + u.text});
        }
    }
    if (!req.messages.empty() && req.messages.back().role == Role::User) {
        req.messages.back().content += instruction;
    }
    std::string text = backend.complete(req).text;
    if (text.empty()) throw EmptyCompletion("empty client generation");

    Utterance u;
    u.index = static_cast<int>(context.size()) + 1;
    u.speaker = Speaker::Client;
    u.text = strip_speaker_prefix(text);
    u.annotations.true_state = next_state;
    u.annotations.engagement_distance = distance;
    u.annotations.client_action = action;

    ClientTurnState new_state = state;
    new_state.state = next_state;
    new_state.last_engagement_distance = distance;
    new_state.last_action = action;
    return {std::move(u), std::move(new_state)};
}

}  // namespace cami
