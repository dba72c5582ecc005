#include "cami/counselor.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cami/text.hpp"

namespace cami {

namespace {

const std::vector<std::string>& state_names() {
    static const std::vector<std::string> names = {"Precontemplation", "Contemplation",
                                                   "Preparation"};
    return names;
}

std::string join_names(const std::vector<std::string>& names) {
    if (names.empty()) return "(none)";
    std::string out;
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out;
}

std::string bullet_list(const std::vector<std::string>& names) {
    if (names.empty()) return "(none)";
    std::string out;
    for (const auto& n : names) out += "- " + n + "\n";
    return out;
}

}  // namespace

CounselorConfig CounselorConfig::preset(const std::string& name) {
    CounselorConfig cfg;
    cfg.id = name;
    if (name == "base") {
        cfg.use_state_inference = false;
        cfg.use_topic_exploration = false;
        cfg.use_strategies = false;
    } else if (name == "cos") {
        cfg.use_state_inference = false;
        cfg.use_topic_exploration = false;
        cfg.use_strategies = true;
    } else if (name == "cami-te") {
        cfg.use_state_inference = true;
        cfg.use_topic_exploration = false;
        cfg.use_strategies = true;
    } else if (name == "cami") {
        cfg.use_state_inference = true;
        cfg.use_topic_exploration = true;
        cfg.use_strategies = true;
    } else {
        throw std::invalid_argument("unknown counselor preset: " + name);
    }
    return cfg;
}

std::string to_string(EngagementPhase p) {
    switch (p) {
        case EngagementPhase::InitialEngagement: return "InitialEngagement";
        case EngagementPhase::FocusedEngagement: return "FocusedEngagement";
        case EngagementPhase::PostExploration: return "PostExploration";
    }
    return "InitialEngagement";
}

CounselorTurnState maybe_enter_focused(CounselorTurnState state, const CounselorConfig& cfg,
                                       int turn_index,
                                       const std::vector<std::string>& root_order) {
    if (state.phase != EngagementPhase::InitialEngagement) return state;

    double max_prob = 0.0;
    std::optional<std::string> best;
    for (const auto& root : root_order) {
        auto it = state.superclass_probs.find(root);
        double p = it == state.superclass_probs.end() ? 0.0 : it->second;
        if (!best || p > max_prob) {  // strict '>' keeps the first root on ties
            best = root;
            max_prob = p;
        }
    }
    const bool by_turns = turn_index >= cfg.init_phase_turns;
    const bool by_prob = max_prob > cfg.init_prob_threshold;
    if (!by_turns && !by_prob) return state;

    state.phase = EngagementPhase::FocusedEngagement;
    if (best) {
        state.current_topic = *best;
        state.exploration_path.steps.push_back({*best, NavigationOp::Init});
    }
    return state;
}

Counselor::Counselor(const Catalogs& catalogs, const TopicTree& tree, CounselorConfig config,
                     ClientProfile profile, Diagnostics* diag)
    : catalogs_(catalogs),
      tree_(tree),
      config_(std::move(config)),
      profile_(std::move(profile)),
      diag_(diag) {}

ChangeState Counselor::infer_state(Backend& backend, const std::string& context) {
    std::string prompt = catalogs_.prompts.render("state_inference", {{"context", context}});
    ChatRequest req = ChatRequest::single("state_inference", std::move(prompt),
                                          config_.sampling);
    std::string text = backend.complete(req).text;

    auto anchor = find_last_word_ci(text, "current state in the above context is");
    if (!anchor) {
        note("state_inference: no closing pattern, defaulting to Precontemplation");
        return ChangeState::Precontemplation;
    }
    std::string closing = text.substr(*anchor);
    auto idx = last_name_in_text(closing, state_names());
    if (!idx) {
        note("state_inference: closing sentence names no state, defaulting");
        return ChangeState::Precontemplation;
    }
    return static_cast<ChangeState>(*idx);
}

std::map<std::string, double> Counselor::init_topic_probs(Backend& backend,
                                                          const std::string& context) {
    std::string prompt = catalogs_.prompts.render(
        "topic_init", {{"goal", profile_.goal},
                       {"behavior", profile_.behavior},
                       {"context", context},
                       {"topics", bullet_list(tree_.roots())}});
    ChatRequest req = ChatRequest::single("topic_init", std::move(prompt), config_.sampling);
    std::string text = backend.complete(req).text;

    auto blob = extract_json_object(text);
    if (!blob) throw TopicProbParseError("no JSON object in topic-probability completion");

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(*blob);
    } catch (const nlohmann::json::exception&) {
        std::string fixed = *blob;
        std::replace(fixed.begin(), fixed.end(), '\'', '"');
        try {
            parsed = nlohmann::json::parse(fixed);
        } catch (const nlohmann::json::exception& e) {
            throw TopicProbParseError(std::string("unparseable topic probabilities: ") +
                                      e.what());
        }
    }
    if (!parsed.is_object()) throw TopicProbParseError("topic probabilities not an object");

    std::map<std::string, double> probs;
    for (const auto& root : tree_.roots()) probs[root] = 0.0;
    double raw_sum = 0.0;
    for (const auto& [key, value] : parsed.items()) {
        if (!value.is_number()) continue;
        auto canonical = tree_.resolve(key);
        if (!canonical) continue;
        if (std::find(tree_.roots().begin(), tree_.roots().end(), *canonical) ==
            tree_.roots().end()) {
            continue;
        }
        probs[*canonical] = value.get<double>();
        raw_sum += value.get<double>();
    }
    if (raw_sum > 2.0) {  // percent-style completion
        for (auto& [k, v] : probs) v /= 100.0;
    }
    double sum = 0.0;
    for (auto& [k, v] : probs) {
        v = std::clamp(v, 0.0, 1.0);
        sum += v;
    }
    if (sum <= 0.0 || sum > 2.0) {
        throw TopicProbParseError("topic probabilities sum outside (0, 2]: " +
                                  std::to_string(sum));
    }
    for (auto& [k, v] : probs) v /= sum;
    return probs;
}

NavigationResult Counselor::navigate(Backend& backend, const ExplorationPath& path,
                                     const std::string& current_topic,
                                     const std::string& context, ChangeState state) {
    auto step_into = tree_.candidates(current_topic, NavigationOp::StepInto);
    auto switch_to = tree_.candidates(current_topic, NavigationOp::Switch);
    auto step_out = tree_.candidates(current_topic, NavigationOp::StepOut);

    std::string prompt = catalogs_.prompts.render(
        "topic_explore_op", {{"goal", profile_.goal},
                             {"behavior", profile_.behavior},
                             {"explore_path", path.render()},
                             {"context", context},
                             {"topic", current_topic},
                             {"step_into_topics", join_names(step_into)},
                             {"switch_topics", join_names(switch_to)},
                             {"step_out_topics", join_names(step_out)}});
    ChatRequest req = ChatRequest::single("navigate_op", std::move(prompt), config_.sampling);
    std::string op_text = backend.complete(req).text;

    // "step into" is checked before "step out" before "switch" to dodge
    // substring traps; no keyword keeps the current topic.
    NavigationOp op = NavigationOp::Hold;
    if (contains_word_ci(op_text, "step into")) op = NavigationOp::StepInto;
    else if (contains_word_ci(op_text, "step out")) op = NavigationOp::StepOut;
    else if (contains_word_ci(op_text, "switch")) op = NavigationOp::Switch;

    if (op == NavigationOp::Hold) {
        note("navigate: no operation keyword, holding topic");
        return {NavigationOp::Hold, std::nullopt, false};
    }
    const auto& candidates = op == NavigationOp::StepInto ? step_into
                             : op == NavigationOp::Switch ? switch_to
                                                          : step_out;
    if (candidates.empty()) {
        note("navigate: " + to_string(op) + " has no candidates, holding topic");
        return {NavigationOp::Hold, std::nullopt, false};
    }

    const char* template_id = op == NavigationOp::StepInto ? "topic_step_into"
                              : op == NavigationOp::Switch ? "topic_switch"
                                                           : "topic_step_out";
    std::map<std::string, std::string> bindings = {
        {"explore_path", path.render()},
        {"context", context},
        {"topic", current_topic},
    };
    if (op == NavigationOp::StepInto) bindings["step_into_topics"] = bullet_list(candidates);
    if (op == NavigationOp::Switch) {
        bindings["switch_topics"] = bullet_list(candidates);
        bindings["state"] = to_string(state);
    }
    if (op == NavigationOp::StepOut) bindings["step_out_topics"] = bullet_list(candidates);

    ChatRequest topic_req = ChatRequest::single(
        "navigate_topic", catalogs_.prompts.render(template_id, bindings), config_.sampling);
    std::string topic_text = backend.complete(topic_req).text;

    auto idx = last_name_in_text(topic_text, candidates);
    if (!idx) {
        note("navigate: completion named no candidate, falling back to " + candidates[0]);
        return {op, candidates[0], true};
    }
    return {op, candidates[*idx], false};
}

std::vector<MIStrategy> Counselor::select_strategies(Backend& backend,
                                                     const std::string& context,
                                                     ChangeState state,
                                                     const std::string& topic) {
    std::string prompt = catalogs_.prompts.render(
        "strategy_selection", {{"strategies", catalogs_.strategies_block()},
                               {"context", context},
                               {"state", to_string(state)},
                               {"topic", topic}});
    ChatRequest req = ChatRequest::single("strategy_selection", std::move(prompt),
                                          config_.sampling);
    std::string text = backend.complete(req).text;

    std::vector<std::string> names;
    for (auto s : all_strategies()) names.push_back(to_string(s));
    std::vector<MIStrategy> selected;
    for (const auto& m : match_names_in_text(text, names)) {
        auto strategy = static_cast<MIStrategy>(m.name_index);
        if (std::find(selected.begin(), selected.end(), strategy) == selected.end()) {
            selected.push_back(strategy);
        }
        if (selected.size() == static_cast<size_t>(config_.strategy_cap)) break;
    }
    if (selected.empty()) {
        note("select_strategies: no catalog name in completion, using No Strategy");
        selected.push_back(MIStrategy::NoStrategy);
    }
    return selected;
}

std::string Counselor::system_prompt() const {
    return catalogs_.prompts.render(
        "counselor_system",
        {{"goal", profile_.goal},
         {"behavior", profile_.behavior},
         {"response_chars", std::to_string(config_.response_char_hint)},
         {"mi_principles", catalogs_.mi_principles},
         {"mi_techniques", catalogs_.mi_techniques_block()}});
}

std::string Counselor::instruction(ChangeState state, const std::optional<std::string>& topic,
                                   const std::vector<MIStrategy>& strategies,
                                   EngagementPhase phase) const {
    std::string out;
    if (config_.use_state_inference) {
        out += " [State: " + to_string(state) + " - " +
               catalogs_.counselor_state_descriptions.at(state) + "]";
    }
    if (config_.use_topic_exploration) {
        if (topic) {
            out += " [Topic: " + *topic + " - " +
                   catalogs_.topic_guidance(tree_, *topic, profile_.behavior, profile_.goal) +
                   "]";
        } else if (phase == EngagementPhase::InitialEngagement) {
            out += " [Topics: explore broadly among " + join_names(tree_.roots()) + "]";
        }
    }
    if (config_.use_strategies && !strategies.empty()) {
        out += " [Strategies: ";
        for (size_t i = 0; i < strategies.size(); ++i) {
            if (i) out += " | ";
            out += to_string(strategies[i]) + ": " +
                   catalogs_.strategy_descriptions.at(strategies[i]);
        }
        out += "]";
    }
    return out;
}

std::string Counselor::generate_once(Backend& backend, const std::vector<Utterance>& context,
                                     const std::string& instruction_text) {
    ChatRequest req;
    req.tag = "generate";
    req.sampling = config_.sampling;
    req.messages.push_back({Role::System, system_prompt()});
    for (const auto& u : context) {
        if (u.speaker == Speaker::Counselor) {
            req.messages.push_back({Role::Assistant, "Counselor: " + u.text});
        } else {
            req.messages.push_back({Role::User, "Client: " + u.text});
        }
    }
    if (!instruction_text.empty() && !req.messages.empty() &&
        req.messages.back().role == Role::User) {
        req.messages.back().content += instruction_text;
    }
    std::string text = backend.complete(req).text;
    if (text.empty()) throw EmptyCompletion("empty counselor generation");
    return strip_speaker_prefix(text);
}

std::string Counselor::generate_and_rank(Backend& backend,
                                         const std::vector<Utterance>& context,
                                         ChangeState state,
                                         const std::optional<std::string>& topic,
                                         const std::vector<MIStrategy>& strategies) {
    if (strategies.empty()) throw std::invalid_argument("generate_and_rank needs strategies");
    EngagementPhase phase = topic ? EngagementPhase::FocusedEngagement
                                  : EngagementPhase::InitialEngagement;
    if (strategies.size() == 1) {
        return generate_once(backend, context, instruction(state, topic, strategies, phase));
    }

    // One candidate per single strategy plus the concatenated pair.
    std::vector<std::string> candidates;
    for (auto s : strategies) {
        candidates.push_back(
            generate_once(backend, context, instruction(state, topic, {s}, phase)));
    }
    candidates.push_back(
        generate_once(backend, context, instruction(state, topic, strategies, phase)));

    std::string responses;
    for (size_t i = 0; i < candidates.size(); ++i) {
        responses += std::to_string(i + 1) + ". " + candidates[i] + "\n";
    }
    std::string prompt = catalogs_.prompts.render(
        "response_rank", {{"goal", profile_.goal},
                          {"behavior", profile_.behavior},
                          {"conversation", render_context(context)},
                          {"responses", responses},
                          {"principles", catalogs_.mi_principles}});
    ChatRequest req = ChatRequest::single("rank", std::move(prompt), config_.sampling);
    std::string rank_text = backend.complete(req).text;

    static const std::vector<std::string> id_tokens = {"1",   "2",   "3",     "one",
                                                       "two", "three", "first", "second",
                                                       "third"};
    auto idx = last_name_in_text(rank_text, id_tokens);
    if (!idx) {
        note("generate_and_rank: no candidate ID parsed, using concatenated candidate");
        return candidates.back();
    }
    size_t candidate = *idx % 3;  // token groups of three map onto ids 1..3
    if (candidate >= candidates.size()) candidate = candidates.size() - 1;
    return candidates[candidate];
}

std::pair<Utterance, CounselorTurnState> Counselor::next_turn(
    Backend& backend, const std::vector<Utterance>& context, CounselorTurnState state) {
    const int turn_index = static_cast<int>(context.size()) + 1;
    const std::string context_text = render_context(context);

    ChangeState inferred = ChangeState::Precontemplation;
    if (config_.use_state_inference) inferred = infer_state(backend, context_text);
    state.inferred_state = inferred;

    std::optional<NavigationOp> op_taken;
    if (config_.use_topic_exploration) {
        if (state.phase == EngagementPhase::InitialEngagement) {
            try {
                state.superclass_probs = init_topic_probs(backend, context_text);
            } catch (const TopicProbParseError& e) {
                note(std::string("init_topic_probs: ") + e.what());
            }
            bool was_initial = true;
            state = maybe_enter_focused(state, config_, turn_index, tree_.roots());
            if (was_initial && state.phase == EngagementPhase::FocusedEngagement) {
                op_taken = NavigationOp::Init;
            }
        }
        if (state.phase == EngagementPhase::FocusedEngagement && state.current_topic) {
            auto nav = navigate(backend, state.exploration_path, *state.current_topic,
                                context_text, inferred);
            if (nav.op != NavigationOp::Hold && nav.next_topic) {
                state.current_topic = nav.next_topic;
                state.exploration_path.steps.push_back({*nav.next_topic, nav.op});
                op_taken = nav.op;
            } else if (!op_taken) {
                op_taken = NavigationOp::Hold;
            }
        }
    }

    std::vector<MIStrategy> strategies;
    std::string text;
    if (config_.use_strategies) {
        const std::string topic_label =
            state.current_topic ? *state.current_topic : std::string("(no specific topic)");
        strategies = select_strategies(backend, context_text, inferred, topic_label);
        text = generate_and_rank(backend, context, inferred, state.current_topic, strategies);
    } else {
        text = generate_once(backend, context, "");
    }

    Utterance u;
    u.index = turn_index;
    u.speaker = Speaker::Counselor;
    u.text = text;
    if (config_.use_state_inference) u.annotations.inferred_state = inferred;
    if (config_.use_topic_exploration) {
        u.annotations.counselor_topic = state.current_topic;
        u.annotations.navigation_op = op_taken;
    }
    if (config_.use_strategies) u.annotations.strategies = strategies;
    return {std::move(u), std::move(state)};
}

}  // namespace cami
