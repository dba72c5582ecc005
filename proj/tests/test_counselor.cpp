#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"

using namespace cami;
using cami::testing::demo_profile;
using cami::testing::shared_catalogs;
using cami::testing::shared_tree;
using cami::testing::tag_counts;

namespace {

Counselor make_counselor(const CounselorConfig& cfg, Diagnostics* diag = nullptr) {
    return Counselor(shared_catalogs(), shared_tree(), cfg, demo_profile(), diag);
}

std::vector<Utterance> opening_context() {
    return {{1, Speaker::Counselor, kCounselorOpener, {}},
            {2, Speaker::Client, kClientOpener, {}}};
}

}  // namespace

TEST_CASE("infer_state parses the closing sentence") {
    auto counselor = make_counselor(CounselorConfig::preset("cami"));

    ScriptedBackend ok({{ScriptMatch::Next, "",
                         "The client is weighing options. Therefore, the client's current "
                         "state in the above context is Contemplation."}});
    CHECK(counselor.infer_state(ok, "ctx") == ChangeState::Contemplation);

    Diagnostics diag;
    auto noisy = make_counselor(CounselorConfig::preset("cami"), &diag);
    ScriptedBackend no_pattern({{ScriptMatch::Next, "", "The client seems hesitant."}});
    CHECK(noisy.infer_state(no_pattern, "ctx") == ChangeState::Precontemplation);
    CHECK(!diag.entries.empty());

    ScriptedBackend two_states(
        {{ScriptMatch::Next, "",
          "Therefore, the client's current state in the above context is either "
          "Contemplation or, more likely, Preparation."}});
    CHECK(counselor.infer_state(two_states, "ctx") == ChangeState::Preparation);
}

TEST_CASE("init_topic_probs parses, renormalizes and rescales percent-style values") {
    auto counselor = make_counselor(CounselorConfig::preset("cami"));

    ScriptedBackend exact({{ScriptMatch::Next, "",
                            R"({"Health": 0.3, "Economy": 0.2, "Interpersonal Relationships": 0.2, "Law": 0.1, "Education": 0.2})"}});
    auto probs = counselor.init_topic_probs(exact, "ctx");
    CHECK(probs["Health"] == doctest::Approx(0.3));
    CHECK(probs["Law"] == doctest::Approx(0.1));

    ScriptedBackend missing({{ScriptMatch::Next, "",
                              R"({"Health": 0.3, "Economy": 0.2, "Interpersonal Relationships": 0.2, "Education": 0.2})"}});
    probs = counselor.init_topic_probs(missing, "ctx");
    CHECK(probs["Law"] == doctest::Approx(0.0));
    CHECK(probs["Health"] == doctest::Approx(0.3 / 0.9));

    ScriptedBackend percent({{ScriptMatch::Next, "",
                              R"({"Health": 40, "Economy": 20, "Interpersonal Relationships": 20, "Law": 10, "Education": 10})"}});
    probs = counselor.init_topic_probs(percent, "ctx");
    CHECK(probs["Health"] == doctest::Approx(0.4));

    ScriptedBackend none({{ScriptMatch::Next, "", "no json at all"}});
    CHECK_THROWS_AS(counselor.init_topic_probs(none, "ctx"), TopicProbParseError);

    ScriptedBackend zeros({{ScriptMatch::Next, "", R"({"Health": 0, "Law": 0})"}});
    CHECK_THROWS_AS(counselor.init_topic_probs(zeros, "ctx"), TopicProbParseError);
}

TEST_CASE("maybe_enter_focused fires on probability or turn count") {
    CounselorConfig cfg = CounselorConfig::preset("cami");
    const auto& roots = shared_tree().roots();

    CounselorTurnState st;
    st.superclass_probs = {{"Health", 0.5}, {"Economy", 0.125}, {"Law", 0.125},
                           {"Education", 0.125}, {"Interpersonal Relationships", 0.125}};
    auto moved = maybe_enter_focused(st, cfg, 3, roots);
    CHECK(moved.phase == EngagementPhase::FocusedEngagement);
    CHECK(moved.current_topic == std::string("Health"));
    REQUIRE(moved.exploration_path.steps.size() == 1);
    CHECK(moved.exploration_path.steps[0].op == NavigationOp::Init);

    CounselorTurnState flat;
    for (const auto& r : roots) flat.superclass_probs[r] = 0.2;
    auto stay = maybe_enter_focused(flat, cfg, 5, roots);
    CHECK(stay.phase == EngagementPhase::InitialEngagement);
    CHECK_FALSE(stay.current_topic.has_value());

    auto by_turn = maybe_enter_focused(flat, cfg, 6, roots);
    CHECK(by_turn.phase == EngagementPhase::FocusedEngagement);
    CHECK(by_turn.current_topic == std::string(roots[0]));  // tie -> first root
}

TEST_CASE("maybe_enter_focused is strict at the threshold and monotone") {
    CounselorConfig cfg = CounselorConfig::preset("cami");
    const auto& roots = shared_tree().roots();

    CounselorTurnState at_threshold;
    at_threshold.superclass_probs = {{"Health", 0.40}};
    CHECK(maybe_enter_focused(at_threshold, cfg, 3, roots).phase ==
          EngagementPhase::InitialEngagement);
    at_threshold.superclass_probs = {{"Health", 0.400001}};
    CHECK(maybe_enter_focused(at_threshold, cfg, 3, roots).phase ==
          EngagementPhase::FocusedEngagement);

    CounselorTurnState focused;
    focused.phase = EngagementPhase::FocusedEngagement;
    focused.current_topic = "Parenting";
    auto still = maybe_enter_focused(focused, cfg, 2, roots);
    CHECK(still.phase == EngagementPhase::FocusedEngagement);
    CHECK(still.current_topic == std::string("Parenting"));
}

TEST_CASE("navigate runs the two-stage selection") {
    auto counselor = make_counselor(CounselorConfig::preset("cami"));
    ExplorationPath path;
    path.steps = {{"Interpersonal Relationships", NavigationOp::Init}};

    ScriptedBackend into({{ScriptMatch::Next, "", "The client warms to this. Step Into."},
                          {ScriptMatch::Next, "", "I would pick Parenting next."}});
    auto nav = counselor.navigate(into, path, "Interpersonal Relationships", "ctx",
                                  ChangeState::Precontemplation);
    CHECK(nav.op == NavigationOp::StepInto);
    CHECK(nav.next_topic == std::string("Parenting"));
    CHECK_FALSE(nav.fallback_used);

    // Leaves have no children: Step Into degrades to Hold with one call only.
    ScriptedBackend leaf({{ScriptMatch::Next, "", "Step Into."}});
    auto held = counselor.navigate(leaf, path, "Habituation", "ctx",
                                   ChangeState::Precontemplation);
    CHECK(held.op == NavigationOp::Hold);
    CHECK(leaf.remaining() == 0);

    Diagnostics diag;
    auto with_diag = make_counselor(CounselorConfig::preset("cami"), &diag);
    ScriptedBackend mismatch(
        {{ScriptMatch::Next, "", "Switch."},
         {ScriptMatch::Next, "", "Let us try Depression, it feels relevant."}});
    auto fallback = with_diag.navigate(mismatch, path, "Paternal Bond", "ctx",
                                       ChangeState::Contemplation);
    CHECK(fallback.op == NavigationOp::Switch);
    CHECK(fallback.next_topic ==
          std::string(shared_tree().candidates("Paternal Bond", NavigationOp::Switch)[0]));
    CHECK(fallback.fallback_used);
    CHECK(!diag.entries.empty());

    ScriptedBackend no_keyword({{ScriptMatch::Next, "", "Just keep the current course."}});
    auto hold = counselor.navigate(no_keyword, path, "Parenting", "ctx",
                                   ChangeState::Contemplation);
    CHECK(hold.op == NavigationOp::Hold);
}

TEST_CASE("navigate keyword precedence avoids substring traps") {
    auto counselor = make_counselor(CounselorConfig::preset("cami"));
    ExplorationPath path;
    // "step out" must not be shadowed when other candidate words appear later.
    ScriptedBackend out({{ScriptMatch::Next, "",
                          "Rather than switch topics, I would step out to the parent."},
                         {ScriptMatch::Next, "", "Parenting"}});
    auto nav =
        counselor.navigate(out, path, "Habituation", "ctx", ChangeState::Contemplation);
    CHECK(nav.op == NavigationOp::StepOut);
    CHECK(nav.next_topic == std::string("Parenting"));
}

TEST_CASE("select_strategies parses catalog names in order") {
    auto counselor = make_counselor(CounselorConfig::preset("cami"));

    ScriptedBackend two({{ScriptMatch::Next, "",
                          "I would use Open Question and Complex Reflection here."}});
    auto s = counselor.select_strategies(two, "ctx", ChangeState::Precontemplation, "t");
    CHECK(s == std::vector<MIStrategy>{MIStrategy::OpenQuestion,
                                       MIStrategy::ComplexReflection});

    ScriptedBackend three({{ScriptMatch::Next, "",
                            "Affirm, then Open Question, and finally Support."}});
    s = counselor.select_strategies(three, "ctx", ChangeState::Contemplation, "t");
    CHECK(s == std::vector<MIStrategy>{MIStrategy::Affirm, MIStrategy::OpenQuestion});

    ScriptedBackend nothing({{ScriptMatch::Next, "", "reflect simply"}});
    s = counselor.select_strategies(nothing, "ctx", ChangeState::Contemplation, "t");
    CHECK(s == std::vector<MIStrategy>{MIStrategy::NoStrategy});
}

TEST_CASE("generate_and_rank covers single, ranked and fallback paths") {
    auto counselor = make_counselor(CounselorConfig::preset("cami"));
    auto context = opening_context();

    ScriptedBackend single({{ScriptMatch::Next, "",
                             "Counselor: You did well by seeking help."}});
    CHECK(counselor.generate_and_rank(single, context, ChangeState::Precontemplation,
                                      std::nullopt, {MIStrategy::Affirm}) ==
          "You did well by seeking help.");

    ScriptedBackend ranked({{ScriptMatch::Next, "", "Counselor: candidate one"},
                            {ScriptMatch::Next, "", "Counselor: candidate two"},
                            {ScriptMatch::Next, "", "Counselor: candidate three"},
                            {ScriptMatch::Next, "", "2"}});
    CHECK(counselor.generate_and_rank(ranked, context, ChangeState::Precontemplation,
                                      std::nullopt,
                                      {MIStrategy::OpenQuestion,
                                       MIStrategy::SimpleReflection}) == "candidate two");

    ScriptedBackend ordinal({{ScriptMatch::Next, "", "Counselor: candidate one"},
                             {ScriptMatch::Next, "", "Counselor: candidate two"},
                             {ScriptMatch::Next, "", "Counselor: candidate three"},
                             {ScriptMatch::Next, "", "the best is response three"}});
    CHECK(counselor.generate_and_rank(ordinal, context, ChangeState::Precontemplation,
                                      std::nullopt,
                                      {MIStrategy::OpenQuestion,
                                       MIStrategy::SimpleReflection}) == "candidate three");

    Diagnostics diag;
    auto with_diag = make_counselor(CounselorConfig::preset("cami"), &diag);
    ScriptedBackend unparseable({{ScriptMatch::Next, "", "Counselor: candidate one"},
                                 {ScriptMatch::Next, "", "Counselor: candidate two"},
                                 {ScriptMatch::Next, "", "Counselor: candidate three"},
                                 {ScriptMatch::Next, "", "hard to say"}});
    CHECK(with_diag.generate_and_rank(unparseable, context, ChangeState::Precontemplation,
                                      std::nullopt,
                                      {MIStrategy::OpenQuestion,
                                       MIStrategy::SimpleReflection}) == "candidate three");
    CHECK(!diag.entries.empty());
}

TEST_CASE("base preset spends exactly one call per turn") {
    auto counselor = make_counselor(CounselorConfig::preset("base"));
    std::vector<Exchange> log;
    ScriptedBackend scripted({{ScriptMatch::Next, "", "Counselor: plain reply"}});
    RecordingBackend recorder(scripted, log);

    auto [utterance, state] =
        counselor.next_turn(recorder, opening_context(), CounselorTurnState{});
    CHECK(utterance.text == "plain reply");
    CHECK(log.size() == 1);
    CHECK(log[0].tag == "generate");
    CHECK_FALSE(utterance.annotations.inferred_state.has_value());
    CHECK_FALSE(utterance.annotations.strategies.has_value());
}

TEST_CASE("focused cami turn with two strategies uses exactly eight calls") {
    auto counselor = make_counselor(CounselorConfig::preset("cami"));
    std::vector<Exchange> log;
    ScriptedBackend scripted(
        {{ScriptMatch::Next, "",
          "Therefore, the client's current state in the above context is Contemplation."},
         {ScriptMatch::Next, "", "Step Into."},
         {ScriptMatch::Next, "", "Paternal Bond"},
         {ScriptMatch::Next, "", "Open Question and Complex Reflection."},
         {ScriptMatch::Next, "", "Counselor: c1"},
         {ScriptMatch::Next, "", "Counselor: c2"},
         {ScriptMatch::Next, "", "Counselor: c3"},
         {ScriptMatch::Next, "", "1"}});
    RecordingBackend recorder(scripted, log);

    CounselorTurnState focused;
    focused.phase = EngagementPhase::FocusedEngagement;
    focused.current_topic = "Parenting";
    focused.exploration_path.steps = {{"Interpersonal Relationships", NavigationOp::Init},
                                      {"Parenting", NavigationOp::StepInto}};

    auto context = opening_context();
    context.push_back({3, Speaker::Counselor, "How is family time lately?", {}});
    context.push_back({4, Speaker::Client, "We spend weekends together.", {}});

    auto [utterance, state] = counselor.next_turn(recorder, context, focused);
    CHECK(log.size() == 8);
    auto counts = tag_counts(log);
    CHECK(counts["state_inference"] == 1);
    CHECK(counts["navigate_op"] == 1);
    CHECK(counts["navigate_topic"] == 1);
    CHECK(counts["strategy_selection"] == 1);
    CHECK(counts["generate"] == 3);
    CHECK(counts["rank"] == 1);
    CHECK(utterance.annotations.counselor_topic == std::string("Paternal Bond"));
    CHECK(utterance.annotations.navigation_op == NavigationOp::StepInto);
    CHECK(state.exploration_path.consistent_with(shared_tree(), state.current_topic));
}

TEST_CASE("ablation presets use nested tag sets") {
    auto run_preset = [&](const std::string& preset) {
        auto counselor = make_counselor(CounselorConfig::preset(preset));
        std::vector<Exchange> log;
        // Generous tag-matched script: every preset consumes only what it needs.
        ScriptedBackend scripted(
            {{ScriptMatch::ByTag, "state_inference",
              "Therefore, the client's current state in the above context is "
              "Precontemplation."},
             {ScriptMatch::ByTag, "topic_init", R"({"Health": 0.9, "Law": 0.1})"},
             {ScriptMatch::ByTag, "navigate_op", "Step Into."},
             {ScriptMatch::ByTag, "navigate_topic", "Diseases"},
             {ScriptMatch::ByTag, "strategy_selection",
              "Open Question and Complex Reflection."},
             {ScriptMatch::ByTag, "generate", "Counselor: g1"},
             {ScriptMatch::ByTag, "generate", "Counselor: g2"},
             {ScriptMatch::ByTag, "generate", "Counselor: g3"},
             {ScriptMatch::ByTag, "rank", "1"}});
        RecordingBackend recorder(scripted, log);
        auto context = opening_context();
        context.push_back({3, Speaker::Counselor, "Tell me more?", {}});
        context.push_back({4, Speaker::Client, "Work has been stressful.", {}});
        counselor.next_turn(recorder, context, CounselorTurnState{});
        std::set<std::string> tags;
        for (const auto& e : log) tags.insert(e.tag);
        return tags;
    };

    auto base = run_preset("base");
    auto cos = run_preset("cos");
    auto cami_te = run_preset("cami-te");
    auto cami = run_preset("cami");

    auto strict_subset = [](const std::set<std::string>& a, const std::set<std::string>& b) {
        return a.size() < b.size() &&
               std::includes(b.begin(), b.end(), a.begin(), a.end());
    };
    CHECK(strict_subset(base, cos));
    CHECK(strict_subset(cos, cami_te));
    CHECK(strict_subset(cami_te, cami));
}

TEST_CASE("turn-state probabilities survive a parse failure") {
    Diagnostics diag;
    auto counselor = make_counselor(CounselorConfig::preset("cami"), &diag);
    std::vector<Exchange> log;
    ScriptedBackend scripted(
        {{ScriptMatch::ByTag, "state_inference",
          "Therefore, the client's current state in the above context is Precontemplation."},
         {ScriptMatch::ByTag, "topic_init", "sorry, no probabilities today"},
         {ScriptMatch::ByTag, "strategy_selection", "Affirm."},
         {ScriptMatch::ByTag, "generate", "Counselor: okay"}});
    RecordingBackend recorder(scripted, log);
    auto [utterance, state] =
        counselor.next_turn(recorder, opening_context(), CounselorTurnState{});
    CHECK(state.phase == EngagementPhase::InitialEngagement);
    CHECK(utterance.text == "okay");
    CHECK(!diag.entries.empty());
}
