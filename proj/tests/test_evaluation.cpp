#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace cami;
using cami::testing::coded_transcript;
using cami::testing::demo_profile;
using cami::testing::shared_catalogs;
using cami::testing::shared_tree;

namespace {

SessionTranscript two_turn_transcript(const std::string& counselor_text) {
    SessionTranscript t;
    t.session_id = "annot";
    t.profile_id = "smoking_parent";
    t.counselor_config_id = "cami";
    t.termination = Termination::ExplicitEnd;
    t.utterances = {{1, Speaker::Counselor, counselor_text, {}},
                    {2, Speaker::Client, "Okay.", {}}};
    return t;
}

}  // namespace

TEST_CASE("annotation assigns the judged code") {
    SessionTranscript t;
    t.session_id = "annot";
    t.profile_id = "smoking_parent";
    t.counselor_config_id = "cami";
    t.termination = Termination::ExplicitEnd;
    t.utterances = {{1, Speaker::Counselor, kCounselorOpener, {}},
                    {2, Speaker::Client, kClientOpener, {}},
                    {3, Speaker::Counselor, "Did you use heroin this week?", {}},
                    {4, Speaker::Client, "No, not this week.", {}}};

    LlmCodeProposer proposer(shared_catalogs());
    ScriptedBackend backend(
        {{ScriptMatch::ByTag, "annotate_propose",
          "1. Filter\n2. Facilitate\n3. Support\n4. Inform\n5. Structure"},
         {ScriptMatch::ByTag, "annotate_judge", "A greeting: Filter."},
         {ScriptMatch::ByTag, "annotate_propose",
          "1. Closed Question\n2. Open Question\n3. Facilitate\n4. Inform\n5. Structure"},
         {ScriptMatch::ByTag, "annotate_judge", "This is a Closed Question."}});
    auto annotated = annotate_behavior(backend, proposer, shared_catalogs(), t);
    CHECK(annotated.utterances[0].annotations.behavior_code == BehaviorCode::Filter);
    CHECK(annotated.utterances[2].annotations.behavior_code == BehaviorCode::ClosedQuestion);
    CHECK(validate_transcript(annotated, shared_tree()).empty());
}

TEST_CASE("judge picks outside the candidates fall back to rank-1") {
    auto t = two_turn_transcript("You could try a short walk after meals.");
    LlmCodeProposer proposer(shared_catalogs());
    Diagnostics diag;
    ScriptedBackend backend(
        {{ScriptMatch::ByTag, "annotate_propose",
          "Advise without Permission\nAdvise with Permission\nInform\nDirect\nWarn"},
         {ScriptMatch::ByTag, "annotate_judge", "I would call this Affirm."}});
    auto annotated = annotate_behavior(backend, proposer, shared_catalogs(), t, &diag);
    CHECK(annotated.utterances[0].annotations.behavior_code ==
          BehaviorCode::AdviseWithoutPermission);
    CHECK(!diag.entries.empty());
}

TEST_CASE("unparseable judge output degrades to Filter") {
    auto t = two_turn_transcript("Good morning!");
    LlmCodeProposer proposer(shared_catalogs());
    ScriptedBackend backend({{ScriptMatch::ByTag, "annotate_propose",
                              "Facilitate\nSupport\nInform\nStructure\nAffirm"},
                             {ScriptMatch::ByTag, "annotate_judge", "none of the above"}});
    auto annotated = annotate_behavior(backend, proposer, shared_catalogs(), t);
    CHECK(annotated.utterances[0].annotations.behavior_code == BehaviorCode::Filter);
}

TEST_CASE("sidecar proposers align by counselor utterance count") {
    auto t = two_turn_transcript("How do you feel about that?");
    auto aligned = SidecarCodeProposer::from_json(R"([["Open Question", "Closed Question",
        "Facilitate", "Inform", "Support"]])");
    ScriptedBackend backend({{ScriptMatch::ByTag, "annotate_judge", "Open Question"}});
    auto annotated = annotate_behavior(backend, aligned, shared_catalogs(), t);
    CHECK(annotated.utterances[0].annotations.behavior_code == BehaviorCode::OpenQuestion);

    auto misaligned = SidecarCodeProposer::from_json(
        R"([["Open Question"], ["Closed Question"]])");
    ScriptedBackend unused({});
    CHECK_THROWS_AS(annotate_behavior(unused, misaligned, shared_catalogs(), t),
                    AnnotationAlignmentError);
}

TEST_CASE("behavior counts aggregate codes and words") {
    auto t = coded_transcript(
        "p1",
        {BehaviorCode::OpenQuestion, BehaviorCode::SimpleReflection,
         BehaviorCode::ComplexReflection, BehaviorCode::Affirm, BehaviorCode::Direct},
        "a b c", "d e");
    auto counts = behavior_counts(t);
    CHECK(counts.reflections_simple == 1);
    CHECK(counts.reflections_complex == 1);
    CHECK(counts.open_q == 1);
    CHECK(counts.closed_q == 0);
    CHECK(counts.mi_consistent == 1);
    CHECK(counts.mi_inconsistent == 1);
    // 4 filler counselor lines of 3 words plus the 4-word opener
    CHECK(counts.counselor_words == 4 + 4 * 3);
    CHECK(counts.client_words == 6 + 4 * 2);
}

TEST_CASE("behavior counts on an empty session are zero") {
    SessionTranscript t;
    t.termination = Termination::ExplicitEnd;
    auto counts = behavior_counts(t);
    CHECK(counts.reflections_simple == 0);
    CHECK(counts.counselor_words == 0);
    CHECK(counts.client_words == 0);
}

TEST_CASE("ratios follow their definitions with division guards") {
    BehaviorCounts c;
    c.reflections_simple = 1;
    c.reflections_complex = 1;
    c.open_q = 1;
    c.closed_q = 0;
    c.mi_consistent = 1;
    c.mi_inconsistent = 0;
    c.counselor_words = 30;
    c.client_words = 70;
    auto r = miti_ratios(c);
    CHECK(*r.rq == doctest::Approx(2.0));
    CHECK(*r.oq_pct == doctest::Approx(100.0));
    CHECK(*r.cr_pct == doctest::Approx(50.0));
    CHECK(*r.mic_pct == doctest::Approx(100.0));
    CHECK(*r.ttt_pct == doctest::Approx(30.0));
    CHECK(r.proficiency.at("rq") == Proficiency::Proficient);  // 2.0 is not > 2.0
    CHECK(r.proficiency.at("oq") == Proficiency::Expert);
    CHECK(r.proficiency.at("cr") == Proficiency::Proficient);  // 50 is not > 50
    CHECK(r.proficiency.at("mic") == Proficiency::Expert);
    CHECK(r.proficiency.at("ttt") == Proficiency::Expert);

    BehaviorCounts no_questions;
    no_questions.reflections_simple = 2;
    no_questions.counselor_words = 5;
    no_questions.client_words = 5;
    auto r2 = miti_ratios(no_questions);
    CHECK_FALSE(r2.rq.has_value());
    CHECK_FALSE(r2.oq_pct.has_value());
    CHECK(r2.cr_pct == doctest::Approx(0.0));
    CHECK_FALSE(r2.mic_pct.has_value());
}

TEST_CASE("the published human high-quality row classifies as expected") {
    CHECK(classify_rq(1.28) == Proficiency::Proficient);
    CHECK(classify_oq(52.1) == Proficiency::Proficient);
    CHECK(classify_cr(51.4) == Proficiency::Expert);
    CHECK(classify_mic(82.4) == Proficiency::Proficient);
    CHECK(classify_ttt(53.4) == Proficiency::Proficient);
}

TEST_CASE("threshold boundaries classify one level below") {
    CHECK(classify_rq(2.0) == Proficiency::Proficient);
    CHECK(classify_rq(1.0) == Proficiency::Below);
    CHECK(classify_oq(70.0) == Proficiency::Proficient);
    CHECK(classify_oq(50.0) == Proficiency::Below);
    CHECK(classify_cr(50.0) == Proficiency::Proficient);
    CHECK(classify_cr(40.0) == Proficiency::Below);
    CHECK(classify_mic(90.0) == Proficiency::Proficient);
    CHECK(classify_mic(80.0) == Proficiency::Below);
    CHECK(classify_ttt(50.0) == Proficiency::Proficient);
    CHECK(classify_ttt(60.0) == Proficiency::Below);
}

TEST_CASE("global scores parse, clamp and mark absences") {
    auto t = coded_transcript("p1", {BehaviorCode::OpenQuestion}, "one two", "three");
    ScriptedBackend backend({{ScriptMatch::ByTag, "global_cultivating", "4"},
                             {ScriptMatch::ByTag, "global_softening", "7"},
                             {ScriptMatch::ByTag, "global_partnership",
                              "I would settle on a rating of 3 out of 5 overall."},
                             {ScriptMatch::ByTag, "global_empathy", "hard to judge"}});
    Diagnostics diag;
    auto g = global_scores(backend, shared_catalogs(), t, &diag);
    CHECK(g.cultivating == 4);
    CHECK(g.softening == 5);  // clamped
    CHECK(g.partnership == 3);
    CHECK_FALSE(g.empathy.has_value());
    CHECK(diag.entries.size() >= 2);
}

TEST_CASE("success metrics average profiles first") {
    auto health = demo_profile();
    health.id = "health_profile";
    health.motivation_topic_path = {"Health", "Diseases", "Asthma"};
    auto law = demo_profile();
    law.id = "law_profile";
    law.motivation_topic_path = {"Law", "Criminal Law", "Arrest"};

    std::vector<SessionTranscript> transcripts;
    for (int i = 0; i < 5; ++i) {
        auto t = coded_transcript("health_profile", {BehaviorCode::OpenQuestion}, "a", "b",
                                  Termination::ClientMotivated);
        t.session_id = "h" + std::to_string(i);
        transcripts.push_back(t);
        auto u = coded_transcript("law_profile", {BehaviorCode::OpenQuestion}, "a", "b",
                                  Termination::ExplicitEnd);
        u.session_id = "l" + std::to_string(i);
        transcripts.push_back(u);
    }
    auto report = success_metrics(transcripts, {health, law});
    CHECK(report.per_superclass.at("Health") == doctest::Approx(1.0));
    CHECK(report.per_superclass.at("Law") == doctest::Approx(0.0));
    CHECK(*report.overall == doctest::Approx(0.5));
    CHECK(report.per_superclass.count("Economy") == 0);  // absent group stays absent
    CHECK(report.sessions_per_superclass.at("Health") == 5);
}

TEST_CASE("exploration focus averages judged distances") {
    auto t = coded_transcript("smoking_parent",
                              {BehaviorCode::OpenQuestion, BehaviorCode::Inform,
                               BehaviorCode::Support, BehaviorCode::Affirm,
                               BehaviorCode::Inform, BehaviorCode::OpenQuestion},
                              "talking", "listening");
    ScriptedBackend backend({{ScriptMatch::ByTag, "foc_judge", "3"},
                             {ScriptMatch::ByTag, "foc_judge", "3"},
                             {ScriptMatch::ByTag, "foc_judge", "2"},
                             {ScriptMatch::ByTag, "foc_judge", "1"},
                             {ScriptMatch::ByTag, "foc_judge", "0"},
                             {ScriptMatch::ByTag, "foc_judge", "0"}});
    auto foc = exploration_focus(backend, shared_catalogs(), shared_tree(), t,
                                 demo_profile());
    CHECK(*foc.mean == doctest::Approx(1.5));
    CHECK(foc.judged == 6);
    CHECK(foc.excluded == 0);

    ScriptedBackend zeros({{ScriptMatch::ByTag, "foc_judge", "0"},
                           {ScriptMatch::ByTag, "foc_judge", "0"},
                           {ScriptMatch::ByTag, "foc_judge", "0"},
                           {ScriptMatch::ByTag, "foc_judge", "0"},
                           {ScriptMatch::ByTag, "foc_judge", "0"},
                           {ScriptMatch::ByTag, "foc_judge", "0"}});
    auto flat = exploration_focus(zeros, shared_catalogs(), shared_tree(), t,
                                  demo_profile());
    CHECK(*flat.mean == doctest::Approx(0.0));

    Diagnostics diag;
    ScriptedBackend partial({{ScriptMatch::ByTag, "foc_judge", "2"},
                             {ScriptMatch::ByTag, "foc_judge", "no digits"},
                             {ScriptMatch::ByTag, "foc_judge", "2"},
                             {ScriptMatch::ByTag, "foc_judge", "2"},
                             {ScriptMatch::ByTag, "foc_judge", "2"},
                             {ScriptMatch::ByTag, "foc_judge", "2"}});
    auto skipped = exploration_focus(partial, shared_catalogs(), shared_tree(), t,
                                     demo_profile(), &diag);
    CHECK(skipped.judged == 5);
    CHECK(skipped.excluded == 1);
    CHECK(*skipped.mean == doctest::Approx(2.0));
}

TEST_CASE("inference accuracies align counselor inference with the next client state") {
    SessionTranscript t;
    t.session_id = "acc";
    t.profile_id = "smoking_parent";
    t.termination = Termination::ExplicitEnd;
    auto add = [&](Speaker s, int idx) {
        Utterance u;
        u.index = idx;
        u.speaker = s;
        u.text = "line";
        t.utterances.push_back(u);
        return &t.utterances.back();
    };
    // Four counselor/client exchanges; three inferences match, one does not.
    struct Row {
        ChangeState inferred, truth;
        const char* topic;
        int judged;
    };
    std::vector<Row> rows = {
        {ChangeState::Precontemplation, ChangeState::Precontemplation, "Habituation", 0},
        {ChangeState::Precontemplation, ChangeState::Contemplation, "Paternal Bond", 1},
        {ChangeState::Contemplation, ChangeState::Contemplation, "Depression", 3},
        {ChangeState::Contemplation, ChangeState::Contemplation, "Parenting", 2},
    };
    int idx = 1;
    for (const auto& row : rows) {
        auto* c = add(Speaker::Counselor, idx++);
        c->annotations.inferred_state = row.inferred;
        c->annotations.counselor_topic = row.topic;
        auto* r = add(Speaker::Client, idx++);
        r->annotations.true_state = row.truth;
        r->annotations.engagement_distance = row.judged;
    }
    auto report = inference_accuracies({t}, {demo_profile()}, shared_tree());
    CHECK(report.state_covered == 4);
    CHECK(*report.state_accuracy == doctest::Approx(0.75));
    // Structural distances: Habituation 0, Paternal Bond 1, Depression 3,
    // Parenting 1 (client judged 2) -> 3 of 4 agree.
    CHECK(report.topic_covered == 4);
    CHECK(*report.topic_decipher_accuracy == doctest::Approx(0.75));
}

TEST_CASE("coverage rules exclude unannotated turns") {
    SessionTranscript t;
    t.session_id = "cov";
    t.profile_id = "smoking_parent";
    t.termination = Termination::ExplicitEnd;
    Utterance c1{1, Speaker::Counselor, "x", {}};  // no inferred state, no topic
    Utterance r1{2, Speaker::Client, "y", {}};
    r1.annotations.true_state = ChangeState::Precontemplation;
    r1.annotations.engagement_distance = 2;
    t.utterances = {c1, r1};
    auto report = inference_accuracies({t}, {demo_profile()}, shared_tree());
    CHECK(report.state_covered == 0);
    CHECK_FALSE(report.state_accuracy.has_value());
    CHECK(report.topic_covered == 0);  // counselor topic absent -> excluded
}

TEST_CASE("two-stage averaging follows the profile-first protocol") {
    CHECK(*two_stage_mean({{1.0, 3.0}, {2.0, 2.0}}) == doctest::Approx(2.0));
    // Absent sessions drop out; profiles with no usable sessions drop out too.
    CHECK(*two_stage_mean({{std::nullopt, 4.0}, {std::nullopt}}) == doctest::Approx(4.0));
    CHECK_FALSE(two_stage_mean({{std::nullopt}}).has_value());

    // Equal session counts: two-stage equals flat; unequal: profile-weighted.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    for (int round = 0; round < 200; ++round) {
        size_t profiles = 2 + rng() % 4;
        size_t sessions = 1 + rng() % 4;
        std::vector<std::vector<std::optional<double>>> grid(profiles);
        double flat_sum = 0.0;
        for (auto& row : grid) {
            for (size_t s = 0; s < sessions; ++s) {
                double v = value(rng);
                row.push_back(v);
                flat_sum += v;
            }
        }
        double flat = flat_sum / (profiles * sessions);
        CHECK(*two_stage_mean(grid) == doctest::Approx(flat).epsilon(1e-12));
    }
    // A concrete unequal-count case where the two disagree.
    auto unequal = two_stage_mean({{0.0}, {10.0, 10.0, 10.0}});
    CHECK(*unequal == doctest::Approx(5.0));  // flat mean would be 7.5
}

TEST_CASE("reports aggregate session metrics per profile") {
    auto p1 = demo_profile();
    p1.id = "p1";
    auto p2 = demo_profile();
    p2.id = "p2";
    p2.motivation_topic_path = {"Health", "Diseases", "Asthma"};

    std::vector<SessionTranscript> transcripts;
    std::vector<SessionMetrics> metrics;
    auto push = [&](const std::string& profile, double rq, Termination term) {
        auto t = coded_transcript(profile, {BehaviorCode::OpenQuestion}, "w", "w", term);
        t.session_id = profile + "-" + std::to_string(metrics.size());
        transcripts.push_back(t);
        SessionMetrics m;
        m.profile_id = profile;
        m.ratios.rq = rq;
        m.globals.cultivating = 4;
        m.foc.mean = 1.0;
        metrics.push_back(m);
    };
    push("p1", 1.0, Termination::ClientMotivated);
    push("p1", 3.0, Termination::ClientMotivated);
    push("p2", 2.0, Termination::ExplicitEnd);
    push("p2", 2.0, Termination::ExplicitEnd);

    auto report = build_report("cami", {p1, p2}, transcripts, metrics, shared_tree());
    CHECK(*report.overall_ratios.rq == doctest::Approx(2.0));
    CHECK(*report.cultivating == doctest::Approx(4.0));
    CHECK(*report.success.overall == doctest::Approx(0.5));
    CHECK(*report.foc_mean == doctest::Approx(1.0));
    CHECK(report.sessions == 4);
    CHECK(report.profiles == 2);

    auto json_text = report.to_json();
    CHECK(json_text.find("\"rq\": 2.0") != std::string::npos);
    auto tables = report.render_tables();
    CHECK(tables.find(">2.0") != std::string::npos);  // threshold header row
    CHECK(tables.find("Expert") != std::string::npos);
    CHECK(tables.find("cami") != std::string::npos);
}

TEST_CASE("a singleton batch reports that session's metrics") {
    auto p = demo_profile();
    p.id = "solo";
    auto t = coded_transcript("solo", {BehaviorCode::OpenQuestion}, "w", "w",
                              Termination::ClientMotivated);
    SessionMetrics m;
    m.profile_id = "solo";
    m.ratios.rq = 1.25;
    m.ratios.oq_pct = 80.0;
    m.globals.empathy = 5;
    m.foc.mean = 0.5;
    auto report = build_report("cos", {p}, {t}, {m}, shared_tree());
    CHECK(*report.overall_ratios.rq == doctest::Approx(1.25));
    CHECK(*report.overall_ratios.oq_pct == doctest::Approx(80.0));
    CHECK(*report.empathy == doctest::Approx(5.0));
    CHECK(*report.foc_mean == doctest::Approx(0.5));
    CHECK(*report.success.overall == doctest::Approx(1.0));
}
