#include "support.hpp"

namespace cami::testing {

std::string data_dir() { return CAMI_DEFAULT_DATA_DIR; }

const Catalogs& shared_catalogs() {
    static const Catalogs catalogs = Catalogs::load(data_dir());
    return catalogs;
}

const TopicTree& shared_tree() {
    static const TopicTree tree = TopicTree::load_file(data_dir() + "/topic_tree.json");
    return tree;
}

ClientProfile demo_profile() {
    return load_profile_file(data_dir() + "/profiles/smoking_parent.json");
}

ScriptedBackend demo_script() {
    return ScriptedBackend::from_file(data_dir() + "/demo/demo.script");
}

const std::vector<std::string>& demo_texts() {
    static const std::vector<std::string> texts = {
        "Hello. How are you?",
        "I am good. What about you?",
        "I'm doing well, thanks for asking! Can you share how you've been feeling about "
        "your health lately, especially in relation to smoking?",
        "I've been pretty busy with work and juggling family stuff. Sometimes I just think "
        "about how nice it is to take a break with my coworkers outside, chatting and "
        "during those moments, life feels a bit more relaxed. You know how it "
        "is—it’s nice to unwind.",
        "It sounds like smoking is a comforting routine for you amidst your busy life with "
        "work and your daughter. I wonder how it might impact the time you spend with your "
        "family.",
        "I get what you mean, but I really don't see my smoking as an issue. It helps me "
        "manage stress, and I don’t think it affects my time with my daughter. We "
        "still have good moments together, and I wouldn't want to change that.",
        "It sounds like you find comfort in smoking to manage stress, and that feels "
        "crucial to your parenting now. I wonder, though, how you might feel if your "
        "daughter started to see smoking as a way to unwind, too. What impact would that "
        "have on your relationship with her?",
        "That’s a tough thought. I remember starting young and how hard it was to "
        "quit later. I wouldn’t want that for her. It makes me reflect on what "
        "I’m modeling.",
        "It's great that you're reflecting on your modeling for your daughter. Perhaps "
        "seeing smoking as something that may weaken your bond could help reshape how you "
        "approach stress—considering healthier ways to connect can actually "
        "strengthen your relationship and set a positive example for her.",
        "I appreciate that perspective. I do want to set a strong example for her. My "
        "experience with my own family and their struggles makes me cautious. I see the "
        "patterns and don’t want her to feel that smoking is a go-to solution for "
        "stress, like I did.",
        "It sounds like your family’s struggles have really shaped your perspective "
        "on smoking. You want to protect your daughter from those same patterns, knowing "
        "that smoking can not only impact her stress management but also her overall "
        "learning and adaptation to challenges. That’s a powerful motivation.",
        "Exactly. I want her to learn healthier coping strategies instead of following in "
        "my footsteps. I realize that I need to make a change for both our sakes. "
        "It’s not just about me; it’s about creating an environment where she "
        "can thrive without those habits. It's time to find better ways to manage stress "
        "that we can share together.",
    };
    return texts;
}

SessionSetup demo_setup(const CounselorConfig& counselor) {
    SessionSetup setup;
    setup.catalogs = &shared_catalogs();
    setup.tree = &shared_tree();
    setup.counselor = counselor;
    return setup;
}

std::map<std::string, int> tag_counts(const std::vector<Exchange>& log) {
    std::map<std::string, int> counts;
    for (const auto& e : log) counts[e.tag] += 1;
    return counts;
}

SessionTranscript filler_transcript(int utterances, Termination termination) {
    SessionTranscript t;
    t.session_id = "synthetic";
    t.profile_id = "smoking_parent";
    t.counselor_config_id = "cami";
    t.termination = termination;
    for (int i = 1; i <= utterances; ++i) {
        Utterance u;
        u.index = i;
        u.speaker = (i % 2 == 1) ? Speaker::Counselor : Speaker::Client;
        if (i == 1) u.text = kCounselorOpener;
        else if (i == 2) u.text = kClientOpener;
        else u.text = "filler line " + std::to_string(i);
        t.utterances.push_back(std::move(u));
    }
    return t;
}

SessionTranscript coded_transcript(const std::string& profile_id,
                                   const std::vector<BehaviorCode>& codes,
                                   const std::string& counselor_text,
                                   const std::string& client_text,
                                   Termination termination) {
    SessionTranscript t;
    t.session_id = profile_id + "-coded";
    t.profile_id = profile_id;
    t.counselor_config_id = "cami";
    t.termination = termination;
    int index = 1;
    for (size_t i = 0; i < codes.size(); ++i) {
        Utterance c;
        c.index = index++;
        c.speaker = Speaker::Counselor;
        c.text = (i == 0) ? kCounselorOpener : counselor_text;
        c.annotations.behavior_code = codes[i];
        t.utterances.push_back(std::move(c));

        Utterance r;
        r.index = index++;
        r.speaker = Speaker::Client;
        r.text = (i == 0) ? kClientOpener : client_text;
        t.utterances.push_back(std::move(r));
    }
    return t;
}

}  // namespace cami::testing
