#include "cami/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "cami/text.hpp"

namespace cami {

namespace {

std::vector<std::string> code_names() {
    std::vector<std::string> names;
    for (auto c : all_behavior_codes()) names.push_back(to_string(c));
    return names;
}

std::vector<size_t> counselor_indices(const SessionTranscript& t) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < t.utterances.size(); ++i) {
        if (t.utterances[i].speaker == Speaker::Counselor) idx.push_back(i);
    }
    return idx;
}

std::string fmt(std::optional<double> v, int precision = 2) {
    if (!v) return "--";
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << *v;
    return out.str();
}

}  // namespace

// --- proposers ---

std::vector<BehaviorCode> LlmCodeProposer::propose(Backend& backend,
                                                   const SessionTranscript& t,
                                                   size_t utterance_index) {
    const auto& utterance = t.utterances.at(utterance_index);
    std::vector<Utterance> before(t.utterances.begin(),
                                  t.utterances.begin() + utterance_index);
    std::string prompt = catalogs_.prompts.render(
        "miti_propose", {{"codes", catalogs_.codes_block(all_behavior_codes())},
                         {"context", render_context(before)},
                         {"utterance", utterance.text}});
    ChatRequest req = ChatRequest::single("annotate_propose", std::move(prompt));
    std::string text = backend.complete(req).text;

    std::vector<BehaviorCode> out;
    for (const auto& m : match_names_in_text(text, code_names())) {
        auto code = static_cast<BehaviorCode>(m.name_index);
        if (std::find(out.begin(), out.end(), code) == out.end()) out.push_back(code);
        if (out.size() == 5) break;
    }
    if (out.empty()) {
        if (diag_) diag_->note("propose: no code names in completion, proposing Filter");
        out.push_back(BehaviorCode::Filter);
    }
    return out;
}

SidecarCodeProposer SidecarCodeProposer::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sidecar file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

SidecarCodeProposer SidecarCodeProposer::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    SidecarCodeProposer p;
    auto parse_rows = [](const nlohmann::json& arr) {
        std::vector<std::vector<BehaviorCode>> rows;
        for (const auto& row : arr) {
            std::vector<BehaviorCode> codes;
            for (const auto& name : row) {
                codes.push_back(behavior_code_from_string(name.get<std::string>()));
            }
            rows.push_back(std::move(codes));
        }
        return rows;
    };
    if (doc.is_array()) {
        p.rows_[""] = parse_rows(doc);
    } else {
        for (const auto& [session_id, arr] : doc.items()) {
            p.rows_[session_id] = parse_rows(arr);
        }
    }
    return p;
}

const std::vector<std::vector<BehaviorCode>>* SidecarCodeProposer::rows_for(
    const SessionTranscript& t) const {
    auto it = rows_.find(t.session_id);
    if (it == rows_.end()) it = rows_.find("");
    if (it == rows_.end()) return nullptr;
    return &it->second;
}

void SidecarCodeProposer::check_alignment(const SessionTranscript& t) const {
    const auto* rows = rows_for(t);
    if (!rows) {
        throw AnnotationAlignmentError("sidecar has no rows for session " + t.session_id);
    }
    size_t counselor_turns = counselor_indices(t).size();
    if (rows->size() != counselor_turns) {
        throw AnnotationAlignmentError(
            "sidecar rows (" + std::to_string(rows->size()) + ") do not match counselor " +
            "utterances (" + std::to_string(counselor_turns) + ") in " + t.session_id);
    }
}

std::vector<BehaviorCode> SidecarCodeProposer::propose(Backend&, const SessionTranscript& t,
                                                       size_t utterance_index) {
    const auto* rows = rows_for(t);
    if (!rows) {
        throw AnnotationAlignmentError("sidecar has no rows for session " + t.session_id);
    }
    auto idx = counselor_indices(t);
    auto pos = std::find(idx.begin(), idx.end(), utterance_index);
    if (pos == idx.end() || static_cast<size_t>(pos - idx.begin()) >= rows->size()) {
        throw AnnotationAlignmentError("sidecar row missing for utterance " +
                                       std::to_string(utterance_index + 1));
    }
    return (*rows)[pos - idx.begin()];
}

// --- annotation ---

SessionTranscript annotate_behavior(Backend& backend, CodeProposer& proposer,
                                    const Catalogs& catalogs, SessionTranscript transcript,
                                    Diagnostics* diag) {
    proposer.check_alignment(transcript);
    for (size_t i : counselor_indices(transcript)) {
        auto candidates = proposer.propose(backend, transcript, i);
        if (candidates.empty()) candidates.push_back(BehaviorCode::Filter);
        if (candidates.size() > 5) candidates.resize(5);

        std::vector<Utterance> before(transcript.utterances.begin(),
                                      transcript.utterances.begin() + i);
        std::string prompt = catalogs.prompts.render(
            "miti_annotation", {{"codes", catalogs.codes_block(candidates)},
                                {"context", render_context(before)},
                                {"utterance", transcript.utterances[i].text}});
        ChatRequest req = ChatRequest::single("annotate_judge", std::move(prompt));
        std::string text = backend.complete(req).text;

        BehaviorCode final_code = BehaviorCode::Filter;
        auto idx = last_name_in_text(text, code_names());
        if (!idx) {
            if (diag) diag->note("annotate: judge named no code, using Filter");
        } else {
            auto named = static_cast<BehaviorCode>(*idx);
            if (std::find(candidates.begin(), candidates.end(), named) != candidates.end()) {
                final_code = named;
            } else {
                if (diag) {
                    diag->note("annotate: judge named a code outside the candidates, using "
                               "rank-1 proposal");
                }
                final_code = candidates.front();
            }
        }
        transcript.utterances[i].annotations.behavior_code = final_code;
    }
    return transcript;
}

// --- counts and ratios ---

bool is_mi_consistent(BehaviorCode c) {
    return c == BehaviorCode::AdviseWithPermission || c == BehaviorCode::Affirm ||
           c == BehaviorCode::EmphasizeControl || c == BehaviorCode::Support;
}

bool is_mi_inconsistent(BehaviorCode c) {
    return c == BehaviorCode::AdviseWithoutPermission || c == BehaviorCode::Confront ||
           c == BehaviorCode::Direct || c == BehaviorCode::Warn ||
           c == BehaviorCode::RaiseConcern;
}

BehaviorCounts behavior_counts(const SessionTranscript& t) {
    BehaviorCounts counts;
    for (const auto& u : t.utterances) {
        if (u.speaker == Speaker::Counselor) {
            counts.counselor_words += word_count(u.text);
            if (!u.annotations.behavior_code) {
                throw std::invalid_argument("behavior_counts: uncoded counselor utterance " +
                                            std::to_string(u.index));
            }
            BehaviorCode code = *u.annotations.behavior_code;
            switch (code) {
                case BehaviorCode::SimpleReflection: ++counts.reflections_simple; break;
                case BehaviorCode::ComplexReflection: ++counts.reflections_complex; break;
                case BehaviorCode::OpenQuestion: ++counts.open_q; break;
                case BehaviorCode::ClosedQuestion: ++counts.closed_q; break;
                default: break;
            }
            if (is_mi_consistent(code)) ++counts.mi_consistent;
            if (is_mi_inconsistent(code)) ++counts.mi_inconsistent;
        } else {
            counts.client_words += word_count(u.text);
        }
    }
    return counts;
}

Proficiency classify_rq(double v) {
    if (v > 2.0) return Proficiency::Expert;
    if (v > 1.0) return Proficiency::Proficient;
    return Proficiency::Below;
}
Proficiency classify_oq(double v) {
    if (v > 70.0) return Proficiency::Expert;
    if (v > 50.0) return Proficiency::Proficient;
    return Proficiency::Below;
}
Proficiency classify_cr(double v) {
    if (v > 50.0) return Proficiency::Expert;
    if (v > 40.0) return Proficiency::Proficient;
    return Proficiency::Below;
}
Proficiency classify_mic(double v) {
    if (v > 90.0) return Proficiency::Expert;
    if (v > 80.0) return Proficiency::Proficient;
    return Proficiency::Below;
}
Proficiency classify_ttt(double v) {
    if (v < 50.0) return Proficiency::Expert;
    if (v < 60.0) return Proficiency::Proficient;
    return Proficiency::Below;
}

std::string to_string(Proficiency p) {
    switch (p) {
        case Proficiency::Expert: return "Expert";
        case Proficiency::Proficient: return "Proficient";
        case Proficiency::Below: return "Below";
    }
    return "Below";
}

MitiRatios miti_ratios(const BehaviorCounts& c) {
    MitiRatios r;
    const int reflections = c.reflections_simple + c.reflections_complex;
    const int questions = c.open_q + c.closed_q;
    if (questions > 0) {
        r.rq = static_cast<double>(reflections) / questions;
        r.oq_pct = 100.0 * c.open_q / questions;
    }
    if (reflections > 0) r.cr_pct = 100.0 * c.reflections_complex / reflections;
    if (c.mi_consistent + c.mi_inconsistent > 0) {
        r.mic_pct = 100.0 * c.mi_consistent / (c.mi_consistent + c.mi_inconsistent);
    }
    if (c.counselor_words + c.client_words > 0) {
        r.ttt_pct = 100.0 * c.counselor_words / (c.counselor_words + c.client_words);
    }
    if (r.rq) r.proficiency["rq"] = classify_rq(*r.rq);
    if (r.oq_pct) r.proficiency["oq"] = classify_oq(*r.oq_pct);
    if (r.cr_pct) r.proficiency["cr"] = classify_cr(*r.cr_pct);
    if (r.mic_pct) r.proficiency["mic"] = classify_mic(*r.mic_pct);
    if (r.ttt_pct) r.proficiency["ttt"] = classify_ttt(*r.ttt_pct);
    return r;
}

// --- global scores ---

std::optional<int> parse_likert_1_5(const std::string& text, Diagnostics* diag) {
    // Prefer the integer preceding "out of 5"; otherwise the first integer.
    std::optional<long> value;
    auto pos = to_lower(text).find("out of 5");
    if (pos != std::string::npos) {
        size_t end = pos;
        while (end > 0 && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
        size_t start = end;
        while (start > 0 && std::isdigit(static_cast<unsigned char>(text[start - 1]))) --start;
        if (start < end) value = std::stol(text.substr(start, end - start));
    }
    if (!value) {
        for (size_t i = 0; i < text.size(); ++i) {
            if (std::isdigit(static_cast<unsigned char>(text[i]))) {
                size_t j = i;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                    ++j;
                }
                value = std::stol(text.substr(i, j - i));
                break;
            }
        }
    }
    if (!value) return std::nullopt;
    if (*value < 1 || *value > 5) {
        if (diag) diag->note("global score " + std::to_string(*value) + " clamped to 1..5");
        return static_cast<int>(std::clamp(*value, 1l, 5l));
    }
    return static_cast<int>(*value);
}

GlobalScores global_scores(Backend& backend, const Catalogs& catalogs,
                           const SessionTranscript& t, Diagnostics* diag) {
    const std::string transcript_text = render_context(t.utterances);
    auto score = [&](const char* template_id, const char* tag) -> std::optional<int> {
        std::string prompt =
            catalogs.prompts.render(template_id, {{"transcript", transcript_text}});
        ChatRequest req = ChatRequest::single(tag, std::move(prompt));
        std::string text = backend.complete(req).text;
        auto v = parse_likert_1_5(text, diag);
        if (!v && diag) diag->note(std::string(tag) + ": unparseable score, reported absent");
        return v;
    };
    GlobalScores g;
    g.cultivating = score("global_cultivating", "global_cultivating");
    g.softening = score("global_softening", "global_softening");
    g.partnership = score("global_partnership", "global_partnership");
    g.empathy = score("global_empathy", "global_empathy");
    return g;
}

// --- success ---

SuccessReport success_metrics(const std::vector<SessionTranscript>& transcripts,
                              const std::vector<ClientProfile>& profiles) {
    SuccessReport report;
    std::map<std::string, const ClientProfile*> by_id;
    for (const auto& p : profiles) by_id[p.id] = &p;

    std::map<std::string, std::pair<int, int>> per_profile;  // id -> (successes, sessions)
    for (const auto& t : transcripts) {
        if (!by_id.count(t.profile_id)) {
            throw std::invalid_argument("transcript " + t.session_id +
                                        " references unknown profile " + t.profile_id);
        }
        auto& [wins, total] = per_profile[t.profile_id];
        ++total;
        if (!t.aborted && t.termination == Termination::ClientMotivated) ++wins;
    }

    std::map<std::string, std::vector<double>> per_superclass;
    std::vector<double> all;
    for (const auto& [id, counts] : per_profile) {
        const ClientProfile* p = by_id.at(id);
        double rate = counts.second == 0
                          ? 0.0
                          : static_cast<double>(counts.first) / counts.second;
        report.per_profile[id] = rate;
        all.push_back(rate);
        if (!p->motivation_topic_path.empty()) {
            const std::string& root = p->motivation_topic_path.front();
            per_superclass[root].push_back(rate);
            report.profiles_per_superclass[root] += 1;
            report.sessions_per_superclass[root] += counts.second;
        }
    }
    for (const auto& [root, rates] : per_superclass) {
        double sum = 0.0;
        for (double r : rates) sum += r;
        report.per_superclass[root] = sum / rates.size();
    }
    if (!all.empty()) {
        double sum = 0.0;
        for (double r : all) sum += r;
        report.overall = sum / all.size();
    }
    return report;
}

// --- exploration focus ---

FocResult exploration_focus(Backend& backend, const Catalogs& catalogs, const TopicTree& tree,
                            const SessionTranscript& t, const ClientProfile& profile,
                            Diagnostics* diag) {
    FocResult result;
    if (profile.motivation_topic_path.size() != 3) {
        throw std::invalid_argument("profile " + profile.id +
                                    " lacks a 3-level motivation topic path");
    }
    (void)tree;
    double sum = 0.0;
    for (size_t i : counselor_indices(t)) {
        std::string prompt = catalogs.prompts.render(
            "foc_judge", {{"utterance", t.utterances[i].text},
                          {"fine_topic", profile.motivation_topic_path[2]},
                          {"coarse_topic", profile.motivation_topic_path[1]},
                          {"superclass_topic", profile.motivation_topic_path[0]}});
        ChatRequest req = ChatRequest::single("foc_judge", std::move(prompt));
        std::string text = backend.complete(req).text;

        std::optional<int> distance;
        for (char c : text) {
            if (c >= '0' && c <= '3') {
                distance = c - '0';
                break;
            }
        }
        if (!distance) {
            ++result.excluded;
            if (diag) {
                diag->note("foc: unparseable distance for utterance " +
                           std::to_string(t.utterances[i].index));
            }
            continue;
        }
        sum += *distance;
        ++result.judged;
    }
    if (result.judged > 0) result.mean = sum / result.judged;
    return result;
}

// --- accuracies ---

AccuracyReport inference_accuracies(const std::vector<SessionTranscript>& transcripts,
                                    const std::vector<ClientProfile>& profiles,
                                    const TopicTree& tree) {
    std::map<std::string, const ClientProfile*> by_id;
    for (const auto& p : profiles) by_id[p.id] = &p;

    int state_hits = 0;
    int state_total = 0;
    int topic_hits = 0;
    int topic_total = 0;
    for (const auto& t : transcripts) {
        const ClientProfile* profile =
            by_id.count(t.profile_id) ? by_id.at(t.profile_id) : nullptr;
        for (size_t i = 0; i < t.utterances.size(); ++i) {
            const auto& u = t.utterances[i];
            if (u.speaker == Speaker::Counselor) {
                if (!u.annotations.inferred_state) continue;
                if (i + 1 >= t.utterances.size()) continue;
                const auto& reply = t.utterances[i + 1];
                if (!reply.annotations.true_state) continue;
                ++state_total;
                if (*u.annotations.inferred_state == *reply.annotations.true_state) {
                    ++state_hits;
                }
            } else {
                if (!u.annotations.engagement_distance || i == 0 || !profile) continue;
                if (profile->motivation_topic_path.size() != 3) continue;
                const auto& counselor = t.utterances[i - 1];
                if (!counselor.annotations.counselor_topic) continue;
                int structural = tree.topic_distance(counselor.annotations.counselor_topic,
                                                     profile->motivation_topic_path[2]);
                ++topic_total;
                if (structural == *u.annotations.engagement_distance) ++topic_hits;
            }
        }
    }
    AccuracyReport report;
    report.state_covered = state_total;
    report.topic_covered = topic_total;
    if (state_total > 0) report.state_accuracy = static_cast<double>(state_hits) / state_total;
    if (topic_total > 0) report.topic_decipher_accuracy =
        static_cast<double>(topic_hits) / topic_total;
    return report;
}

// --- aggregation ---

std::optional<double> mean_present(const std::vector<std::optional<double>>& values) {
    double sum = 0.0;
    int n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

std::optional<double> two_stage_mean(
    const std::vector<std::vector<std::optional<double>>>& per_profile_sessions) {
    std::vector<std::optional<double>> profile_means;
    for (const auto& sessions : per_profile_sessions) {
        profile_means.push_back(mean_present(sessions));
    }
    return mean_present(profile_means);
}

EvaluationReport build_report(const std::string& method,
                              const std::vector<ClientProfile>& profiles,
                              const std::vector<SessionTranscript>& transcripts,
                              const std::vector<SessionMetrics>& session_metrics,
                              const TopicTree& tree) {
    EvaluationReport report;
    report.method = method;
    report.profiles = static_cast<int>(profiles.size());
    report.sessions = static_cast<int>(transcripts.size());
    for (const auto& t : transcripts) {
        if (t.aborted) ++report.aborted;
    }

    std::vector<std::string> profile_order;
    for (const auto& p : profiles) profile_order.push_back(p.id);

    auto grouped = [&](auto&& extract) {
        std::vector<std::vector<std::optional<double>>> groups(profile_order.size());
        for (const auto& m : session_metrics) {
            auto it = std::find(profile_order.begin(), profile_order.end(), m.profile_id);
            if (it == profile_order.end()) continue;
            groups[it - profile_order.begin()].push_back(extract(m));
        }
        return groups;
    };
    auto opt_int = [](const std::optional<int>& v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return static_cast<double>(*v);
    };

    report.overall_ratios.rq =
        two_stage_mean(grouped([](const SessionMetrics& m) { return m.ratios.rq; }));
    report.overall_ratios.oq_pct =
        two_stage_mean(grouped([](const SessionMetrics& m) { return m.ratios.oq_pct; }));
    report.overall_ratios.cr_pct =
        two_stage_mean(grouped([](const SessionMetrics& m) { return m.ratios.cr_pct; }));
    report.overall_ratios.mic_pct =
        two_stage_mean(grouped([](const SessionMetrics& m) { return m.ratios.mic_pct; }));
    report.overall_ratios.ttt_pct =
        two_stage_mean(grouped([](const SessionMetrics& m) { return m.ratios.ttt_pct; }));
    if (report.overall_ratios.rq) {
        report.overall_ratios.proficiency["rq"] = classify_rq(*report.overall_ratios.rq);
    }
    if (report.overall_ratios.oq_pct) {
        report.overall_ratios.proficiency["oq"] = classify_oq(*report.overall_ratios.oq_pct);
    }
    if (report.overall_ratios.cr_pct) {
        report.overall_ratios.proficiency["cr"] = classify_cr(*report.overall_ratios.cr_pct);
    }
    if (report.overall_ratios.mic_pct) {
        report.overall_ratios.proficiency["mic"] =
            classify_mic(*report.overall_ratios.mic_pct);
    }
    if (report.overall_ratios.ttt_pct) {
        report.overall_ratios.proficiency["ttt"] =
            classify_ttt(*report.overall_ratios.ttt_pct);
    }

    report.cultivating = two_stage_mean(
        grouped([&](const SessionMetrics& m) { return opt_int(m.globals.cultivating); }));
    report.softening = two_stage_mean(
        grouped([&](const SessionMetrics& m) { return opt_int(m.globals.softening); }));
    report.partnership = two_stage_mean(
        grouped([&](const SessionMetrics& m) { return opt_int(m.globals.partnership); }));
    report.empathy = two_stage_mean(
        grouped([&](const SessionMetrics& m) { return opt_int(m.globals.empathy); }));

    report.foc_mean =
        two_stage_mean(grouped([](const SessionMetrics& m) { return m.foc.mean; }));
    for (const auto& m : session_metrics) report.foc_excluded += m.foc.excluded;

    report.success = success_metrics(transcripts, profiles);
    report.accuracy = inference_accuracies(transcripts, profiles, tree);
    return report;
}

std::string EvaluationReport::to_json() const {
    nlohmann::ordered_json j;
    j["method"] = method;
    j["profiles"] = profiles;
    j["sessions"] = sessions;
    j["aborted"] = aborted;

    auto put = [](nlohmann::ordered_json& obj, const char* key,
                  const std::optional<double>& v) {
        if (v) obj[key] = *v;
        else obj[key] = nullptr;
    };
    nlohmann::ordered_json miti;
    put(miti, "rq", overall_ratios.rq);
    put(miti, "oq_pct", overall_ratios.oq_pct);
    put(miti, "cr_pct", overall_ratios.cr_pct);
    put(miti, "mic_pct", overall_ratios.mic_pct);
    put(miti, "ttt_pct", overall_ratios.ttt_pct);
    nlohmann::ordered_json prof = nlohmann::ordered_json::object();
    for (const auto& [k, v] : overall_ratios.proficiency) prof[k] = to_string(v);
    miti["proficiency"] = prof;
    j["miti"] = miti;

    nlohmann::ordered_json globals;
    put(globals, "cultivating", cultivating);
    put(globals, "softening", softening);
    put(globals, "partnership", partnership);
    put(globals, "empathy", empathy);
    j["global_scores"] = globals;

    nlohmann::ordered_json succ;
    put(succ, "overall", success.overall);
    succ["per_superclass"] = nlohmann::ordered_json::object();
    for (const auto& [root, rate] : success.per_superclass) {
        succ["per_superclass"][root] = rate;
    }
    succ["profiles_per_superclass"] = nlohmann::ordered_json::object();
    for (const auto& [root, n] : success.profiles_per_superclass) {
        succ["profiles_per_superclass"][root] = n;
    }
    succ["sessions_per_superclass"] = nlohmann::ordered_json::object();
    for (const auto& [root, n] : success.sessions_per_superclass) {
        succ["sessions_per_superclass"][root] = n;
    }
    succ["per_profile"] = nlohmann::ordered_json::object();
    for (const auto& [id, rate] : success.per_profile) succ["per_profile"][id] = rate;
    j["success"] = succ;

    put(j, "foc_mean", foc_mean);
    j["foc_excluded"] = foc_excluded;

    nlohmann::ordered_json acc;
    put(acc, "state_inference_accuracy", accuracy.state_accuracy);
    acc["state_turns_covered"] = accuracy.state_covered;
    put(acc, "topic_decipher_accuracy", accuracy.topic_decipher_accuracy);
    acc["topic_turns_covered"] = accuracy.topic_covered;
    j["accuracy"] = acc;
    return j.dump(2) + "\n";
}

std::string EvaluationReport::render_tables() const {
    std::ostringstream out;
    auto tag = [&](const char* key) -> std::string {
        auto it = overall_ratios.proficiency.find(key);
        if (it == overall_ratios.proficiency.end()) return "";
        if (it->second == Proficiency::Expert) return "(e)";
        if (it->second == Proficiency::Proficient) return "(p)";
        return "";
    };

    out << "Behavior counts\n";
    out << "method        R/Q      %OQ      %CR      %MIC     %TTT\n";
    out << "Expert        >2.0     >70%     >50%     >90%     <50%\n";
    out << "Prof.         >1.0     >50%     >40%     >80%     <60%\n";
    out << std::left << std::setw(14) << method << std::setw(9)
        << (fmt(overall_ratios.rq) + tag("rq")) << std::setw(9)
        << (fmt(overall_ratios.oq_pct, 1) + tag("oq")) << std::setw(9)
        << (fmt(overall_ratios.cr_pct, 1) + tag("cr")) << std::setw(9)
        << (fmt(overall_ratios.mic_pct, 1) + tag("mic")) << std::setw(9)
        << (fmt(overall_ratios.ttt_pct, 1) + tag("ttt")) << "\n\n";

    out << "Global scores\n";
    out << "method        Cultivate  Soften   Partner  Empathy\n";
    out << std::left << std::setw(14) << method << std::setw(11) << fmt(cultivating)
        << std::setw(9) << fmt(softening) << std::setw(9) << fmt(partnership) << std::setw(9)
        << fmt(empathy) << "\n\n";

    out << "Success rate (%)\n";
    out << "method       ";
    std::vector<std::string> roots;
    for (const auto& [root, rate] : success.per_superclass) roots.push_back(root);
    for (const auto& root : roots) out << std::setw(28) << root;
    out << "Overall\n" << std::left << std::setw(13) << method;
    for (const auto& root : roots) {
        out << std::setw(28) << fmt(success.per_superclass.at(root) * 100.0, 1);
    }
    out << fmt(success.overall ? std::optional<double>(*success.overall * 100.0)
                               : std::nullopt,
               1)
        << "\n\n";

    out << "Exploration focus: " << fmt(foc_mean) << " (lower is closer; " << foc_excluded
        << " utterances excluded)\n";
    out << "State inference accuracy: "
        << fmt(accuracy.state_accuracy
                   ? std::optional<double>(*accuracy.state_accuracy * 100.0)
                   : std::nullopt,
               2)
        << "% over " << accuracy.state_covered << " turns\n";
    out << "Topic decipher accuracy: "
        << fmt(accuracy.topic_decipher_accuracy
                   ? std::optional<double>(*accuracy.topic_decipher_accuracy * 100.0)
                   : std::nullopt,
               2)
        << "% over " << accuracy.topic_covered << " turns\n";
    return out.str();
}

}  // namespace cami
