#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cami/catalogs.hpp"
#include "cami/core.hpp"
#include "cami/counselor.hpp"
#include "cami/llm.hpp"
#include "cami/topic_tree.hpp"

namespace cami {

struct AnnotationAlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Supplies up to five ranked candidate codes per counselor utterance; the
/// judge pass then picks the final label among them.
class CodeProposer {
public:
    virtual ~CodeProposer() = default;
    virtual std::vector<BehaviorCode> propose(Backend& backend, const SessionTranscript& t,
                                              size_t utterance_index) = 0;
    virtual void check_alignment(const SessionTranscript& t) const { (void)t; }
};

/// Default proposer: one completion listing five ranked codes.
class LlmCodeProposer : public CodeProposer {
public:
    LlmCodeProposer(const Catalogs& catalogs, Diagnostics* diag = nullptr)
        : catalogs_(catalogs), diag_(diag) {}
    std::vector<BehaviorCode> propose(Backend& backend, const SessionTranscript& t,
                                      size_t utterance_index) override;

private:
    const Catalogs& catalogs_;
    Diagnostics* diag_;
};

/// Proposer backed by a sidecar file: per counselor utterance, five ranked
/// code names. Misaligned counts raise AnnotationAlignmentError.
class SidecarCodeProposer : public CodeProposer {
public:
    static SidecarCodeProposer from_file(const std::string& path);
    static SidecarCodeProposer from_json(const std::string& text);

    std::vector<BehaviorCode> propose(Backend& backend, const SessionTranscript& t,
                                      size_t utterance_index) override;
    void check_alignment(const SessionTranscript& t) const override;

private:
    // session_id -> ranked code lists, in counselor-utterance order; the ""
    // key applies to any session (single-transcript sidecars).
    std::map<std::string, std::vector<std::vector<BehaviorCode>>> rows_;
    const std::vector<std::vector<BehaviorCode>>* rows_for(const SessionTranscript& t) const;
};

/// Assigns one behavior code to every counselor utterance: proposer candidates,
/// then a judge completion restricted to them. Judge picks outside the
/// candidates fall back to the proposer's rank-1 code; unparseable picks become
/// Filter.
SessionTranscript annotate_behavior(Backend& backend, CodeProposer& proposer,
                                    const Catalogs& catalogs, SessionTranscript transcript,
                                    Diagnostics* diag = nullptr);

struct BehaviorCounts {
    int reflections_simple = 0;
    int reflections_complex = 0;
    int open_q = 0;
    int closed_q = 0;
    int mi_consistent = 0;
    int mi_inconsistent = 0;
    int counselor_words = 0;
    int client_words = 0;
};

bool is_mi_consistent(BehaviorCode c);
bool is_mi_inconsistent(BehaviorCode c);

/// Pure multiset function of the annotated codes and word counts.
BehaviorCounts behavior_counts(const SessionTranscript& t);

enum class Proficiency { Expert, Proficient, Below };

std::string to_string(Proficiency p);

struct MitiRatios {
    std::optional<double> rq;       // reflections / questions
    std::optional<double> oq_pct;   // open / (open + closed) * 100
    std::optional<double> cr_pct;   // complex / reflections * 100
    std::optional<double> mic_pct;  // consistent / (consistent + inconsistent) * 100
    std::optional<double> ttt_pct;  // counselor words / total words * 100
    std::map<std::string, Proficiency> proficiency;  // keyed rq/oq/cr/mic/ttt
};

/// Ratio defined only when its denominator is nonzero; absent ratios are
/// excluded from averages. Thresholds are strict inequalities.
MitiRatios miti_ratios(const BehaviorCounts& counts);

Proficiency classify_rq(double v);
Proficiency classify_oq(double v);
Proficiency classify_cr(double v);
Proficiency classify_mic(double v);
Proficiency classify_ttt(double v);

struct GlobalScores {
    std::optional<int> cultivating;
    std::optional<int> softening;
    std::optional<int> partnership;
    std::optional<int> empathy;
};

/// Four rubric completions, each parsed to an integer 1-5 (out-of-range values
/// clamp; unparseable stays absent).
GlobalScores global_scores(Backend& backend, const Catalogs& catalogs,
                           const SessionTranscript& t, Diagnostics* diag = nullptr);

std::optional<int> parse_likert_1_5(const std::string& text, Diagnostics* diag = nullptr);

struct SuccessReport {
    std::optional<double> overall;  // mean over profiles
    std::map<std::string, double> per_superclass;
    std::map<std::string, double> per_profile;
    std::map<std::string, int> profiles_per_superclass;
    std::map<std::string, int> sessions_per_superclass;
};

/// Success <=> termination ClientMotivated; profile-first averaging.
SuccessReport success_metrics(const std::vector<SessionTranscript>& transcripts,
                              const std::vector<ClientProfile>& profiles);

struct FocResult {
    std::optional<double> mean;  // over judged counselor utterances
    int judged = 0;
    int excluded = 0;
};

/// Judged 0-3 distance per counselor utterance against the profile's
/// fine-grained motivation topic.
FocResult exploration_focus(Backend& backend, const Catalogs& catalogs, const TopicTree& tree,
                            const SessionTranscript& t, const ClientProfile& profile,
                            Diagnostics* diag = nullptr);

struct AccuracyReport {
    std::optional<double> state_accuracy;
    int state_covered = 0;
    std::optional<double> topic_decipher_accuracy;
    int topic_covered = 0;
};

/// state: inferred state on a counselor turn versus the state governing the
/// client's next reply. topic: the client's judged engagement distance versus
/// the structural tree distance of the annotated counselor topic.
AccuracyReport inference_accuracies(const std::vector<SessionTranscript>& transcripts,
                                    const std::vector<ClientProfile>& profiles,
                                    const TopicTree& tree);

/// Session-level metric bundle feeding the two-stage (session -> profile ->
/// overall) aggregation.
struct SessionMetrics {
    std::string profile_id;
    MitiRatios ratios;
    GlobalScores globals;
    FocResult foc;
};

struct EvaluationReport {
    std::string method;
    int profiles = 0;
    int sessions = 0;
    int aborted = 0;
    MitiRatios overall_ratios;  // two-stage means, classified
    std::optional<double> cultivating, softening, partnership, empathy;
    SuccessReport success;
    std::optional<double> foc_mean;
    int foc_excluded = 0;
    AccuracyReport accuracy;

    std::string to_json() const;
    /// Text tables shaped like the behavior-count / global-score / success-rate
    /// summaries, threshold header rows included.
    std::string render_tables() const;
};

/// Mean of present values; absent when none. The building block of the
/// profile-first averaging protocol.
std::optional<double> mean_present(const std::vector<std::optional<double>>& values);

/// Session values grouped per profile: profile means first, then their mean.
std::optional<double> two_stage_mean(
    const std::vector<std::vector<std::optional<double>>>& per_profile_sessions);

EvaluationReport build_report(const std::string& method,
                              const std::vector<ClientProfile>& profiles,
                              const std::vector<SessionTranscript>& transcripts,
                              const std::vector<SessionMetrics>& session_metrics,
                              const TopicTree& tree);

}  // namespace cami
