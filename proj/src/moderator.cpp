#include "cami/moderator.hpp"

#include "cami/text.hpp"

namespace cami {

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::NotYet: return "NotYet";
        case StopReason::ExplicitEnd: return "ExplicitEnd";
        case StopReason::ClientMotivated: return "ClientMotivated";
    }
    return "NotYet";
}

Moderator::Moderator(const Catalogs& catalogs, ModeratorConfig config, Diagnostics* diag)
    : catalogs_(catalogs), config_(std::move(config)), diag_(diag) {}

TerminationDecision Moderator::should_terminate(Backend& backend,
                                                const std::vector<Utterance>& context) const {
    std::string prompt = catalogs_.prompts.render(
        "moderator",
        {{"examples", catalogs_.moderator_examples},
         {"context", render_context(context, static_cast<size_t>(config_.window))}});
    ChatRequest req = ChatRequest::single("moderator", std::move(prompt), config_.sampling);
    std::string text = backend.complete(req).text;

    TerminationDecision decision;
    decision.judge_raw = text;
    auto verdict = parse_final_yes_no(text);
    if (!verdict) {
        if (diag_) diag_->note("moderator: unparseable verdict, continuing session");
        return decision;
    }
    if (!*verdict) return decision;

    decision.stop = true;
    decision.reason = StopReason::ExplicitEnd;
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
        if (it->speaker != Speaker::Client) continue;
        for (const auto& kw : config_.motivated_keywords) {
            if (contains_word_ci(it->text, kw)) {
                decision.reason = StopReason::ClientMotivated;
                break;
            }
        }
        break;
    }
    return decision;
}

}  // namespace cami
