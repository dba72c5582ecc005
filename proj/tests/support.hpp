#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cami/catalogs.hpp"
#include "cami/cli.hpp"
#include "cami/core.hpp"
#include "cami/evaluation.hpp"
#include "cami/llm.hpp"
#include "cami/session.hpp"
#include "cami/topic_tree.hpp"

namespace cami::testing {

/// Shipped data directory baked in at configure time.
std::string data_dir();

const Catalogs& shared_catalogs();
const TopicTree& shared_tree();
ClientProfile demo_profile();
ScriptedBackend demo_script();

/// The twelve utterance texts of the shipped demo session, in turn order.
const std::vector<std::string>& demo_texts();

SessionSetup demo_setup(const CounselorConfig& counselor = CounselorConfig::preset("cami"));

/// Backend producing responses from a function of the request; used by fuzz
/// tests where the number of calls is not known up front.
class CallbackBackend : public Backend {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}
    ChatResponse complete(const ChatRequest& req) override {
        return {fn_(req), std::nullopt, std::nullopt};
    }
    std::string fingerprint() const override { return "callback"; }

private:
    Fn fn_;
};

/// Counts exchange-log entries per tag.
std::map<std::string, int> tag_counts(const std::vector<Exchange>& log);

/// Builds a minimal valid transcript (openers plus alternating filler) with
/// the given number of utterances.
SessionTranscript filler_transcript(int utterances, Termination termination);

/// Synthetic annotated transcript: counselor utterances carry the given codes,
/// alternating with short client replies. Word counts are controllable through
/// the texts.
SessionTranscript coded_transcript(const std::string& profile_id,
                                   const std::vector<BehaviorCode>& codes,
                                   const std::string& counselor_text,
                                   const std::string& client_text,
                                   Termination termination = Termination::ClientMotivated);

}  // namespace cami::testing
