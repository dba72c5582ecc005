#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cami/catalogs.hpp"
#include "cami/core.hpp"
#include "cami/counselor.hpp"
#include "cami/llm.hpp"

namespace cami {

enum class StopReason { NotYet, ExplicitEnd, ClientMotivated };

std::string to_string(StopReason r);

struct TerminationDecision {
    bool stop = false;
    StopReason reason = StopReason::NotYet;
    std::optional<std::string> judge_raw;
};

struct ModeratorConfig {
    int window = 6;  // utterances shown to the judge
    std::vector<std::string> motivated_keywords = {"change", "ready", "plan"};
    std::vector<std::string> explicit_keywords = {"go", "next time", "end", "later"};
    SamplingConfig sampling;
};

/// Stateless termination judge; a Yes verdict is classified as ClientMotivated
/// when the client's final utterance carries a motivation keyword, ExplicitEnd
/// otherwise. The 50-turn cap lives in the session runner.
class Moderator {
public:
    Moderator(const Catalogs& catalogs, ModeratorConfig config, Diagnostics* diag = nullptr);

    TerminationDecision should_terminate(Backend& backend,
                                         const std::vector<Utterance>& context) const;

private:
    const Catalogs& catalogs_;
    ModeratorConfig config_;
    Diagnostics* diag_;
};

}  // namespace cami
