#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "cami/core.hpp"
#include "cami/llm.hpp"
#include "cami/topic_tree.hpp"

namespace cami {

/// Everything loaded from the data directory: prompt templates, the strategy
/// and behavior-code catalogs, state/action/engagement descriptions, few-shot
/// example blocks and the default client reference session.
struct Catalogs {
    PromptCatalog prompts;

    std::map<MIStrategy, std::string> strategy_descriptions;
    std::map<BehaviorCode, std::string> code_descriptions;
    std::map<ChangeState, std::string> counselor_state_descriptions;
    std::map<ChangeState, std::string> client_state_descriptions;
    std::map<ClientAction, std::string> action_descriptions;
    std::array<std::string, 4> engagement_descriptions;  // indexed by distance

    std::string mi_principles;
    std::string moderator_examples;
    std::string motivation_examples;
    std::string engagement_examples;
    std::string reference_session;

    static Catalogs load(const std::string& data_dir);

    /// "- Name: description" lines for the full strategy catalog.
    std::string strategies_block() const;
    /// Same, restricted to the given behavior codes.
    std::string codes_block(const std::vector<BehaviorCode>& codes) const;
    /// Technique list used by the counselor system prompt knowledge base.
    std::string mi_techniques_block() const;
    /// "- Name: description" lines for the actions available in a state.
    std::string actions_block(ChangeState s) const;
    /// Topic guidance with [problematic behavior]/[goal] resolved.
    std::string topic_guidance(const TopicTree& tree, const std::string& topic_id,
                               const std::string& behavior, const std::string& goal) const;
};

/// Default data directory: $CAMI_DATA_DIR when set, otherwise the compiled-in
/// path.
std::string default_data_dir();

}  // namespace cami
