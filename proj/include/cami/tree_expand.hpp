#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cami/catalogs.hpp"
#include "cami/llm.hpp"
#include "cami/topic_tree.hpp"

namespace cami {

struct ExpansionParseError : std::runtime_error {
    ExpansionParseError(const std::string& message, std::string raw_text)
        : std::runtime_error(message), raw(std::move(raw_text)) {}
    std::string raw;
};

/// Proposes new child topics under a superclass or coarse node. Proposals are
/// deduplicated case-insensitively against existing children and never
/// inserted automatically; the caller reviews and commits.
std::vector<TopicNode> expand_tree(const TopicTree& tree, Backend& backend,
                                   const Catalogs& catalogs, const std::string& parent);

}  // namespace cami
