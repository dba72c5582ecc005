#include "cami/tree_expand.hpp"

#include <set>

#include "cami/text.hpp"

namespace cami {

std::vector<TopicNode> expand_tree(const TopicTree& tree, Backend& backend,
                                   const Catalogs& catalogs, const std::string& parent) {
    const auto& parent_node = tree.node(parent);
    if (parent_node.level == TopicLevel::Fine) {
        throw std::invalid_argument("cannot expand under a fine-grained topic: " + parent);
    }

    auto children = tree.children(parent);
    std::string existing;
    for (const auto& c : children) existing += "- " + c + "\n";
    if (existing.empty()) existing = "(none yet)";

    std::string prompt = catalogs.prompts.render(
        "topic_expansion", {{"category", parent}, {"topics", existing}});
    ChatRequest req = ChatRequest::single("topic_expansion", std::move(prompt));
    std::string text = backend.complete(req).text;

    auto items = parse_list_items(text);
    if (items.empty()) {
        throw ExpansionParseError("expansion completion contains no list items", text);
    }

    std::set<std::string> seen;
    for (const auto& c : children) seen.insert(to_lower(c));

    std::vector<TopicNode> proposals;
    for (const auto& item : items) {
        std::string name = trim(item);
        if (name.empty()) continue;
        std::string key = to_lower(name);
        if (seen.count(key)) continue;
        seen.insert(key);

        TopicNode node;
        node.id = name;
        node.level = parent_node.level == TopicLevel::Superclass ? TopicLevel::Coarse
                                                                 : TopicLevel::Fine;
        node.parent = parent;
        node.provenance = "proposed";
        proposals.push_back(std::move(node));
    }
    return proposals;
}

}  // namespace cami
