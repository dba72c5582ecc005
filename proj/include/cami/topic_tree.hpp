#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cami {

enum class TopicLevel { Superclass, Coarse, Fine };

enum class NavigationOp { Init, StepInto, Switch, StepOut, Hold };

std::string to_string(TopicLevel level);
std::string to_string(NavigationOp op);
TopicLevel topic_level_from_string(const std::string& s);
NavigationOp navigation_op_from_string(const std::string& s);

struct TopicNode {
    std::string id;        // Wikipedia article title, canonical capitalization
    TopicLevel level = TopicLevel::Superclass;
    std::optional<std::string> parent;  // absent iff Superclass
    std::string guidance;  // counselor description, may contain [problematic behavior] / [goal]
    std::string provenance = "curated";
};

struct TreeParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structural validation failure; carries every violation found, not just the first.
struct TreeStructureError : std::runtime_error {
    explicit TreeStructureError(std::vector<std::string> violations);
    std::vector<std::string> violations;
};

struct UnknownTopicError : std::runtime_error {
    explicit UnknownTopicError(const std::string& id)
        : std::runtime_error("unknown topic: " + id) {}
};

/// Three-level motivation-topic tree. Immutable after load; share freely.
class TopicTree {
public:
    TopicTree() = default;

    /// Parses and validates a tree document. Throws TreeParseError on malformed
    /// input and TreeStructureError listing all structural violations.
    static TopicTree load(const std::string& json_text);
    static TopicTree load_file(const std::string& path);
    static TopicTree from_nodes(std::vector<TopicNode> nodes);

    std::string serialize() const;

    bool contains(const std::string& id) const;
    /// Case-insensitive lookup returning the canonical id.
    std::optional<std::string> resolve(const std::string& name) const;
    const TopicNode& node(const std::string& id) const;

    /// Superclass ids in file order; this order is the canonical tie-break order.
    const std::vector<std::string>& roots() const { return roots_; }
    const std::vector<std::string>& node_order() const { return order_; }
    std::vector<std::string> children(const std::string& id) const;

    size_t count(TopicLevel level) const;

    /// Enumerates navigation targets. StepInto: children (empty for Fine).
    /// Switch: siblings excluding self (for Superclass: the other roots).
    /// StepOut: singleton parent (empty for Superclass).
    std::vector<std::string> candidates(const std::string& current, NavigationOp op) const;

    /// Distance between the counselor's topic and the client's fine-grained
    /// ground-truth topic: 0 same fine, 1 same coarse, 2 same superclass,
    /// 3 otherwise (including absent or out-of-tree counselor topics).
    int topic_distance(const std::optional<std::string>& counselor_topic,
                       const std::string& ground_truth_fine) const;

    /// Superclass ancestor (or self) of a node.
    std::string superclass_of(const std::string& id) const;

private:
    std::unordered_map<std::string, TopicNode> nodes_;
    std::unordered_map<std::string, std::string> lower_index_;  // lowercase id -> canonical
    std::unordered_map<std::string, std::vector<std::string>> children_;
    std::vector<std::string> roots_;
    std::vector<std::string> order_;  // all ids in file order

    void index();
    std::vector<std::string> structural_violations() const;
};

/// One navigation step taken by the counselor.
struct ExplorationStep {
    std::string topic;
    NavigationOp op = NavigationOp::Init;
};

struct ExplorationPath {
    std::vector<ExplorationStep> steps;

    bool empty() const { return steps.empty(); }
    /// Checks that consecutive steps obey the op semantics (StepInto -> child,
    /// Switch -> sibling, StepOut -> parent) and that the path ends at `current`.
    bool consistent_with(const TopicTree& tree,
                         const std::optional<std::string>& current) const;
    std::string render() const;
};

}  // namespace cami
