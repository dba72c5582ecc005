#include "cami/topic_tree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cami {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::string to_string(TopicLevel level) {
    switch (level) {
        case TopicLevel::Superclass: return "superclass";
        case TopicLevel::Coarse: return "coarse";
        case TopicLevel::Fine: return "fine";
    }
    return "superclass";
}

TopicLevel topic_level_from_string(const std::string& s) {
    if (s == "superclass") return TopicLevel::Superclass;
    if (s == "coarse") return TopicLevel::Coarse;
    if (s == "fine") return TopicLevel::Fine;
    throw TreeParseError("unknown topic level: " + s);
}

std::string to_string(NavigationOp op) {
    switch (op) {
        case NavigationOp::Init: return "Init";
        case NavigationOp::StepInto: return "StepInto";
        case NavigationOp::Switch: return "Switch";
        case NavigationOp::StepOut: return "StepOut";
        case NavigationOp::Hold: return "Hold";
    }
    return "Hold";
}

NavigationOp navigation_op_from_string(const std::string& s) {
    if (s == "Init") return NavigationOp::Init;
    if (s == "StepInto") return NavigationOp::StepInto;
    if (s == "Switch") return NavigationOp::Switch;
    if (s == "StepOut") return NavigationOp::StepOut;
    if (s == "Hold") return NavigationOp::Hold;
    throw std::invalid_argument("unknown navigation op: " + s);
}

TreeStructureError::TreeStructureError(std::vector<std::string> v)
    : std::runtime_error("topic tree has " + std::to_string(v.size()) +
                         " structural violation(s): " + (v.empty() ? "" : v.front())),
      violations(std::move(v)) {}

TopicTree TopicTree::load(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw TreeParseError(std::string("tree parse failure: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw TreeParseError("tree document must be an object with a 'nodes' array");
    }
    std::vector<TopicNode> nodes;
    for (const auto& item : doc["nodes"]) {
        TopicNode n;
        try {
            n.id = item.at("id").get<std::string>();
            n.level = topic_level_from_string(item.at("level").get<std::string>());
            if (item.contains("parent") && !item["parent"].is_null()) {
                n.parent = item["parent"].get<std::string>();
            }
            n.guidance = item.value("guidance", std::string{});
            n.provenance = item.value("provenance", std::string{"curated"});
        } catch (const nlohmann::json::exception& e) {
            throw TreeParseError(std::string("tree node parse failure: ") + e.what());
        }
        nodes.push_back(std::move(n));
    }
    return from_nodes(std::move(nodes));
}

TopicTree TopicTree::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TreeParseError("cannot open tree file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load(buf.str());
}

TopicTree TopicTree::from_nodes(std::vector<TopicNode> nodes) {
    TopicTree tree;
    for (auto& n : nodes) {
        tree.order_.push_back(n.id);
        tree.nodes_.emplace(n.id, std::move(n));
    }
    if (tree.order_.size() != tree.nodes_.size()) {
        // Duplicate ids are unrecoverable before indexing; report them all.
        std::vector<std::string> dups;
        std::unordered_map<std::string, int> seen;
        for (const auto& id : tree.order_) {
            if (++seen[id] == 2) dups.push_back("duplicate topic id: " + id);
        }
        throw TreeStructureError(std::move(dups));
    }
    tree.index();
    auto violations = tree.structural_violations();
    if (!violations.empty()) throw TreeStructureError(std::move(violations));
    return tree;
}

void TopicTree::index() {
    for (const auto& id : order_) {
        const auto& n = nodes_.at(id);
        lower_index_[lower(id)] = id;
        if (n.parent) {
            children_[*n.parent].push_back(id);
        } else {
            roots_.push_back(id);
        }
    }
}

std::vector<std::string> TopicTree::structural_violations() const {
    std::vector<std::string> out;
    for (const auto& id : order_) {
        const auto& n = nodes_.at(id);
        if (n.level == TopicLevel::Superclass) {
            if (n.parent) out.push_back("superclass node has a parent: " + id);
            continue;
        }
        if (!n.parent) {
            out.push_back("non-superclass node missing parent: " + id);
            continue;
        }
        auto it = nodes_.find(*n.parent);
        if (it == nodes_.end()) {
            out.push_back("parent does not exist: " + id + " -> " + *n.parent);
            continue;
        }
        const auto& p = it->second;
        if (n.level == TopicLevel::Coarse && p.level != TopicLevel::Superclass) {
            out.push_back("LevelSkip: coarse node " + id + " not under a superclass");
        }
        if (n.level == TopicLevel::Fine && p.level != TopicLevel::Coarse) {
            out.push_back("LevelSkip: fine node " + id + " not under a coarse node");
        }
    }
    for (const auto& [id, kids] : children_) {
        auto it = nodes_.find(id);
        if (it != nodes_.end() && it->second.level == TopicLevel::Fine && !kids.empty()) {
            out.push_back("fine node has children: " + id);
        }
    }
    return out;
}

std::string TopicTree::serialize() const {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const auto& id : order_) {
        const auto& n = nodes_.at(id);
        nlohmann::ordered_json item;
        item["id"] = n.id;
        item["level"] = to_string(n.level);
        if (n.parent) item["parent"] = *n.parent;
        item["guidance"] = n.guidance;
        item["provenance"] = n.provenance;
        doc["nodes"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

bool TopicTree::contains(const std::string& id) const { return nodes_.count(id) > 0; }

std::optional<std::string> TopicTree::resolve(const std::string& name) const {
    auto it = lower_index_.find(lower(name));
    if (it == lower_index_.end()) return std::nullopt;
    return it->second;
}

const TopicNode& TopicTree::node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownTopicError(id);
    return it->second;
}

std::vector<std::string> TopicTree::children(const std::string& id) const {
    auto it = children_.find(id);
    if (it == children_.end()) return {};
    return it->second;
}

size_t TopicTree::count(TopicLevel level) const {
    size_t n = 0;
    for (const auto& [id, node] : nodes_) {
        if (node.level == level) ++n;
    }
    return n;
}

std::vector<std::string> TopicTree::candidates(const std::string& current,
                                               NavigationOp op) const {
    const auto& n = node(current);
    switch (op) {
        case NavigationOp::StepInto:
            return children(current);
        case NavigationOp::Switch: {
            std::vector<std::string> siblings =
                n.parent ? children(*n.parent) : roots_;
            siblings.erase(std::remove(siblings.begin(), siblings.end(), current),
                           siblings.end());
            return siblings;
        }
        case NavigationOp::StepOut:
            if (n.parent) return {*n.parent};
            return {};
        default:
            throw std::invalid_argument("candidates: op must be StepInto, Switch or StepOut");
    }
}

std::string TopicTree::superclass_of(const std::string& id) const {
    const TopicNode* n = &node(id);
    while (n->parent) n = &node(*n->parent);
    return n->id;
}

int TopicTree::topic_distance(const std::optional<std::string>& counselor_topic,
                              const std::string& ground_truth_fine) const {
    const auto& gt = node(ground_truth_fine);
    if (gt.level != TopicLevel::Fine) {
        throw UnknownTopicError(ground_truth_fine + " (not a fine-grained topic)");
    }
    if (!counselor_topic || !contains(*counselor_topic)) return 3;

    const std::string& ct = *counselor_topic;
    if (ct == ground_truth_fine) return 0;

    const std::string gt_coarse = *gt.parent;
    const auto& cn = node(ct);
    std::optional<std::string> ct_coarse;
    if (cn.level == TopicLevel::Coarse) ct_coarse = ct;
    else if (cn.level == TopicLevel::Fine) ct_coarse = cn.parent;
    if (ct_coarse && *ct_coarse == gt_coarse) return 1;

    if (superclass_of(ct) == superclass_of(ground_truth_fine)) return 2;
    return 3;
}

bool ExplorationPath::consistent_with(const TopicTree& tree,
                                      const std::optional<std::string>& current) const {
    std::optional<std::string> pos;
    for (const auto& step : steps) {
        if (!tree.contains(step.topic)) return false;
        switch (step.op) {
            case NavigationOp::Init:
                if (pos) return false;  // Init only opens a path
                break;
            case NavigationOp::Hold:
                if (!pos || *pos != step.topic) return false;
                break;
            case NavigationOp::StepInto:
            case NavigationOp::Switch:
            case NavigationOp::StepOut: {
                if (!pos) return false;
                auto options = tree.candidates(*pos, step.op);
                if (std::find(options.begin(), options.end(), step.topic) == options.end()) {
                    return false;
                }
                break;
            }
        }
        pos = step.topic;
    }
    return pos == current;
}

std::string ExplorationPath::render() const {
    if (steps.empty()) return "(none)";
    std::string out;
    for (size_t i = 0; i < steps.size(); ++i) {
        if (i) out += " -> ";
        out += steps[i].topic;
    }
    return out;
}

}  // namespace cami
