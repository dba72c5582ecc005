#include "cami/catalogs.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cami/text.hpp"

#ifndef CAMI_DEFAULT_DATA_DIR
#define CAMI_DEFAULT_DATA_DIR "data"
#endif

namespace cami {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string default_data_dir() {
    if (const char* env = std::getenv("CAMI_DATA_DIR")) return env;
    return CAMI_DEFAULT_DATA_DIR;
}

Catalogs Catalogs::load(const std::string& data_dir) {
    Catalogs c;
    c.prompts = PromptCatalog::load_file(data_dir + "/prompts.json");

    json strategies = json::parse(slurp(data_dir + "/strategies.json"));
    for (const auto& item : strategies.at("strategies")) {
        c.strategy_descriptions[strategy_from_string(item.at("name"))] =
            item.at("description").get<std::string>();
    }
    if (c.strategy_descriptions.size() != static_cast<size_t>(kStrategyCount)) {
        throw std::runtime_error("strategy catalog must define all 17 strategies");
    }

    json codes = json::parse(slurp(data_dir + "/miti_codes.json"));
    for (const auto& item : codes.at("codes")) {
        c.code_descriptions[behavior_code_from_string(item.at("name"))] =
            item.at("description").get<std::string>();
    }
    if (c.code_descriptions.size() != static_cast<size_t>(kBehaviorCodeCount)) {
        throw std::runtime_error("behavior-code catalog must define all 18 codes");
    }

    json desc = json::parse(slurp(data_dir + "/descriptions.json"));
    for (const auto& [name, text] : desc.at("counselor_states").items()) {
        c.counselor_state_descriptions[change_state_from_string(name)] = text;
    }
    for (const auto& [name, text] : desc.at("client_states").items()) {
        c.client_state_descriptions[change_state_from_string(name)] = text;
    }
    for (const auto& [name, text] : desc.at("actions").items()) {
        c.action_descriptions[client_action_from_string(name)] = text;
    }
    for (int d = 0; d <= 3; ++d) {
        c.engagement_descriptions[d] = desc.at("engagement").at(std::to_string(d));
    }
    c.mi_principles = desc.at("mi_principles").get<std::string>();

    json few_shot = json::parse(slurp(data_dir + "/few_shot.json"));
    c.moderator_examples = few_shot.at("moderator_examples").get<std::string>();
    c.motivation_examples = few_shot.at("motivation_examples").get<std::string>();
    c.engagement_examples = few_shot.at("engagement_examples").get<std::string>();

    c.reference_session = slurp(data_dir + "/reference_session.txt");
    return c;
}

std::string Catalogs::strategies_block() const {
    std::string out;
    for (auto s : all_strategies()) {
        out += "- " + to_string(s) + ": " + strategy_descriptions.at(s) + "\n";
    }
    return out;
}

std::string Catalogs::codes_block(const std::vector<BehaviorCode>& codes) const {
    std::string out;
    for (auto code : codes) {
        out += "- " + to_string(code) + ": " + code_descriptions.at(code) + "\n";
    }
    return out;
}

std::string Catalogs::mi_techniques_block() const {
    std::string out;
    for (auto s : all_strategies()) {
        if (s == MIStrategy::NoStrategy) continue;
        out += "- " + to_string(s) + ". " + strategy_descriptions.at(s) + "\n";
    }
    return out;
}

std::string Catalogs::actions_block(ChangeState s) const {
    std::string out;
    for (auto a : state_action_set(s)) {
        out += "- " + to_string(a) + ": " + action_descriptions.at(a) + "\n";
    }
    return out;
}

std::string Catalogs::topic_guidance(const TopicTree& tree, const std::string& topic_id,
                                     const std::string& behavior,
                                     const std::string& goal) const {
    return render_guidance_text(tree.node(topic_id).guidance, behavior, goal);
}

}  // namespace cami
