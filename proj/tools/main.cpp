#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cami/cli.hpp"

namespace {

void add_common(CLI::App* app, cami::CommonOptions& common) {
    app->add_option("--config", common.config_path, "Config file (JSON)");
    app->add_option("--backend", common.backend_type, "Backend type: http or scripted")
        ->check(CLI::IsMember({"http", "scripted"}));
    app->add_option("--script", common.script_path, "Script file for the scripted backend");
    app->add_option("--data-dir", common.data_dir,
                    "Data directory (prompts, catalogs, default tree)");
    app->add_flag("--verbose", common.verbose, "Verbose diagnostics");
}

std::string config_key_footer() {
    std::string out = "Config file keys:\n";
    for (const auto& key : cami::AppConfig::known_keys()) out += "  " + key + "\n";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motivational-interviewing counselor simulation and evaluation"};
    app.set_version_flag("--version", cami::kVersion);
    app.require_subcommand(1);
    app.footer(config_key_footer());

    cami::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run counselor/client session batches");
    add_common(simulate, sim.common);
    simulate->add_option("--profiles", sim.profiles_path, "Profile file or directory");
    simulate->add_option("--out", sim.out_dir, "Output directory");
    simulate->add_option("--preset", sim.preset,
                         "Counselor preset: base, cos, cami-te or cami")
        ->check(CLI::IsMember({"base", "cos", "cami-te", "cami"}));
    simulate->add_option("--tree", sim.tree_path, "Topic tree file");
    simulate->add_option("--seed", sim.seed, "Seed base; session i uses seed+i");
    int spp = 0;
    int workers = 0;
    simulate->add_option("--sessions-per-profile", spp, "Sessions per profile (default 5)");
    simulate->add_option("--workers", workers, "Concurrent sessions (default 4)");

    cami::EvaluateOptions eval;
    auto* evaluate = app.add_subcommand("evaluate", "Score persisted transcripts");
    add_common(evaluate, eval.common);
    evaluate->add_option("--transcripts", eval.transcripts_dir, "Transcript directory");
    evaluate->add_option("--profiles", eval.profiles_path, "Profile file or directory");
    evaluate->add_option("--tree", eval.tree_path, "Topic tree file");
    evaluate->add_option("--out", eval.out_path, "Report output path (JSON)");
    evaluate->add_option("--proposer", eval.proposer, "Behavior-code proposer: llm or sidecar")
        ->check(CLI::IsMember({"llm", "sidecar"}));
    evaluate->add_option("--sidecar", eval.sidecar_path, "Sidecar code file");

    cami::TreeOptions tree_opts;
    auto* tree = app.add_subcommand("tree", "Topic tree tooling");
    tree->require_subcommand(1);
    auto* tree_validate = tree->add_subcommand("validate", "Validate a tree file");
    tree_validate->add_option("file", tree_opts.tree_path, "Tree file")->required();
    auto* tree_expand = tree->add_subcommand("expand", "Propose new child topics");
    add_common(tree_expand, tree_opts.common);
    tree_expand->add_option("file", tree_opts.tree_path, "Tree file")->required();
    tree_expand->add_option("--parent", tree_opts.parent, "Parent topic id");

    cami::ChatOptions chat;
    auto* chat_cmd = app.add_subcommand("chat", "Interactive session, human as the client");
    add_common(chat_cmd, chat.common);
    chat_cmd->add_option("--profile", chat.profile_path, "Client profile file");
    chat_cmd->add_option("--out", chat.out_dir, "Transcript output directory");
    chat_cmd->add_option("--preset", chat.preset, "Counselor preset")
        ->check(CLI::IsMember({"base", "cos", "cami-te", "cami"}));
    chat_cmd->add_option("--seed", chat.seed, "Session seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : cami::kExitConfigError;
    }

    if (*simulate) {
        if (spp > 0) sim.sessions_per_profile = spp;
        if (workers > 0) sim.workers = workers;
        return cami::cmd_simulate(sim, std::cout, std::cerr);
    }
    if (*evaluate) return cami::cmd_evaluate(eval, std::cout, std::cerr);
    if (*tree) {
        if (*tree_validate) return cami::cmd_tree_validate(tree_opts, std::cout, std::cerr);
        return cami::cmd_tree_expand(tree_opts, std::cout, std::cerr);
    }
    if (*chat_cmd) return cami::cmd_chat(chat, std::cin, std::cout, std::cerr);
    return cami::kExitConfigError;
}
