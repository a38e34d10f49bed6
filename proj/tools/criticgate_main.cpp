#include "criticgate/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"criticgate: actor-critic runtime supervision for conversational agents"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "",
                   "configuration file with [subcommand] sections (command-line flags win)");

    criticgate::RunConfig run_config;
    auto* run = app.add_subcommand("run", "run a task suite and log trajectories");
    run->add_option("--suite", run_config.suite_path, "suite JSONL file")->required();
    run->add_option("--out", run_config.out_dir, "output directory")->required();
    run->add_option("--actor", run_config.actor, "scripted | endpoint:<base_url>,<model>");
    run->add_option("--critic", run_config.critic,
                    "none | oracle | endpoint:<base_url>,<model>");
    run->add_option("--gate", run_config.gate,
                    "auto | state_mutating | final_recommendation | always | never");
    run->add_option("--runs", run_config.runs_per_task, "runs per task (K)")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", run_config.seed, "seed base; run k uses seed+k");
    run->add_option("--jobs", run_config.concurrency, "parallel episodes")
        ->check(CLI::PositiveNumber);

    criticgate::DatagenConfig datagen_config;
    auto* datagen = app.add_subcommand("datagen", "emit a critic supervision dataset");
    datagen->add_option("--suite", datagen_config.run.suite_path, "suite JSONL file")->required();
    datagen->add_option("--out", datagen_config.run.out_dir, "output directory")->required();
    datagen->add_option("--actor", datagen_config.run.actor, "actor backend spec");
    datagen->add_option("--critic", datagen_config.run.critic,
                        "critic backend spec (defaults to oracle)");
    datagen->add_option("--gate", datagen_config.run.gate, "gate policy");
    datagen->add_option("--runs", datagen_config.run.runs_per_task, "runs per task (K)")
        ->check(CLI::PositiveNumber);
    datagen->add_option("--psi", datagen_config.psi, "hard-task threshold")
        ->check(CLI::PositiveNumber);
    datagen->add_option("--seed", datagen_config.run.seed, "seed base");
    datagen->add_option("--jobs", datagen_config.run.concurrency, "parallel episodes")
        ->check(CLI::PositiveNumber);
    datagen->add_flag("--strict", datagen_config.strict,
                      "retain a task only when all K actor-critic runs succeed");

    criticgate::GenSuiteConfig gen_config;
    auto* gen = app.add_subcommand("gen-suite", "generate a seeded task fixture corpus");
    gen->add_option("--env", gen_config.env_kind, "retail | travel")->required();
    gen->add_option("--n", gen_config.n_tasks, "number of tasks")->required();
    gen->add_option("--difficulty", gen_config.difficulty,
                    "travel preferences per aspect (2, 3 or 4)");
    gen->add_option("--seed", gen_config.seed, "generator seed");
    gen->add_option("--out", gen_config.out_path, "suite output file")->required();
    gen->add_option("--error-prob", gen_config.error_probability,
                    "scripted actor per-turn error probability");
    gen->add_option("--error-mode", gen_config.error_modes,
                    "enabled error modes (repeatable)");
    gen->add_option("--compliance", gen_config.compliance,
                    "complies_with_guidance | ignores_guidance");

    std::vector<std::string> eval_logs;
    std::string eval_report;
    auto* eval = app.add_subcommand("eval", "recompute metrics from trajectory logs");
    eval->add_option("logs", eval_logs, "one or two trajectory logs")->required();
    eval->add_option("--report", eval_report, "write the machine-readable report here");

    std::string inspect_log, inspect_task;
    std::int64_t inspect_seed = 0;
    auto* inspect = app.add_subcommand("inspect", "print trajectories as transcripts");
    inspect->add_option("log", inspect_log, "trajectory log")->required();
    inspect->add_option("--task", inspect_task, "only this task id");
    inspect->add_option("--seed", inspect_seed, "only this seed");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return criticgate::cmd_run(run_config, std::cout, std::cerr);
    if (datagen->parsed()) return criticgate::cmd_datagen(datagen_config, std::cout, std::cerr);
    if (gen->parsed()) return criticgate::cmd_gen_suite(gen_config, std::cout, std::cerr);
    if (eval->parsed()) return criticgate::cmd_eval(eval_logs, eval_report, std::cout, std::cerr);
    if (inspect->parsed())
        return criticgate::cmd_inspect(inspect_log, inspect_task, inspect_seed, std::cout,
                                       std::cerr);
    return 2;
}
