#include "criticgate/cli.hpp"

#include "criticgate/chat_client.hpp"
#include "criticgate/eval.hpp"
#include "criticgate/generators.hpp"
#include "criticgate/serialize.hpp"

#include <filesystem>
#include <ostream>

namespace criticgate {

namespace {

GatePolicy resolve_gate(const std::string& gate, const std::string& env_kind) {
    if (gate == "auto")
        return env_kind == "travel" ? GatePolicy::final_recommendation
                                    : GatePolicy::state_mutating;
    return gate_policy_from_string(gate);
}

BackendFactory endpoint_factory(const std::string& spec, double temperature) {
    const auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw ConfigError("endpoint spec must be endpoint:<base_url>,<model>");
    EndpointConfig config;
    config.base_url = spec.substr(0, comma);
    config.model = spec.substr(comma + 1);
    config.temperature = temperature;
    auto backend = std::make_shared<EndpointBackend>(
        std::move(config), std::shared_ptr<HttpTransport>(make_httplib_transport()));
    return [backend](const TaskDocument&, Environment&) { return backend; };
}

BackendFactory actor_factory_of(const std::string& spec, const Suite& suite) {
    if (spec == "scripted") return scripted_actor_factory(suite);
    // actor temperature defaults to 1.0 on real endpoints
    if (spec.rfind("endpoint:", 0) == 0) return endpoint_factory(spec.substr(9), 1.0);
    throw ConfigError("unknown actor spec '" + spec + "'");
}

BackendFactory critic_factory_of(const std::string& spec, const Suite& suite) {
    if (spec == "none") return nullptr;
    if (spec == "oracle") return oracle_critic_factory(suite);
    // critic temperature defaults to 0.0 on real endpoints
    if (spec.rfind("endpoint:", 0) == 0) return endpoint_factory(spec.substr(9), 0.0);
    throw ConfigError("unknown critic spec '" + spec + "'");
}

int report_error(std::ostream& err, const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.suite_path.empty() || config.out_dir.empty())
            throw ConfigError("run needs --suite and --out");
        const Suite suite = load_suite(config.suite_path);
        if (suite.tasks.empty()) throw ConfigError("suite is empty");

        RunOptions options;
        options.gate_policy = resolve_gate(config.gate, suite.env_kind);
        options.runs_per_task = config.runs_per_task;
        options.seed_base = config.seed;
        options.concurrency = config.concurrency;

        const BackendFactory actor = actor_factory_of(config.actor, suite);
        const BackendFactory critic = critic_factory_of(config.critic, suite);

        const auto outcomes = run_suite(suite, actor, critic, options);
        std::filesystem::create_directories(config.out_dir);
        const auto trajectories = trajectories_of(outcomes);
        write_trajectory_log(config.out_dir + "/trajectories.jsonl", trajectories);

        int aborted = 0;
        for (const auto& o : outcomes)
            if (!o.trajectory.has_value()) {
                ++aborted;
                err << "aborted: task " << o.task_id << " seed " << o.seed << ": " << o.error
                    << "\n";
            }

        if (!trajectories.empty()) {
            const std::string method = config.critic == "none" ? "actor-only" : "actor-critic";
            const RunSummary summary = summarize_trajectories(method, trajectories);
            write_text_file(config.out_dir + "/summary.json", to_json(summary).dump(2) + "\n");
            out << render_summary(summary);
        }
        if (aborted > 0) {
            err << aborted << " episode(s) aborted\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

int cmd_datagen(const DatagenConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.run.suite_path.empty() || config.run.out_dir.empty())
            throw ConfigError("datagen needs --suite and --out");
        FilterConfig filter;
        filter.runs_per_task = config.run.runs_per_task;
        filter.psi = config.psi;
        filter.seed_base = config.run.seed;
        filter.strict_all_runs = config.strict;
        filter.concurrency = config.run.concurrency;
        validate_filter_config(filter);  // fail before any run

        const Suite suite = load_suite(config.run.suite_path);
        const BackendFactory actor = actor_factory_of(config.run.actor, suite);
        const std::string critic_spec =
            config.run.critic == "none" ? "oracle" : config.run.critic;
        const BackendFactory critic = critic_factory_of(critic_spec, suite);
        const GatePolicy gate = resolve_gate(config.run.gate, suite.env_kind);

        const DatagenResult result =
            run_datagen_pipeline(suite, actor, critic, gate, filter, config.run.out_dir);

        for (const auto& aborted : result.aborted_runs)
            err << "aborted run (counted as failed): " << aborted << "\n";
        out << "hard tasks: " << result.hard_task_ids.size() << " of " << suite.tasks.size()
            << "\n";
        out << "trajectories retained: " << result.stats.n_trajectories << "\n";
        out << "samples: " << result.stats.n_samples << " (positive " << result.stats.n_positive
            << ", negative " << result.stats.n_negative << ")\n";
        out << "dataset: " << result.dataset_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

int cmd_gen_suite(const GenSuiteConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.out_path.empty()) throw ConfigError("gen-suite needs --out");
        if (config.n_tasks < 0) throw ConfigError("n must be >= 0");
        GeneratorOptions opts;
        opts.error_probability = config.error_probability;
        opts.error_modes.clear();
        for (const auto& mode : config.error_modes)
            opts.error_modes.insert(error_mode_from_string(mode));
        opts.compliance = compliance_from_string(config.compliance);

        Suite suite;
        if (config.env_kind == "retail") {
            suite = generate_retail_suite(config.n_tasks, config.seed, opts);
        } else if (config.env_kind == "travel") {
            suite = generate_travel_suite(config.n_tasks, config.difficulty, config.seed, opts);
        } else {
            throw ConfigError("env must be retail or travel");
        }
        write_suite(config.out_path, suite);
        out << "wrote " << suite.tasks.size() << " task(s) to " << config.out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

int cmd_eval(const std::vector<std::string>& log_paths, const std::string& report_path,
             std::ostream& out, std::ostream& err) {
    try {
        if (log_paths.empty() || log_paths.size() > 2)
            throw ConfigError("eval takes one or two trajectory logs");
        std::vector<RunSummary> summaries;
        for (std::size_t i = 0; i < log_paths.size(); ++i) {
            const auto trajectories = read_trajectory_log(log_paths[i]);
            const std::string method =
                log_paths.size() == 2 ? (i == 0 ? "baseline" : "treated") : "run";
            summaries.push_back(summarize_trajectories(method, trajectories));
            out << "== " << log_paths[i] << "\n" << render_summary(summaries.back());
        }
        if (summaries.size() == 2) {
            const UpliftReport report = uplift_report(summaries[0], summaries[1]);
            out << "\n" << report.text;
            if (!report_path.empty())
                write_text_file(report_path, report.machine.dump(2) + "\n");
        } else if (!report_path.empty()) {
            write_text_file(report_path, to_json(summaries[0]).dump(2) + "\n");
        }
        return 0;
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

int cmd_inspect(const std::string& log_path, const std::string& task_filter,
                std::int64_t seed_filter, std::ostream& out, std::ostream& err) {
    try {
        const auto trajectories = read_trajectory_log(log_path);
        bool any = false;
        for (const auto& t : trajectories) {
            if (!task_filter.empty() && t.task_id != task_filter) continue;
            if (seed_filter != 0 && t.seed != seed_filter) continue;
            any = true;
            out << "# task " << t.task_id << ", seed " << t.seed;
            if (t.reward.has_value()) out << ", reward " << t.reward->value.str();
            out << (t.terminated ? "" : " (unterminated)") << "\n";
            for (const auto& step : t.steps) {
                out << render_observation(step.observation) << "\n";
                if (step.action.verdict.has_value()) {
                    out << "[proposal] " << format_action(step.action.proposal) << "\n";
                    out << "[critic " << to_string(step.action.verdict->decision) << "] "
                        << step.action.verdict->raw_output << "\n";
                }
                out << render_action_line(step.action.final_action) << "\n";
            }
            out << "\n";
        }
        if (!any) err << "no matching trajectories\n";
        return any ? 0 : 1;
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

}  // namespace criticgate
