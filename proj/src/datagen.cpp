#include "criticgate/datagen.hpp"

#include "criticgate/critic_prompts.hpp"
#include "criticgate/serialize.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

namespace criticgate {

void validate_filter_config(const FilterConfig& cfg) {
    if (cfg.runs_per_task < 1) throw ConfigError("K must be >= 1");
    if (cfg.psi < 1 || cfg.psi > cfg.runs_per_task)
        throw ConfigError("psi must satisfy 1 <= psi <= K (psi=" + std::to_string(cfg.psi) +
                          ", K=" + std::to_string(cfg.runs_per_task) + ")");
}

Json to_json(const DatasetStats& stats) {
    Json per_domain = Json::object();
    for (const auto& [domain, s] : stats.per_domain)
        per_domain[domain] = Json{{"n_trajectories", s.n_trajectories},
                                  {"n_samples", s.n_samples},
                                  {"n_positive", s.n_positive},
                                  {"n_negative", s.n_negative}};
    return Json{{"schema", "criticgate.dataset_stats.v1"},
                {"n_trajectories", stats.n_trajectories},
                {"n_samples", stats.n_samples},
                {"n_positive", stats.n_positive},
                {"n_negative", stats.n_negative},
                {"per_domain", per_domain}};
}

HardTaskFilterResult filter_hard_tasks(const Suite& suite, const BackendFactory& actor_factory,
                                       const FilterConfig& cfg) {
    validate_filter_config(cfg);
    RunOptions options;
    options.gate_policy = GatePolicy::never;
    options.runs_per_task = cfg.runs_per_task;
    options.seed_base = cfg.seed_base;
    options.concurrency = cfg.concurrency;

    HardTaskFilterResult result;
    result.runs = run_suite(suite, actor_factory, nullptr, options);

    for (const auto& outcome : result.runs) {
        // An aborted episode counts as a failed run (reward treated as 0).
        if (!outcome.succeeded()) ++result.failures_per_task[outcome.task_id];
    }
    for (const auto& task : suite.tasks) {
        auto it = result.failures_per_task.find(task.spec.task_id);
        const int failures = it == result.failures_per_task.end() ? 0 : it->second;
        if (failures >= cfg.psi) result.hard_task_ids.push_back(task.spec.task_id);
    }
    return result;
}

std::vector<EpisodeOutcome> collect_ac_trajectories(const Suite& suite,
                                                    const std::vector<std::string>& hard_task_ids,
                                                    const BackendFactory& actor_factory,
                                                    const BackendFactory& critic_factory,
                                                    GatePolicy gate_policy,
                                                    const FilterConfig& cfg) {
    validate_filter_config(cfg);
    if (!critic_factory) throw ConfigError("actor-critic collection needs a critic");
    const std::set<std::string> wanted(hard_task_ids.begin(), hard_task_ids.end());
    Suite hard;
    hard.env_kind = suite.env_kind;
    for (const auto& task : suite.tasks)
        if (wanted.count(task.spec.task_id)) hard.tasks.push_back(task);
    if (hard.tasks.empty()) return {};

    RunOptions options;
    options.gate_policy = gate_policy;
    options.runs_per_task = cfg.runs_per_task;
    options.seed_base = cfg.seed_base;
    options.concurrency = cfg.concurrency;
    return run_suite(hard, actor_factory, critic_factory, options);
}

bool retain(const Trajectory& trajectory) {
    if (!trajectory.reward.has_value())
        throw PreconditionError("retain() on a trajectory without an evaluated reward");
    if (trajectory.reward->value != Rational(1)) return false;
    for (const auto& step : trajectory.steps)
        if (step.action.verdict.has_value() &&
            step.action.verdict->decision == Decision::revise)
            return true;
    return false;
}

std::vector<SupervisionSample> extract_samples(const Trajectory& trajectory,
                                               const TaskDocument& task) {
    if (!retain(trajectory))
        throw PreconditionError("extract_samples on a trajectory that is not retainable");
    // Fresh environment: critic context is fixture-derived, so re-rendering
    // from the initial instance reproduces the runtime prompt byte-for-byte.
    auto env = make_environment(task);
    std::vector<SupervisionSample> samples;
    for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
        const auto& step = trajectory.steps[i];
        if (!step.action.verdict.has_value()) continue;
        const std::string history =
            render_history_prefix(trajectory, i, step.observation);
        const CriticPrompt prompt = build_critic_prompt(
            env->kind(), history, step.action.proposal,
            env->critic_context(step.action.proposal),
            env->proposal_aspect(step.action.proposal));
        SupervisionSample sample;
        sample.prompt = prompt.system + "\n\n" + prompt.user;
        sample.completion = step.action.verdict->raw_output;
        sample.label =
            step.action.verdict->decision == Decision::revise ? "positive" : "negative";
        sample.task_id = trajectory.task_id;
        sample.turn_index = step.action.turn_index;
        sample.seed = trajectory.seed;
        sample.env_kind = task.spec.environment_id;
        samples.push_back(std::move(sample));
    }
    return samples;
}

DatasetStats emit_dataset(std::vector<SupervisionSample> samples, const std::string& path) {
    std::sort(samples.begin(), samples.end(),
              [](const SupervisionSample& a, const SupervisionSample& b) {
                  if (a.task_id != b.task_id) return a.task_id < b.task_id;
                  if (a.seed != b.seed) return a.seed < b.seed;
                  return a.turn_index < b.turn_index;
              });
    std::set<std::tuple<std::string, std::int64_t, int>> seen;
    DatasetStats stats;
    std::set<std::pair<std::string, std::int64_t>> trajectories;
    std::map<std::string, std::set<std::pair<std::string, std::int64_t>>> domain_trajectories;
    std::vector<Json> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) {
        if (!seen.insert({s.task_id, s.seed, s.turn_index}).second)
            throw Error("duplicate sample for (" + s.task_id + ", seed " +
                        std::to_string(s.seed) + ", turn " + std::to_string(s.turn_index) +
                        "): pipeline bug");
        rows.push_back(Json{{"prompt", s.prompt},
                            {"completion", s.completion},
                            {"label", s.label},
                            {"task_id", s.task_id},
                            {"turn_index", s.turn_index}});
        ++stats.n_samples;
        DomainStats& domain = stats.per_domain[s.env_kind];
        ++domain.n_samples;
        if (s.label == "positive") {
            ++stats.n_positive;
            ++domain.n_positive;
        } else {
            ++stats.n_negative;
            ++domain.n_negative;
        }
        trajectories.insert({s.task_id, s.seed});
        domain_trajectories[s.env_kind].insert({s.task_id, s.seed});
    }
    stats.n_trajectories = static_cast<int>(trajectories.size());
    for (auto& [domain, s] : stats.per_domain)
        s.n_trajectories = static_cast<int>(domain_trajectories[domain].size());
    write_jsonl(path, kDatasetSchema, rows);
    return stats;
}

DatagenResult run_datagen_pipeline(const Suite& suite, const BackendFactory& actor_factory,
                                   const BackendFactory& critic_factory, GatePolicy gate_policy,
                                   const FilterConfig& cfg, const std::string& out_dir) {
    validate_filter_config(cfg);
    std::filesystem::create_directories(out_dir);

    DatagenResult result;
    result.dataset_path = out_dir + "/dataset.jsonl";
    result.filter_log_path = out_dir + "/filter_runs.jsonl";
    result.collect_log_path = out_dir + "/collect_runs.jsonl";

    HardTaskFilterResult filtered = filter_hard_tasks(suite, actor_factory, cfg);
    result.hard_task_ids = filtered.hard_task_ids;
    write_trajectory_log(result.filter_log_path, trajectories_of(filtered.runs));

    const auto collected = collect_ac_trajectories(suite, filtered.hard_task_ids, actor_factory,
                                                   critic_factory, gate_policy, cfg);
    write_trajectory_log(result.collect_log_path, trajectories_of(collected));

    auto note_aborts = [&result](const std::vector<EpisodeOutcome>& outcomes) {
        for (const auto& o : outcomes)
            if (!o.trajectory.has_value())
                result.aborted_runs.push_back(o.task_id + " seed " + std::to_string(o.seed) +
                                              ": " + o.error);
    };
    note_aborts(filtered.runs);
    note_aborts(collected);

    std::map<std::string, const TaskDocument*> tasks_by_id;
    for (const auto& task : suite.tasks) tasks_by_id[task.spec.task_id] = &task;

    // Strict mode: a hard task contributes only when all K of its
    // actor-critic runs succeeded.
    std::set<std::string> strict_eligible;
    if (cfg.strict_all_runs) {
        std::map<std::string, int> successes;
        for (const auto& outcome : collected)
            if (outcome.succeeded()) ++successes[outcome.task_id];
        for (const auto& id : filtered.hard_task_ids)
            if (successes[id] == cfg.runs_per_task) strict_eligible.insert(id);
    }

    std::vector<SupervisionSample> samples;
    for (const auto& outcome : collected) {
        if (!outcome.trajectory.has_value() || !outcome.trajectory->reward.has_value()) continue;
        if (cfg.strict_all_runs && !strict_eligible.count(outcome.task_id)) continue;
        if (!retain(*outcome.trajectory)) continue;
        const auto extracted =
            extract_samples(*outcome.trajectory, *tasks_by_id.at(outcome.task_id));
        samples.insert(samples.end(), extracted.begin(), extracted.end());
    }
    result.stats = emit_dataset(std::move(samples), result.dataset_path);
    write_text_file(out_dir + "/dataset_stats.json", to_json(result.stats).dump(2) + "\n");
    return result;
}

const char* const kTaskInferencePrompt =
    "You will be shown a raw multi-turn dialogue between a user and an assistant. Infer the "
    "latent task it demonstrates and respond with a single JSON object (no prose, no code "
    "fences) with exactly these fields: task_id (string), environment_id (string), instruction "
    "(string), user_script_id (string), success_criterion (object), horizon (integer >= 1).";

TaskSpec infer_task_spec(const std::string& raw_dialogue, ModelBackend& model) {
    BackendRequest request;
    request.system_prompt = kTaskInferencePrompt;
    request.user_prompt = raw_dialogue;
    const std::string reply = model.complete(request);
    Json parsed;
    try {
        parsed = Json::parse(reply);
    } catch (const std::exception& e) {
        throw ParseError("inferred task spec", e.what());
    }
    return task_spec_from_json(parsed, "inferred task spec");
}

}  // namespace criticgate
