#include "criticgate/runner.hpp"

#include <atomic>
#include <thread>

namespace criticgate {

std::vector<EpisodeOutcome> run_suite(const Suite& suite, const BackendFactory& actor_factory,
                                      const BackendFactory& critic_factory,
                                      const RunOptions& options) {
    if (options.runs_per_task < 1) throw ConfigError("runs per task must be >= 1");
    if (!actor_factory) throw ConfigError("actor factory missing");

    const int runs = options.runs_per_task;
    const std::size_t total = suite.tasks.size() * static_cast<std::size_t>(runs);
    std::vector<EpisodeOutcome> outcomes(total);
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= total) return;
            const TaskDocument& task = suite.tasks[index / static_cast<std::size_t>(runs)];
            const int k = static_cast<int>(index % static_cast<std::size_t>(runs)) + 1;
            EpisodeOutcome& out = outcomes[index];
            out.task_id = task.spec.task_id;
            out.seed = options.seed_base + k;
            try {
                auto env = make_environment(task);
                auto actor = actor_factory(task, *env);
                std::shared_ptr<ModelBackend> critic;
                if (critic_factory) critic = critic_factory(task, *env);
                EpisodeConfig cfg;
                cfg.critic_enabled = critic != nullptr;
                cfg.gate_policy = options.gate_policy;
                cfg.horizon = task.spec.horizon;
                cfg.seed = out.seed;
                cfg.critic_time = options.critic_time;
                EpisodeResult result = run_episode(task.spec, *actor, critic.get(), *env, cfg);
                out.trajectory = std::move(result.trajectory);
                out.intervention_count = result.intervention_count;
                out.revision_count = result.revision_count;
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };

    const int jobs = options.concurrency > 1 ? options.concurrency : 1;
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return outcomes;
}

std::vector<Trajectory> trajectories_of(const std::vector<EpisodeOutcome>& outcomes) {
    std::vector<Trajectory> out;
    out.reserve(outcomes.size());
    for (const auto& o : outcomes)
        if (o.trajectory.has_value()) out.push_back(*o.trajectory);
    return out;
}

BackendFactory scripted_actor_factory(const Suite& suite) {
    std::map<std::string, ScriptedActorProgram> programs;
    for (const auto& task : suite.tasks)
        programs[task.spec.task_id] = scripted_program_of(task);
    auto shared = std::make_shared<ScriptedActor>(std::move(programs));
    return [shared](const TaskDocument&, Environment&) { return shared; };
}

BackendFactory oracle_critic_factory(const Suite& suite) {
    auto programs = std::make_shared<std::map<std::string, ScriptedActorProgram>>();
    for (const auto& task : suite.tasks)
        (*programs)[task.spec.task_id] = scripted_program_of(task);
    return [programs](const TaskDocument& task, Environment& env) -> std::shared_ptr<ModelBackend> {
        auto it = programs->find(task.spec.task_id);
        if (it == programs->end())
            throw ConfigError("no program for task " + task.spec.task_id);
        return std::make_shared<OracleCritic>(env, it->second);
    };
}

}  // namespace criticgate
