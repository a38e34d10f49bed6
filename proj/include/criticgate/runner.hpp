#pragma once

#include "criticgate/orchestrator.hpp"
#include "criticgate/suite.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace criticgate {

// Builds (or hands out a shared) backend for one episode. The environment
// reference is alive for the episode's duration; per-episode backends such as
// the oracle critic hold on to it.
using BackendFactory =
    std::function<std::shared_ptr<ModelBackend>(const TaskDocument& task, Environment& env)>;

struct EpisodeOutcome {
    std::string task_id;
    std::int64_t seed = 0;
    std::optional<Trajectory> trajectory;  // absent when the episode aborted
    int intervention_count = 0;
    int revision_count = 0;
    std::string error;  // non-empty iff aborted

    bool succeeded() const {
        return trajectory.has_value() && trajectory->reward.has_value() &&
               trajectory->reward->value == Rational(1);
    }
};

struct RunOptions {
    GatePolicy gate_policy = GatePolicy::state_mutating;
    int runs_per_task = 5;       // K
    std::int64_t seed_base = 0;  // run k uses seed_base + k
    int concurrency = 1;
    std::string critic_time = kDefaultCriticTime;
};

// Executes runs_per_task seeded episodes per task. Output order is fixed
// (task order, then k = 1..K) regardless of concurrency; environments are
// per-episode, backends come from the factories. critic_factory == nullptr
// runs actor-only.
std::vector<EpisodeOutcome> run_suite(const Suite& suite, const BackendFactory& actor_factory,
                                      const BackendFactory& critic_factory,
                                      const RunOptions& options);

// Completed trajectories in outcome order (aborted episodes are skipped).
std::vector<Trajectory> trajectories_of(const std::vector<EpisodeOutcome>& outcomes);

// A shared scripted actor over all of the suite's per-task programs.
BackendFactory scripted_actor_factory(const Suite& suite);

// A fresh oracle critic per episode, bound to that episode's environment.
BackendFactory oracle_critic_factory(const Suite& suite);

}  // namespace criticgate
