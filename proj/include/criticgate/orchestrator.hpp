#pragma once

#include "criticgate/backends.hpp"
#include "criticgate/critic_prompts.hpp"
#include "criticgate/environment.hpp"
#include "criticgate/model.hpp"

#include <string>

namespace criticgate {

// When the critic is consulted. state_mutating fires on tool calls the
// environment registers as state-changing; final_recommendation fires on
// aspect recommendations. `never` is behaviorally identical to running
// without a critic.
enum class GatePolicy { state_mutating, final_recommendation, always, never };

std::string to_string(GatePolicy p);
GatePolicy gate_policy_from_string(const std::string& s);

struct EpisodeConfig {
    bool critic_enabled = false;
    GatePolicy gate_policy = GatePolicy::never;
    int horizon = 1;
    std::int64_t seed = 0;
    std::string critic_time = kDefaultCriticTime;
};

struct EpisodeResult {
    Trajectory trajectory;
    RewardValue reward;
    int intervention_count = 0;  // turns with gate = 1
    int revision_count = 0;      // turns with a revise verdict
};

// The intervention gate. Throws UnknownToolError when a tool-call proposal
// names a tool the environment does not register.
int should_intervene(const ActionProposal& proposal, const Environment& env, GatePolicy policy);

// One revision given (history, proposal, feedback). The returned action is
// final regardless of content; callers must not loop. Precondition:
// verdict.decision == revise.
ActionProposal revise_with_feedback(ModelBackend& actor, const std::string& actor_system_prompt,
                                    const std::string& history, const ActionProposal& proposal,
                                    const CriticVerdict& verdict, const std::string& task_id,
                                    int turn, std::int64_t seed);

// Drives one episode: per turn, actor proposal -> gate -> optional critic
// feedback -> optional single revision -> environment execution, until the
// environment terminates or the horizon is exhausted (the latter is not an
// error; reward is evaluated on the state reached). The environment must be
// freshly reset for the task; critic must be present iff cfg.critic_enabled.
// Backend failures abort the episode with a BackendError carrying the turn.
EpisodeResult run_episode(const TaskSpec& task, ModelBackend& actor, ModelBackend* critic,
                          Environment& env, const EpisodeConfig& cfg);

}  // namespace criticgate
