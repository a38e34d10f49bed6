#pragma once

#include "criticgate/model.hpp"

#include <memory>
#include <string>
#include <vector>

namespace criticgate {

// A diagnostic the environment can attach to a proposal: which policy or
// preference it breaks, whether it is merely sub-optimal, and so on. Consumed
// by the oracle critic to phrase guidance.
struct Finding {
    std::string category;  // policy_violation | preference_violation | suboptimal | redundant
    std::string message;
};

// One benchmark environment instance, owned by exactly one episode. All state
// is value-typed, so clone() gives an independent deep copy (used by the
// oracle critic for forward simulation).
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string kind() const = 0;  // "retail" | "travel"

    // o_1: the simulated user's opening utterance. Consumes user-script state.
    virtual Observation initial_observation() = 0;

    virtual bool has_tool(const std::string& tool_name) const = 0;
    virtual bool is_state_mutating(const std::string& tool_name) const = 0;

    struct ExecutionResult {
        Observation observation;  // o_{t+1}; turn_index is assigned by the caller
        bool terminated = false;
    };

    // Executes the final action. Domain errors (unknown ids, invalid
    // transitions) come back as in-band error observations, never exceptions.
    virtual ExecutionResult execute(const ActionProposal& action) = 0;

    // Reward of the current state against the task's ground truth. Pure; safe
    // to call at any point, including after horizon exhaustion.
    virtual RewardValue evaluate() const = 0;

    // The <policies> / <options> text the critic prompt embeds. Derived from
    // fixture data only, never from mutable episode state, so supervision
    // samples can be re-rendered from a fresh instance.
    virtual std::string critic_context(const ActionProposal& proposal) const = 0;

    // For travel-style prompts: the aspect under consideration.
    virtual std::string proposal_aspect(const ActionProposal& proposal) const {
        return proposal.kind == ActionKind::recommendation ? proposal.aspect : "(none)";
    }

    // System-prompt body describing tools, options and the action text format
    // for real model backends.
    virtual std::string actor_instructions() const = 0;

    // Why a proposal is wrong, if the environment can tell. Empty when the
    // proposal looks locally consistent.
    virtual std::vector<Finding> diagnose(const ActionProposal& action) const = 0;

    virtual std::unique_ptr<Environment> clone() const = 0;
};

}  // namespace criticgate
