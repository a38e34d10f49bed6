#include "criticgate/orchestrator.hpp"

namespace criticgate {

std::string to_string(GatePolicy p) {
    switch (p) {
        case GatePolicy::state_mutating: return "state_mutating";
        case GatePolicy::final_recommendation: return "final_recommendation";
        case GatePolicy::always: return "always";
        case GatePolicy::never: return "never";
    }
    throw InvariantViolation("unknown GatePolicy");
}

GatePolicy gate_policy_from_string(const std::string& s) {
    if (s == "state_mutating") return GatePolicy::state_mutating;
    if (s == "final_recommendation") return GatePolicy::final_recommendation;
    if (s == "always") return GatePolicy::always;
    if (s == "never") return GatePolicy::never;
    throw ParseError("gate_policy",
                     "expected state_mutating|final_recommendation|always|never, got '" + s + "'");
}

int should_intervene(const ActionProposal& proposal, const Environment& env, GatePolicy policy) {
    validate_action(proposal);
    switch (policy) {
        case GatePolicy::never:
            return 0;
        case GatePolicy::always:
            return 1;
        case GatePolicy::final_recommendation:
            return proposal.kind == ActionKind::recommendation ? 1 : 0;
        case GatePolicy::state_mutating:
            if (proposal.kind != ActionKind::tool_call) return 0;
            if (!env.has_tool(proposal.tool_name)) throw UnknownToolError(proposal.tool_name);
            return env.is_state_mutating(proposal.tool_name) ? 1 : 0;
    }
    throw InvariantViolation("unknown GatePolicy");
}

ActionProposal revise_with_feedback(ModelBackend& actor, const std::string& actor_system_prompt,
                                    const std::string& history, const ActionProposal& proposal,
                                    const CriticVerdict& verdict, const std::string& task_id,
                                    int turn, std::int64_t seed) {
    if (verdict.decision != Decision::revise)
        throw PreconditionError("revise_with_feedback called with an approve verdict");
    BackendRequest request;
    request.system_prompt = actor_system_prompt;
    request.user_prompt = history;
    request.task_id = task_id;
    request.turn = turn;
    request.seed = seed;
    request.proposal_text = format_action(proposal);
    request.guidance = verdict.guidance;
    return parse_action(actor.complete(request));
}

EpisodeResult run_episode(const TaskSpec& task, ModelBackend& actor, ModelBackend* critic,
                          Environment& env, const EpisodeConfig& cfg) {
    if (cfg.horizon < 1) throw PreconditionError("horizon must be >= 1");
    if (cfg.critic_enabled && critic == nullptr)
        throw PreconditionError("critic_enabled without a critic backend");
    if (!cfg.critic_enabled && critic != nullptr)
        throw PreconditionError("critic backend supplied with critic_enabled = false");

    EpisodeResult result;
    result.trajectory.task_id = task.task_id;
    result.trajectory.seed = cfg.seed;
    const std::string actor_system_prompt = env.actor_instructions();

    Observation obs = env.initial_observation();
    for (int turn = 1; turn <= cfg.horizon; ++turn) {
        obs.turn_index = turn;
        const std::string history =
            render_history_prefix(result.trajectory, result.trajectory.steps.size(), obs);

        InterventionRecord rec;
        rec.turn_index = turn;
        try {
            BackendRequest request;
            request.system_prompt = actor_system_prompt;
            request.user_prompt = history;
            request.task_id = task.task_id;
            request.turn = turn;
            request.seed = cfg.seed;
            rec.proposal = parse_action(actor.complete(request));

            rec.gate = cfg.critic_enabled
                           ? should_intervene(rec.proposal, env, cfg.gate_policy)
                           : 0;
            if (rec.gate == 1) {
                const CriticPrompt prompt = build_critic_prompt(
                    env.kind(), history, rec.proposal, env.critic_context(rec.proposal),
                    env.proposal_aspect(rec.proposal), cfg.critic_time);
                BackendRequest critic_request;
                critic_request.system_prompt = prompt.system;
                critic_request.user_prompt = prompt.user;
                critic_request.task_id = task.task_id;
                critic_request.turn = turn;
                critic_request.seed = cfg.seed;
                critic_request.proposal_text = format_action(rec.proposal);
                rec.verdict = parse_verdict(critic->complete(critic_request));
                if (rec.verdict->decision == Decision::revise) {
                    rec.final_action =
                        revise_with_feedback(actor, actor_system_prompt, history, rec.proposal,
                                             *rec.verdict, task.task_id, turn, cfg.seed);
                    ++result.revision_count;
                } else {
                    rec.final_action = rec.proposal;
                }
                ++result.intervention_count;
            } else {
                rec.final_action = rec.proposal;
            }
        } catch (const BackendError&) {
            throw;
        } catch (const UnknownToolError&) {
            throw;
        } catch (const Error& e) {
            throw BackendError(turn, e.what());
        }

        // The final action is executed exactly once.
        Environment::ExecutionResult exec = env.execute(rec.final_action);
        append_step(result.trajectory, std::move(obs), std::move(rec));
        if (exec.terminated) break;
        obs = std::move(exec.observation);
    }

    result.trajectory.terminated = true;  // by environment or by horizon
    result.reward = env.evaluate();
    result.trajectory.reward = result.reward;
    return result;
}

}  // namespace criticgate
