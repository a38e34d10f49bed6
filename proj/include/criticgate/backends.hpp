#pragma once

#include "criticgate/environment.hpp"
#include "criticgate/model.hpp"

#include <map>
#include <set>
#include <string>

namespace criticgate {

// What a backend sees for one completion. Real endpoint backends consume only
// the rendered prompts; scripted and oracle backends use the structured fields
// so they stay deterministic without re-parsing prompt text.
struct BackendRequest {
    std::string system_prompt;
    std::string user_prompt;
    std::string task_id;
    int turn = 0;
    std::int64_t seed = 0;
    std::string proposal_text;  // formatted proposed action, for critic calls and revisions
    std::string guidance;       // critic feedback, set for revision calls
};

// Behavioral contract shared by the actor and the critic: text in, text out.
// Scripted backends are deterministic given (program, turn, seed, guidance);
// instances must be safely shareable across concurrent episodes.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual std::string identity() const = 0;
    virtual std::string complete(const BackendRequest& request) = 0;
};

// ── Verdict wire protocol ────────────────────────────────────────────

// Total: every text maps to exactly one verdict. Leading "[APPROVE]" approves;
// leading "[REVISE]" revises with the remainder as guidance; anything else is
// treated as revise-with-guidance so an untagged critic never silently
// approves. Leading whitespace is ignored for tag detection; raw_output is
// preserved verbatim either way.
CriticVerdict parse_verdict(const std::string& raw);

// ── Scripted actor ───────────────────────────────────────────────────

enum class ErrorMode { violate_constraint, hallucinate_constraint, suboptimal_choice };

std::string to_string(ErrorMode m);
ErrorMode error_mode_from_string(const std::string& s);

enum class Compliance { complies_with_guidance, ignores_guidance };

std::string to_string(Compliance c);
Compliance compliance_from_string(const std::string& s);

struct ScriptedStep {
    ActionProposal intended;
    std::map<ErrorMode, ActionProposal> perturbations;
};

// Per-turn intended actions for one task, plus how the actor misbehaves:
// either an explicit turn -> error-mode schedule, or an independent per-turn
// error probability (seeded, stable across platforms).
struct ScriptedActorProgram {
    std::vector<ScriptedStep> steps;  // steps[turn-1]
    std::set<ErrorMode> error_modes;
    std::map<int, ErrorMode> error_schedule;
    double error_probability = 0.0;
    Compliance compliance = Compliance::complies_with_guidance;

    // Stable content digest; decorrelates probabilistic error rolls between
    // programs that share a seed.
    std::uint64_t digest() const;
};

void validate_program(const ScriptedActorProgram& program);

Json to_json(const ScriptedActorProgram& program);
ScriptedActorProgram program_from_json(const Json& j, const std::string& where);

// The intended action for `turn`, or its scheduled/rolled perturbation. When
// guidance is present and the program complies, the corrected intended action
// is returned instead. Throws PreconditionError when turn is out of range.
ActionProposal scripted_actor_step(const ScriptedActorProgram& program, int turn,
                                   std::int64_t seed, const std::string& guidance);

// Deterministic stand-in for the actor: one program per task id.
class ScriptedActor final : public ModelBackend {
public:
    explicit ScriptedActor(std::map<std::string, ScriptedActorProgram> programs)
        : programs_(std::move(programs)) {}

    std::string identity() const override { return "scripted-actor/v1"; }
    std::string complete(const BackendRequest& request) override;

private:
    const std::map<std::string, ScriptedActorProgram> programs_;
};

// ── Oracle critic ────────────────────────────────────────────────────

struct OracleGuidanceTemplates {
    std::string policy_violation =
        "The proposed action violates policy: {finding} Correct the action so it complies "
        "before executing it.";
    std::string preference_violation =
        "The proposed recommendation conflicts with the user's needs: {finding} Choose an "
        "option that satisfies every preference.";
    std::string suboptimal =
        "{finding} Recommend the cheapest option that satisfies all preferences.";
    std::string redundant = "{finding} Do not recommend again for this aspect.";
    std::string fallback =
        "This action leads away from the correct final outcome. Re-check the request and "
        "continue with the agreed steps.";
};

// Test-only critic realizing the critic role with ground-truth access: clones
// the live environment, executes the proposal, replays the remaining scripted
// intended actions and approves iff the simulated final state earns reward 1.
// Bound to a single episode's environment; share nothing.
class OracleCritic final : public ModelBackend {
public:
    OracleCritic(const Environment& env, const ScriptedActorProgram& program,
                 OracleGuidanceTemplates templates = {})
        : env_(env), program_(program), templates_(std::move(templates)) {}

    std::string identity() const override { return "oracle-critic/v1"; }
    std::string complete(const BackendRequest& request) override;

private:
    const Environment& env_;
    const ScriptedActorProgram& program_;
    const OracleGuidanceTemplates templates_;
};

// Canned-completion backend for exercising text-protocol plumbing in tests
// and offline pipelines (e.g. task-spec inference with recorded output).
class ScriptedTextBackend final : public ModelBackend {
public:
    explicit ScriptedTextBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::string identity() const override { return "scripted-text/v1"; }
    std::string complete(const BackendRequest&) override;

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

}  // namespace criticgate
