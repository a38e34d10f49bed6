#pragma once

#include "criticgate/errors.hpp"
#include "criticgate/rational.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace criticgate {

// ordered_json keeps insertion order, which is what makes every serialized
// artifact byte-stable across reruns.
using Json = nlohmann::ordered_json;

// ── Observations ─────────────────────────────────────────────────────

enum class Source { user, tool, system };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

// One input to the agent: a user utterance, a tool result, or a system notice.
// tool_result is present exactly when source == tool.
struct Observation {
    int turn_index = 0;
    Source source = Source::user;
    std::string content;
    std::optional<Json> tool_result;

    friend bool operator==(const Observation&, const Observation&) = default;
};

// ── Actions ──────────────────────────────────────────────────────────

enum class ActionKind { message, tool_call, recommendation };

std::string to_string(ActionKind k);
ActionKind action_kind_from_string(const std::string& s);

// What the actor emits, before and after critique. Exactly the fields mandated
// by `kind` are populated; tool_args is a flat map of single-line text values.
struct ActionProposal {
    ActionKind kind = ActionKind::message;
    std::string text;                           // message
    std::string tool_name;                      // tool_call
    std::map<std::string, std::string> tool_args;  // tool_call
    std::string aspect;                         // recommendation
    std::string option_id;                      // recommendation

    static ActionProposal make_message(std::string text);
    static ActionProposal make_tool_call(std::string tool,
                                         std::map<std::string, std::string> args);
    static ActionProposal make_recommendation(std::string aspect, std::string option_id);

    friend bool operator==(const ActionProposal&, const ActionProposal&) = default;
};

// Throws InvariantViolation unless exactly the kind-mandated fields are set
// and tool_args values are single-line.
void validate_action(const ActionProposal& a);

// Canonical text form: plain text for messages, a fenced block for tool calls
// and recommendations. parse_action(format_action(a)) == a for valid actions.
std::string format_action(const ActionProposal& a);
ActionProposal parse_action(const std::string& text);

// ── Critic verdicts ──────────────────────────────────────────────────

enum class Decision { approve, revise };

std::string to_string(Decision d);
Decision decision_from_string(const std::string& s);

struct CriticVerdict {
    Decision decision = Decision::approve;
    std::string guidance;    // empty iff approve
    std::string raw_output;  // full critic text, preserved verbatim

    friend bool operator==(const CriticVerdict&, const CriticVerdict&) = default;
};

void validate_verdict(const CriticVerdict& v);

// ── Intervention records ─────────────────────────────────────────────

// Per-turn record of propose → gate → (critique → revise) → execute.
// gate == 0 requires verdict absent and final_action == proposal; gate == 1
// requires a verdict. At most one verdict per turn, by construction.
struct InterventionRecord {
    int turn_index = 0;
    int gate = 0;
    ActionProposal proposal;
    std::optional<CriticVerdict> verdict;
    ActionProposal final_action;

    friend bool operator==(const InterventionRecord&, const InterventionRecord&) = default;
};

void validate_record(const InterventionRecord& rec);

// ── Rewards ──────────────────────────────────────────────────────────

struct RewardComponent {
    std::string name;   // aspect name or mismatched state path
    Rational value;
    std::string detail;

    friend bool operator==(const RewardComponent&, const RewardComponent&) = default;
};

// Trajectory quality in [0,1]. Retail-style tasks score {0,1} from a state
// match; travel-style tasks score the mean of per-aspect components in
// {0, 4/5, 1}. breakdown is always present, single component for binary tasks.
struct RewardValue {
    Rational value;
    std::vector<RewardComponent> breakdown;

    friend bool operator==(const RewardValue&, const RewardValue&) = default;
};

// ── Trajectories ─────────────────────────────────────────────────────

struct TrajectoryStep {
    Observation observation;
    InterventionRecord action;

    friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

// The unit of reward, replay and serialization: the full alternating sequence
// of observations and executed actions for one episode. Turn indices start at
// 1; values are immutable once an episode finishes.
struct Trajectory {
    std::string task_id;
    std::int64_t seed = 0;
    std::vector<TrajectoryStep> steps;
    bool terminated = false;
    std::optional<RewardValue> reward;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Appends one (observation, action) step, enforcing ordering and record
// invariants. Throws on out-of-order turn index or append after termination.
void append_step(Trajectory& trajectory, Observation obs, InterventionRecord rec);

// Deterministic role-labelled transcript, suitable for prompt embedding.
// Identical trajectories render identically byte-for-byte.
std::string render_history(const Trajectory& trajectory);

// Renders the first `n_steps` steps plus one pending observation: the history
// the actor and critic see while the episode is still running.
std::string render_history_prefix(const Trajectory& trajectory, std::size_t n_steps,
                                  const Observation& pending);

std::string render_observation(const Observation& obs);
std::string render_action_line(const ActionProposal& action);

// ── Task specifications ──────────────────────────────────────────────

// Instruction, environment binding and ground-truth success criterion; the
// unit of filtering and replay. success_criterion is environment-specific and
// validated by the environment factory.
struct TaskSpec {
    std::string task_id;
    std::string environment_id;
    std::string instruction;
    std::string user_script_id;
    Json success_criterion;
    int horizon = 1;
};

void validate_task_spec(const TaskSpec& spec);

}  // namespace criticgate
