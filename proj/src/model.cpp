#include "criticgate/model.hpp"

#include <sstream>

namespace criticgate {

std::string to_string(Source s) {
    switch (s) {
        case Source::user: return "user";
        case Source::tool: return "tool";
        case Source::system: return "system";
    }
    throw InvariantViolation("unknown Source");
}

Source source_from_string(const std::string& s) {
    if (s == "user") return Source::user;
    if (s == "tool") return Source::tool;
    if (s == "system") return Source::system;
    throw ParseError("source", "expected user|tool|system, got '" + s + "'");
}

std::string to_string(ActionKind k) {
    switch (k) {
        case ActionKind::message: return "message";
        case ActionKind::tool_call: return "tool_call";
        case ActionKind::recommendation: return "recommendation";
    }
    throw InvariantViolation("unknown ActionKind");
}

ActionKind action_kind_from_string(const std::string& s) {
    if (s == "message") return ActionKind::message;
    if (s == "tool_call") return ActionKind::tool_call;
    if (s == "recommendation") return ActionKind::recommendation;
    throw ParseError("kind", "expected message|tool_call|recommendation, got '" + s + "'");
}

std::string to_string(Decision d) {
    return d == Decision::approve ? "approve" : "revise";
}

Decision decision_from_string(const std::string& s) {
    if (s == "approve") return Decision::approve;
    if (s == "revise") return Decision::revise;
    throw ParseError("decision", "expected approve|revise, got '" + s + "'");
}

ActionProposal ActionProposal::make_message(std::string text) {
    ActionProposal a;
    a.kind = ActionKind::message;
    a.text = std::move(text);
    return a;
}

ActionProposal ActionProposal::make_tool_call(std::string tool,
                                              std::map<std::string, std::string> args) {
    ActionProposal a;
    a.kind = ActionKind::tool_call;
    a.tool_name = std::move(tool);
    a.tool_args = std::move(args);
    return a;
}

ActionProposal ActionProposal::make_recommendation(std::string aspect, std::string option_id) {
    ActionProposal a;
    a.kind = ActionKind::recommendation;
    a.aspect = std::move(aspect);
    a.option_id = std::move(option_id);
    return a;
}

void validate_action(const ActionProposal& a) {
    const bool has_tool = !a.tool_name.empty() || !a.tool_args.empty();
    const bool has_rec = !a.aspect.empty() || !a.option_id.empty();
    switch (a.kind) {
        case ActionKind::message:
            if (has_tool || has_rec)
                throw InvariantViolation("message action carries tool or recommendation fields");
            break;
        case ActionKind::tool_call:
            if (a.tool_name.empty())
                throw InvariantViolation("tool_call action without tool_name");
            if (!a.text.empty() || has_rec)
                throw InvariantViolation("tool_call action carries text or recommendation fields");
            for (const auto& [key, value] : a.tool_args) {
                if (key.empty()) throw InvariantViolation("tool arg with empty key");
                if (value.find('\n') != std::string::npos)
                    throw InvariantViolation("tool arg '" + key + "' contains a newline");
            }
            break;
        case ActionKind::recommendation:
            if (a.aspect.empty() || a.option_id.empty())
                throw InvariantViolation("recommendation action needs aspect and option_id");
            if (!a.text.empty() || has_tool)
                throw InvariantViolation("recommendation action carries text or tool fields");
            break;
    }
}

std::string format_action(const ActionProposal& a) {
    validate_action(a);
    switch (a.kind) {
        case ActionKind::message:
            return a.text;
        case ActionKind::tool_call: {
            std::string out = "```tool " + a.tool_name + "\n";
            for (const auto& [key, value] : a.tool_args) out += key + ": " + value + "\n";
            out += "```";
            return out;
        }
        case ActionKind::recommendation:
            return "```recommend\naspect: " + a.aspect + "\noption_id: " + a.option_id + "\n```";
    }
    throw InvariantViolation("unknown ActionKind");
}

namespace {

// Splits the body of a fenced block into "key: value" pairs.
std::map<std::string, std::string> parse_kv_lines(const std::string& body,
                                                  const std::string& where) {
    std::map<std::string, std::string> out;
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto sep = line.find(": ");
        if (sep == std::string::npos || sep == 0)
            throw ParseError(where, "expected 'key: value', got '" + line + "'");
        out[line.substr(0, sep)] = line.substr(sep + 2);
    }
    return out;
}

}  // namespace

ActionProposal parse_action(const std::string& text) {
    const std::string tool_open = "```tool ";
    const std::string rec_open = "```recommend\n";
    const std::string fence = "```";

    auto find_block = [&](const std::string& opener) -> std::optional<std::pair<size_t, size_t>> {
        const auto start = text.find(opener);
        if (start == std::string::npos) return std::nullopt;
        const auto body_start = start + opener.size();
        const auto end = text.find(fence, body_start);
        if (end == std::string::npos)
            throw ParseError("action", "unterminated fenced block");
        return std::make_pair(body_start, end);
    };

    if (auto span = find_block(tool_open)) {
        const auto [body_start, end] = *span;
        const auto nl = text.find('\n', body_start);
        if (nl == std::string::npos || nl > end)
            throw ParseError("action", "tool block missing argument lines");
        const std::string name = text.substr(body_start, nl - body_start);
        if (name.empty()) throw ParseError("action", "tool block without a tool name");
        auto args = parse_kv_lines(text.substr(nl + 1, end - nl - 1), "tool args");
        return ActionProposal::make_tool_call(name, std::move(args));
    }
    if (auto span = find_block(rec_open)) {
        const auto [body_start, end] = *span;
        auto kv = parse_kv_lines(text.substr(body_start, end - body_start), "recommendation");
        if (!kv.count("aspect") || !kv.count("option_id"))
            throw ParseError("recommendation", "missing aspect or option_id");
        return ActionProposal::make_recommendation(kv["aspect"], kv["option_id"]);
    }
    return ActionProposal::make_message(text);
}

void validate_verdict(const CriticVerdict& v) {
    if (v.decision == Decision::revise && v.guidance.empty())
        throw InvariantViolation("revise verdict with empty guidance");
    if (v.decision == Decision::approve && !v.guidance.empty())
        throw InvariantViolation("approve verdict with non-empty guidance");
}

void validate_record(const InterventionRecord& rec) {
    validate_action(rec.proposal);
    validate_action(rec.final_action);
    if (rec.gate != 0 && rec.gate != 1)
        throw InvariantViolation("gate must be 0 or 1");
    if (rec.gate == 0) {
        if (rec.verdict.has_value())
            throw InvariantViolation("gate=0 step carries a verdict");
        if (!(rec.final_action == rec.proposal))
            throw InvariantViolation("gate=0 step with final_action != proposal");
    } else {
        if (!rec.verdict.has_value())
            throw InvariantViolation("gate=1 step without verdict");
        validate_verdict(*rec.verdict);
        if (rec.verdict->decision == Decision::approve && !(rec.final_action == rec.proposal))
            throw InvariantViolation("approved step with final_action != proposal");
    }
}

void append_step(Trajectory& trajectory, Observation obs, InterventionRecord rec) {
    if (trajectory.terminated)
        throw PreconditionError("append after termination of task " + trajectory.task_id);
    const int expected = static_cast<int>(trajectory.steps.size()) + 1;
    if (obs.turn_index != expected)
        throw PreconditionError("turn index " + std::to_string(obs.turn_index) +
                                ", expected " + std::to_string(expected));
    if (rec.turn_index != obs.turn_index)
        throw InvariantViolation("record turn index differs from observation turn index");
    if ((obs.source == Source::tool) != obs.tool_result.has_value())
        throw InvariantViolation("tool_result must be present exactly for tool observations");
    validate_record(rec);
    trajectory.steps.push_back(TrajectoryStep{std::move(obs), std::move(rec)});
}

std::string render_observation(const Observation& obs) {
    std::string line = "[" + to_string(obs.source) + "] " + obs.content;
    if (obs.tool_result.has_value()) line += " " + obs.tool_result->dump();
    return line;
}

std::string render_action_line(const ActionProposal& action) {
    return "[assistant] " + format_action(action);
}

std::string render_history(const Trajectory& trajectory) {
    std::string out;
    for (const auto& step : trajectory.steps) {
        if (!out.empty()) out += "\n";
        out += render_observation(step.observation);
        out += "\n" + render_action_line(step.action.final_action);
    }
    return out;
}

std::string render_history_prefix(const Trajectory& trajectory, std::size_t n_steps,
                                  const Observation& pending) {
    std::string out;
    for (std::size_t i = 0; i < n_steps && i < trajectory.steps.size(); ++i) {
        if (!out.empty()) out += "\n";
        out += render_observation(trajectory.steps[i].observation);
        out += "\n" + render_action_line(trajectory.steps[i].action.final_action);
    }
    if (!out.empty()) out += "\n";
    out += render_observation(pending);
    return out;
}

void validate_task_spec(const TaskSpec& spec) {
    if (spec.task_id.empty()) throw InvariantViolation("task_id empty");
    if (spec.environment_id.empty()) throw InvariantViolation("environment_id empty");
    if (spec.horizon < 1) throw InvariantViolation("horizon must be >= 1");
}

}  // namespace criticgate
