#include "criticgate/backends.hpp"

#include "criticgate/hash.hpp"
#include "criticgate/serialize.hpp"

#include <algorithm>

namespace criticgate {

namespace {

std::string ltrim(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
    return s.substr(i);
}

}  // namespace

CriticVerdict parse_verdict(const std::string& raw) {
    CriticVerdict v;
    v.raw_output = raw;
    const std::string text = ltrim(raw);
    const std::string approve_tag = "[APPROVE]";
    const std::string revise_tag = "[REVISE]";
    if (text.rfind(approve_tag, 0) == 0) {
        v.decision = Decision::approve;
        return v;
    }
    v.decision = Decision::revise;
    if (text.rfind(revise_tag, 0) == 0) {
        v.guidance = ltrim(text.substr(revise_tag.size()));
        if (v.guidance.empty()) v.guidance = raw;  // tag-only output
        return v;
    }
    // Untagged output: treat as revise-with-guidance; never a silent approval.
    v.guidance = raw.empty() ? "(critic returned no text)" : raw;
    return v;
}

std::string to_string(ErrorMode m) {
    switch (m) {
        case ErrorMode::violate_constraint: return "violate_constraint";
        case ErrorMode::hallucinate_constraint: return "hallucinate_constraint";
        case ErrorMode::suboptimal_choice: return "suboptimal_choice";
    }
    throw InvariantViolation("unknown ErrorMode");
}

ErrorMode error_mode_from_string(const std::string& s) {
    if (s == "violate_constraint") return ErrorMode::violate_constraint;
    if (s == "hallucinate_constraint") return ErrorMode::hallucinate_constraint;
    if (s == "suboptimal_choice") return ErrorMode::suboptimal_choice;
    throw ParseError("error_mode", "unknown error mode '" + s + "'");
}

std::string to_string(Compliance c) {
    return c == Compliance::complies_with_guidance ? "complies_with_guidance"
                                                   : "ignores_guidance";
}

Compliance compliance_from_string(const std::string& s) {
    if (s == "complies_with_guidance") return Compliance::complies_with_guidance;
    if (s == "ignores_guidance") return Compliance::ignores_guidance;
    throw ParseError("compliance", "unknown compliance '" + s + "'");
}

std::uint64_t ScriptedActorProgram::digest() const {
    return fnv1a(to_json(*this).dump());
}

void validate_program(const ScriptedActorProgram& program) {
    if (program.steps.empty()) throw InvariantViolation("scripted program has no steps");
    if (program.error_probability < 0.0 || program.error_probability > 1.0)
        throw InvariantViolation("error_probability outside [0,1]");
    for (const auto& [turn, mode] : program.error_schedule) {
        if (turn < 1 || turn > static_cast<int>(program.steps.size()))
            throw InvariantViolation("error_schedule references invalid turn " +
                                     std::to_string(turn));
        if (!program.error_modes.count(mode))
            throw InvariantViolation("error_schedule uses a mode outside error_modes");
    }
    for (const auto& step : program.steps) {
        validate_action(step.intended);
        for (const auto& [mode, action] : step.perturbations) validate_action(action);
    }
}

Json to_json(const ScriptedActorProgram& program) {
    Json steps = Json::array();
    for (const auto& step : program.steps) {
        Json perturbations = Json::object();
        for (const auto& [mode, action] : step.perturbations)
            perturbations[to_string(mode)] = to_json(action);
        steps.push_back(Json{{"intended", to_json(step.intended)},
                             {"perturbations", perturbations}});
    }
    Json modes = Json::array();
    for (const auto& mode : program.error_modes) modes.push_back(to_string(mode));
    Json schedule = Json::object();
    for (const auto& [turn, mode] : program.error_schedule)
        schedule[std::to_string(turn)] = to_string(mode);
    return Json{{"compliance", to_string(program.compliance)},
                {"error_modes", modes},
                {"error_probability", program.error_probability},
                {"error_schedule", schedule},
                {"steps", steps}};
}

ScriptedActorProgram program_from_json(const Json& j, const std::string& where) {
    ScriptedActorProgram program;
    program.compliance = compliance_from_string(j.value("compliance", "complies_with_guidance"));
    for (const auto& m : j.value("error_modes", Json::array()))
        program.error_modes.insert(error_mode_from_string(m.get<std::string>()));
    program.error_probability = j.value("error_probability", 0.0);
    const Json schedule_json = j.value("error_schedule", Json::object());
    for (const auto& [turn, mode] : schedule_json.items())
        program.error_schedule[std::stoi(turn)] = error_mode_from_string(mode.get<std::string>());
    for (const auto& sj : j.at("steps")) {
        ScriptedStep step;
        step.intended = action_from_json(sj.at("intended"), where + ".intended");
        const Json perturbations_json = sj.value("perturbations", Json::object());
        for (const auto& [mode, action] : perturbations_json.items())
            step.perturbations[error_mode_from_string(mode)] =
                action_from_json(action, where + ".perturbations." + mode);
        program.steps.push_back(std::move(step));
    }
    try {
        validate_program(program);
    } catch (const InvariantViolation& e) {
        throw ParseError(where, e.what());
    }
    return program;
}

namespace {

// The possibly-perturbed action the program produces at `turn` before any
// guidance is applied.
ActionProposal unguided_step(const ScriptedActorProgram& program, int turn, std::int64_t seed) {
    const ScriptedStep& step = program.steps[static_cast<std::size_t>(turn - 1)];
    std::optional<ErrorMode> mode;
    auto scheduled = program.error_schedule.find(turn);
    if (scheduled != program.error_schedule.end()) {
        mode = scheduled->second;
    } else if (program.error_probability > 0.0 && !program.error_modes.empty()) {
        const std::uint64_t base =
            mix(program.digest(), mix(static_cast<std::uint64_t>(seed),
                                      static_cast<std::uint64_t>(turn)));
        if (to_unit(base) < program.error_probability) {
            // Only modes this step can actually perturb are eligible.
            std::vector<ErrorMode> eligible;
            for (const auto& m : program.error_modes)
                if (step.perturbations.count(m)) eligible.push_back(m);
            if (!eligible.empty())
                mode = eligible[splitmix64(base) % eligible.size()];
        }
    }
    if (mode && step.perturbations.count(*mode)) return step.perturbations.at(*mode);
    return step.intended;
}

}  // namespace

ActionProposal scripted_actor_step(const ScriptedActorProgram& program, int turn,
                                   std::int64_t seed, const std::string& guidance) {
    if (turn < 1 || turn > static_cast<int>(program.steps.size()))
        throw PreconditionError("scripted turn " + std::to_string(turn) +
                                " outside program of length " +
                                std::to_string(program.steps.size()));
    if (!guidance.empty() && program.compliance == Compliance::complies_with_guidance)
        return program.steps[static_cast<std::size_t>(turn - 1)].intended;
    return unguided_step(program, turn, seed);
}

std::string ScriptedActor::complete(const BackendRequest& request) {
    auto it = programs_.find(request.task_id);
    if (it == programs_.end())
        throw PreconditionError("no scripted program for task '" + request.task_id + "'");
    return format_action(scripted_actor_step(it->second, request.turn, request.seed,
                                             request.guidance));
}

namespace {

std::string render_template(const std::string& tmpl, const std::string& finding) {
    const std::string marker = "{finding}";
    const auto pos = tmpl.find(marker);
    if (pos == std::string::npos) return tmpl;
    return tmpl.substr(0, pos) + finding + tmpl.substr(pos + marker.size());
}

}  // namespace

std::string OracleCritic::complete(const BackendRequest& request) {
    if (request.proposal_text.empty())
        throw PreconditionError("oracle critic called without a proposal");
    const ActionProposal proposal = parse_action(request.proposal_text);

    // Forward simulation: proposal now, then the remaining intended script.
    auto sim = env_.clone();
    bool terminated = sim->execute(proposal).terminated;
    for (int t = request.turn + 1;
         t <= static_cast<int>(program_.steps.size()) && !terminated; ++t)
        terminated = sim->execute(program_.steps[static_cast<std::size_t>(t - 1)].intended)
                         .terminated;
    if (sim->evaluate().value == Rational(1))
        return "[APPROVE] The proposed action keeps the task on a successful path.";

    std::string guidance;
    for (const auto& finding : env_.diagnose(proposal)) {
        const std::string* tmpl = &templates_.fallback;
        if (finding.category == "policy_violation") tmpl = &templates_.policy_violation;
        else if (finding.category == "preference_violation") tmpl = &templates_.preference_violation;
        else if (finding.category == "suboptimal") tmpl = &templates_.suboptimal;
        else if (finding.category == "redundant") tmpl = &templates_.redundant;
        if (!guidance.empty()) guidance += " ";
        guidance += render_template(*tmpl, finding.message);
    }
    if (guidance.empty()) guidance = templates_.fallback;
    return "[REVISE] " + guidance;
}

std::string ScriptedTextBackend::complete(const BackendRequest&) {
    if (responses_.empty()) throw PreconditionError("scripted text backend has no responses");
    const std::string& response = responses_[next_ % responses_.size()];
    ++next_;
    return response;
}

}  // namespace criticgate
