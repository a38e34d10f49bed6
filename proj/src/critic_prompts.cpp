#include "criticgate/critic_prompts.hpp"

#include "criticgate/critic_prompt_text.hpp"
#include "criticgate/errors.hpp"

namespace criticgate {

namespace {

std::string replace_once(std::string text, const std::string& placeholder,
                         const std::string& value) {
    const auto pos = text.find(placeholder);
    if (pos == std::string::npos)
        throw InvariantViolation("template is missing placeholder " + placeholder);
    return text.substr(0, pos) + value + text.substr(pos + placeholder.size());
}

}  // namespace

CriticPrompt build_critic_prompt(const std::string& env_kind, const std::string& history,
                                 const ActionProposal& proposal, const std::string& context_text,
                                 const std::string& travel_aspect,
                                 const std::string& current_time) {
    validate_action(proposal);
    if (current_time.empty())
        throw PreconditionError("missing placeholder value: current time");
    const std::string action_text = format_action(proposal);

    if (env_kind == "retail") {
        if (context_text.empty())
            throw PreconditionError("missing placeholder value: policies");
        CriticPrompt prompt;
        prompt.system = replace_once(kRetailCriticSystemTemplate, kDefaultCriticTime, current_time);
        prompt.user = kRetailCriticUserTemplate;
        prompt.user = replace_once(prompt.user, "<proposed action>", action_text);
        prompt.user = replace_once(prompt.user, "<policies>", context_text);
        prompt.user = replace_once(prompt.user, "<conversation history>", history);
        return prompt;
    }
    if (env_kind == "travel") {
        if (context_text.empty())
            throw PreconditionError("missing placeholder value: options");
        std::string aspect = travel_aspect;
        if (aspect.empty())
            aspect = proposal.kind == ActionKind::recommendation ? proposal.aspect : "(none)";
        CriticPrompt prompt;
        prompt.system = kTravelCriticSystemTemplate;
        prompt.user = kTravelCriticUserTemplate;
        prompt.user = replace_once(prompt.user, "<travel aspect>", aspect);
        prompt.user = replace_once(prompt.user, "<recommendation>", action_text);
        prompt.user = replace_once(prompt.user, "<options>", context_text);
        prompt.user = replace_once(prompt.user, "<conversation history>", history);
        return prompt;
    }
    throw PreconditionError("unknown environment kind '" + env_kind + "'");
}

}  // namespace criticgate
