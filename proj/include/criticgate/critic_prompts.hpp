#pragma once

#include "criticgate/model.hpp"

#include <string>

namespace criticgate {

// The retail critic template pins a current time; it is exposed as a template
// variable so deployments can adjust it, defaulting to the pinned literal.
inline constexpr char kDefaultCriticTime[] = "2024-05-15 15:00:00 EST";

struct CriticPrompt {
    std::string system;
    std::string user;
};

// Renders the domain critic templates with <proposed action> / <recommendation>,
// <policies> / <options>, <conversation history> and <travel aspect> filled in.
// history may be empty; a missing policies/options value is an error.
// env_kind is "retail" or "travel".
CriticPrompt build_critic_prompt(const std::string& env_kind, const std::string& history,
                                 const ActionProposal& proposal, const std::string& context_text,
                                 const std::string& travel_aspect = "",
                                 const std::string& current_time = kDefaultCriticTime);

}  // namespace criticgate
