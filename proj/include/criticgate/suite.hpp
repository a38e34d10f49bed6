#pragma once

#include "criticgate/backends.hpp"
#include "criticgate/environment.hpp"
#include "criticgate/model.hpp"

#include <memory>
#include <string>
#include <vector>

namespace criticgate {

// One task fixture: the task specification plus the environment payload
// (initial state, policies / options, scripted user) and the scripted actor
// program used for deterministic runs.
struct TaskDocument {
    TaskSpec spec;
    Json environment;
    Json actor_program;
};

struct Suite {
    std::string env_kind;  // uniform across tasks
    std::vector<TaskDocument> tasks;
};

Json to_json(const TaskDocument& doc);
TaskDocument task_document_from_json(const Json& j, const std::string& where);

std::string suite_to_string(const Suite& suite);
void write_suite(const std::string& path, const Suite& suite);
Suite load_suite(const std::string& path);

// Builds a fresh per-episode environment; validates fixture payloads.
std::unique_ptr<Environment> make_environment(const TaskDocument& doc);

ScriptedActorProgram scripted_program_of(const TaskDocument& doc);

}  // namespace criticgate
