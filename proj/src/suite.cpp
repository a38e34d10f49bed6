#include "criticgate/suite.hpp"

#include "criticgate/retail_env.hpp"
#include "criticgate/serialize.hpp"
#include "criticgate/travel_env.hpp"

namespace criticgate {

Json to_json(const TaskDocument& doc) {
    Json j = to_json(doc.spec);
    j["environment"] = doc.environment;
    j["actor_program"] = doc.actor_program;
    return j;
}

TaskDocument task_document_from_json(const Json& j, const std::string& where) {
    TaskDocument doc;
    doc.spec = task_spec_from_json(j, where);
    if (!j.contains("environment")) throw ParseError(where, "missing field 'environment'");
    doc.environment = Json(j.at("environment"));
    if (!j.contains("actor_program")) throw ParseError(where, "missing field 'actor_program'");
    doc.actor_program = Json(j.at("actor_program"));
    // Environment payload and success criterion must validate together.
    make_environment(doc);
    scripted_program_of(doc);
    return doc;
}

std::string suite_to_string(const Suite& suite) {
    std::vector<Json> rows;
    rows.reserve(suite.tasks.size());
    for (const auto& task : suite.tasks) rows.push_back(to_json(task));
    return jsonl_to_string(kSuiteSchema, rows);
}

void write_suite(const std::string& path, const Suite& suite) {
    write_text_file(path, suite_to_string(suite));
}

Suite load_suite(const std::string& path) {
    Suite suite;
    const auto rows = read_jsonl(path, kSuiteSchema);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        TaskDocument doc =
            task_document_from_json(rows[i], path + ":" + std::to_string(i + 2));
        if (suite.tasks.empty()) {
            suite.env_kind = doc.spec.environment_id;
        } else if (doc.spec.environment_id != suite.env_kind) {
            throw ParseError(path, "mixed environment kinds in one suite");
        }
        suite.tasks.push_back(std::move(doc));
    }
    return suite;
}

std::unique_ptr<Environment> make_environment(const TaskDocument& doc) {
    const std::string where = "task " + doc.spec.task_id;
    if (doc.spec.environment_id == "retail")
        return retail::RetailEnv::from_fixture(doc.environment, doc.spec.success_criterion, where);
    if (doc.spec.environment_id == "travel")
        return travel::TravelEnv::from_fixture(doc.environment, doc.spec.success_criterion, where);
    throw ConfigError("unknown environment '" + doc.spec.environment_id + "' in " + where);
}

ScriptedActorProgram scripted_program_of(const TaskDocument& doc) {
    return program_from_json(doc.actor_program, "task " + doc.spec.task_id + " actor_program");
}

}  // namespace criticgate
