#include "criticgate/serialize.hpp"

#include <fstream>
#include <sstream>

namespace criticgate {

namespace {

const Json& require_field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw ParseError(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const Json& j, const char* key, const std::string& where) {
    const Json& f = require_field(j, key, where);
    if (!f.is_string()) throw ParseError(where + "." + key, "expected a string");
    return f.get<std::string>();
}

std::int64_t require_int(const Json& j, const char* key, const std::string& where) {
    const Json& f = require_field(j, key, where);
    if (!f.is_number_integer()) throw ParseError(where + "." + key, "expected an integer");
    return f.get<std::int64_t>();
}

bool require_bool(const Json& j, const char* key, const std::string& where) {
    const Json& f = require_field(j, key, where);
    if (!f.is_boolean()) throw ParseError(where + "." + key, "expected a boolean");
    return f.get<bool>();
}

}  // namespace

Json to_json(const Rational& r) {
    return Json{{"num", r.num}, {"den", r.den}};
}

Rational rational_from_json(const Json& j, const std::string& where) {
    return Rational(require_int(j, "num", where), require_int(j, "den", where));
}

Json to_json(const Observation& obs) {
    Json j{{"turn_index", obs.turn_index},
           {"source", to_string(obs.source)},
           {"content", obs.content}};
    if (obs.tool_result.has_value()) j["tool_result"] = *obs.tool_result;
    return j;
}

Observation observation_from_json(const Json& j, const std::string& where) {
    Observation obs;
    obs.turn_index = static_cast<int>(require_int(j, "turn_index", where));
    obs.source = source_from_string(require_string(j, "source", where));
    obs.content = require_string(j, "content", where);
    if (j.contains("tool_result") && !j["tool_result"].is_null())
        obs.tool_result = Json(j["tool_result"]);
    if ((obs.source == Source::tool) != obs.tool_result.has_value())
        throw ParseError(where, "tool_result must be present exactly for tool observations");
    return obs;
}

Json to_json(const ActionProposal& a) {
    validate_action(a);
    Json j{{"kind", to_string(a.kind)}};
    switch (a.kind) {
        case ActionKind::message:
            j["text"] = a.text;
            break;
        case ActionKind::tool_call:
            j["tool_name"] = a.tool_name;
            j["tool_args"] = Json::object();
            for (const auto& [key, value] : a.tool_args) j["tool_args"][key] = value;
            break;
        case ActionKind::recommendation:
            j["aspect"] = a.aspect;
            j["option_id"] = a.option_id;
            break;
    }
    return j;
}

ActionProposal action_from_json(const Json& j, const std::string& where) {
    const ActionKind kind = action_kind_from_string(require_string(j, "kind", where));
    ActionProposal a;
    switch (kind) {
        case ActionKind::message:
            a = ActionProposal::make_message(require_string(j, "text", where));
            break;
        case ActionKind::tool_call: {
            std::map<std::string, std::string> args;
            const Json& raw = require_field(j, "tool_args", where);
            if (!raw.is_object()) throw ParseError(where + ".tool_args", "expected an object");
            for (const auto& [key, value] : raw.items()) {
                if (!value.is_string())
                    throw ParseError(where + ".tool_args." + key, "expected a string value");
                args[key] = value.get<std::string>();
            }
            a = ActionProposal::make_tool_call(require_string(j, "tool_name", where),
                                               std::move(args));
            break;
        }
        case ActionKind::recommendation:
            a = ActionProposal::make_recommendation(require_string(j, "aspect", where),
                                                    require_string(j, "option_id", where));
            break;
    }
    validate_action(a);
    return a;
}

Json to_json(const CriticVerdict& v) {
    return Json{{"decision", to_string(v.decision)},
                {"guidance", v.guidance},
                {"raw_output", v.raw_output}};
}

CriticVerdict verdict_from_json(const Json& j, const std::string& where) {
    CriticVerdict v;
    v.decision = decision_from_string(require_string(j, "decision", where));
    v.guidance = require_string(j, "guidance", where);
    v.raw_output = require_string(j, "raw_output", where);
    validate_verdict(v);
    return v;
}

Json to_json(const InterventionRecord& rec) {
    validate_record(rec);
    Json j{{"turn_index", rec.turn_index},
           {"gate", rec.gate},
           {"proposal", to_json(rec.proposal)},
           {"verdict", rec.verdict.has_value() ? to_json(*rec.verdict) : Json(nullptr)},
           {"final_action", to_json(rec.final_action)}};
    return j;
}

InterventionRecord record_from_json(const Json& j, const std::string& where) {
    InterventionRecord rec;
    rec.turn_index = static_cast<int>(require_int(j, "turn_index", where));
    rec.gate = static_cast<int>(require_int(j, "gate", where));
    rec.proposal = action_from_json(require_field(j, "proposal", where), where + ".proposal");
    const Json& verdict = require_field(j, "verdict", where);
    if (!verdict.is_null()) rec.verdict = verdict_from_json(verdict, where + ".verdict");
    rec.final_action =
        action_from_json(require_field(j, "final_action", where), where + ".final_action");
    validate_record(rec);
    return rec;
}

Json to_json(const RewardValue& r) {
    Json breakdown = Json::array();
    for (const auto& c : r.breakdown)
        breakdown.push_back(Json{{"name", c.name}, {"value", to_json(c.value)}, {"detail", c.detail}});
    return Json{{"value", to_json(r.value)}, {"breakdown", breakdown}};
}

RewardValue reward_from_json(const Json& j, const std::string& where) {
    RewardValue r;
    r.value = rational_from_json(require_field(j, "value", where), where + ".value");
    const Json& breakdown = require_field(j, "breakdown", where);
    if (!breakdown.is_array()) throw ParseError(where + ".breakdown", "expected an array");
    for (std::size_t i = 0; i < breakdown.size(); ++i) {
        const std::string cwhere = where + ".breakdown[" + std::to_string(i) + "]";
        RewardComponent c;
        c.name = require_string(breakdown[i], "name", cwhere);
        c.value = rational_from_json(require_field(breakdown[i], "value", cwhere), cwhere);
        c.detail = require_string(breakdown[i], "detail", cwhere);
        r.breakdown.push_back(std::move(c));
    }
    return r;
}

Json to_json(const Trajectory& t) {
    Json steps = Json::array();
    for (const auto& step : t.steps)
        steps.push_back(Json{{"observation", to_json(step.observation)},
                             {"action", to_json(step.action)}});
    return Json{{"task_id", t.task_id},
                {"seed", t.seed},
                {"steps", steps},
                {"terminated", t.terminated},
                {"reward", t.reward.has_value() ? to_json(*t.reward) : Json(nullptr)}};
}

Trajectory trajectory_from_json(const Json& j, const std::string& where) {
    Trajectory t;
    t.task_id = require_string(j, "task_id", where);
    t.seed = require_int(j, "seed", where);
    const Json& steps = require_field(j, "steps", where);
    if (!steps.is_array()) throw ParseError(where + ".steps", "expected an array");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string swhere = where + ".steps[" + std::to_string(i) + "]";
        Observation obs =
            observation_from_json(require_field(steps[i], "observation", swhere), swhere);
        InterventionRecord rec =
            record_from_json(require_field(steps[i], "action", swhere), swhere + ".action");
        append_step(t, std::move(obs), std::move(rec));
    }
    t.terminated = require_bool(j, "terminated", where);
    const Json& reward = require_field(j, "reward", where);
    if (!reward.is_null()) {
        if (!t.terminated) throw ParseError(where, "reward set on a non-terminated trajectory");
        t.reward = reward_from_json(reward, where + ".reward");
    }
    return t;
}

Json to_json(const TaskSpec& spec) {
    validate_task_spec(spec);
    return Json{{"task_id", spec.task_id},
                {"environment_id", spec.environment_id},
                {"instruction", spec.instruction},
                {"user_script_id", spec.user_script_id},
                {"success_criterion", spec.success_criterion},
                {"horizon", spec.horizon}};
}

TaskSpec task_spec_from_json(const Json& j, const std::string& where) {
    TaskSpec spec;
    spec.task_id = require_string(j, "task_id", where);
    spec.environment_id = require_string(j, "environment_id", where);
    spec.instruction = require_string(j, "instruction", where);
    spec.user_script_id = require_string(j, "user_script_id", where);
    spec.success_criterion = require_field(j, "success_criterion", where);
    spec.horizon = static_cast<int>(require_int(j, "horizon", where));
    validate_task_spec(spec);
    return spec;
}

std::string trajectory_log_to_string(const std::vector<Trajectory>& trajectories) {
    std::vector<Json> rows;
    rows.reserve(trajectories.size());
    for (const auto& t : trajectories) rows.push_back(to_json(t));
    return jsonl_to_string(kTrajectoryLogSchema, rows);
}

void write_trajectory_log(const std::string& path, const std::vector<Trajectory>& trajectories) {
    write_text_file(path, trajectory_log_to_string(trajectories));
}

namespace {

std::vector<Json> jsonl_from_string(const std::string& text, const std::string& expected_schema,
                                    const std::string& where) {
    std::vector<Json> rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const std::exception& e) {
            throw ParseError(where + ":" + std::to_string(line_no), e.what());
        }
        if (!saw_header) {
            saw_header = true;
            if (!j.is_object() || !j.contains("schema"))
                throw ParseError(where + ":" + std::to_string(line_no),
                                 "missing schema header line");
            const std::string schema = j["schema"].get<std::string>();
            if (schema != expected_schema)
                throw ParseError(where + ":" + std::to_string(line_no),
                                 "schema '" + schema + "', expected '" + expected_schema + "'");
            continue;
        }
        rows.push_back(std::move(j));
    }
    if (!saw_header) throw ParseError(where, "empty document: missing schema header");
    return rows;
}

}  // namespace

std::vector<Trajectory> trajectory_log_from_string(const std::string& text) {
    const auto rows = jsonl_from_string(text, kTrajectoryLogSchema, "trajectory log");
    std::vector<Trajectory> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.push_back(trajectory_from_json(rows[i], "line " + std::to_string(i + 2)));
    return out;
}

std::vector<Trajectory> read_trajectory_log(const std::string& path) {
    return trajectory_log_from_string(read_text_file(path));
}

std::vector<Json> read_jsonl(const std::string& path, const std::string& expected_schema) {
    return jsonl_from_string(read_text_file(path), expected_schema, path);
}

std::string jsonl_to_string(const std::string& schema, const std::vector<Json>& rows) {
    std::string out = Json{{"schema", schema}}.dump() + "\n";
    for (const auto& row : rows) out += row.dump() + "\n";
    return out;
}

void write_jsonl(const std::string& path, const std::string& schema,
                 const std::vector<Json>& rows) {
    write_text_file(path, jsonl_to_string(schema, rows));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
    if (!out) throw ConfigError("I/O failure writing " + path);
}

}  // namespace criticgate
