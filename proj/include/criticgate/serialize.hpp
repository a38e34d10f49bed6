#pragma once

#include "criticgate/model.hpp"

#include <string>
#include <vector>

namespace criticgate {

inline constexpr char kTrajectoryLogSchema[] = "criticgate.trajectories.v1";
inline constexpr char kSuiteSchema[] = "criticgate.suite.v1";
inline constexpr char kDatasetSchema[] = "criticgate.dataset.v1";

Json to_json(const Rational& r);
Rational rational_from_json(const Json& j, const std::string& where);

Json to_json(const Observation& obs);
Observation observation_from_json(const Json& j, const std::string& where);

Json to_json(const ActionProposal& a);
ActionProposal action_from_json(const Json& j, const std::string& where);

Json to_json(const CriticVerdict& v);
CriticVerdict verdict_from_json(const Json& j, const std::string& where);

Json to_json(const InterventionRecord& rec);
InterventionRecord record_from_json(const Json& j, const std::string& where);

Json to_json(const RewardValue& r);
RewardValue reward_from_json(const Json& j, const std::string& where);

Json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const Json& j, const std::string& where);

Json to_json(const TaskSpec& spec);
TaskSpec task_spec_from_json(const Json& j, const std::string& where);

// One trajectory per line, fixed key order, preceded by a schema header line.
std::string trajectory_log_to_string(const std::vector<Trajectory>& trajectories);
void write_trajectory_log(const std::string& path, const std::vector<Trajectory>& trajectories);

// Parse errors name the 1-based line number of the offending line.
std::vector<Trajectory> trajectory_log_from_string(const std::string& text);
std::vector<Trajectory> read_trajectory_log(const std::string& path);

// Generic JSONL helpers shared by suite and dataset files.
std::vector<Json> read_jsonl(const std::string& path, const std::string& expected_schema);
void write_jsonl(const std::string& path, const std::string& schema,
                 const std::vector<Json>& rows);
std::string jsonl_to_string(const std::string& schema, const std::vector<Json>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace criticgate
