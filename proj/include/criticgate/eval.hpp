#pragma once

#include "criticgate/model.hpp"

#include <string>
#include <vector>

namespace criticgate {

// Aggregated view of one method's runs over a task set. The aggregate metric
// is always recomputable from the per-task reward lists.
struct RunSummary {
    std::string method;
    std::string env_kind;      // retail | travel
    std::string metric_name;   // pass_at_1 | travel_score
    Rational metric_value;

    struct TaskRewards {
        std::string task_id;
        std::vector<RewardValue> runs;
    };
    std::vector<TaskRewards> per_task;

    int episodes = 0;
    int intervention_count = 0;
    int revision_count = 0;
};

// Mean of binary task rewards over all (task, run) pairs. Values must be in
// {0, 1}; exact rational result.
Rational pass_at_1(const std::vector<std::vector<Rational>>& per_task_runs);

// Mean of per-aspect components over all (aspect, run) pairs. Components must
// be in {0, 4/5, 1}; exact rational result.
Rational travel_score(const std::vector<std::vector<Rational>>& per_aspect_runs);

// Builds a summary from trajectory logs alone. Environment kind is taken from
// the task-id prefix (everything before the first '-'). Intervention counts
// are recomputed from the intervention records.
RunSummary summarize_trajectories(const std::string& method,
                                  const std::vector<Trajectory>& trajectories);

std::string render_summary(const RunSummary& summary);
Json to_json(const RunSummary& summary);

struct UpliftReport {
    std::string text;  // plain-text table
    Json machine;      // machine-readable form
};

// Side-by-side baseline vs treated metrics with per-task deltas. Both
// summaries must cover the same task set with the same run counts.
UpliftReport uplift_report(const RunSummary& baseline, const RunSummary& treated);

}  // namespace criticgate
