#include "criticgate/eval.hpp"

#include "criticgate/serialize.hpp"

#include <cstdio>
#include <sstream>

namespace criticgate {

namespace {

Rational mean_over_pairs(const std::vector<std::vector<Rational>>& groups,
                         const std::vector<Rational>& allowed, const char* what) {
    Rational sum;
    std::int64_t n = 0;
    for (const auto& group : groups) {
        for (const auto& value : group) {
            bool ok = false;
            for (const auto& a : allowed)
                if (value == a) ok = true;
            if (!ok)
                throw PreconditionError(std::string(what) + " got out-of-range value " +
                                        value.str());
            sum = sum + value;
            ++n;
        }
    }
    if (n == 0) throw PreconditionError(std::string(what) + " needs at least one value");
    return sum / n;
}

std::string decimal4(const Rational& r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", r.to_double());
    return buf;
}

std::string metric_cell(const Rational& r) { return decimal4(r) + " (" + r.str() + ")"; }

}  // namespace

Rational pass_at_1(const std::vector<std::vector<Rational>>& per_task_runs) {
    return mean_over_pairs(per_task_runs, {Rational(0), Rational(1)}, "pass_at_1");
}

Rational travel_score(const std::vector<std::vector<Rational>>& per_aspect_runs) {
    return mean_over_pairs(per_aspect_runs, {Rational(0), Rational(4, 5), Rational(1)},
                           "travel_score");
}

RunSummary summarize_trajectories(const std::string& method,
                                  const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) throw PreconditionError("no trajectories to summarize");
    RunSummary summary;
    summary.method = method;

    for (const auto& t : trajectories) {
        const auto dash = t.task_id.find('-');
        const std::string kind = dash == std::string::npos ? t.task_id : t.task_id.substr(0, dash);
        if (summary.env_kind.empty()) summary.env_kind = kind;
        if (kind != summary.env_kind)
            throw PreconditionError("mixed environment kinds in one log: " + summary.env_kind +
                                    " vs " + kind);
        if (!t.reward.has_value())
            throw PreconditionError("trajectory for " + t.task_id + " has no reward");

        RunSummary::TaskRewards* bucket = nullptr;
        for (auto& b : summary.per_task)
            if (b.task_id == t.task_id) bucket = &b;
        if (!bucket) {
            summary.per_task.push_back(RunSummary::TaskRewards{t.task_id, {}});
            bucket = &summary.per_task.back();
        }
        bucket->runs.push_back(*t.reward);

        ++summary.episodes;
        for (const auto& step : t.steps) {
            if (step.action.gate == 1) ++summary.intervention_count;
            if (step.action.verdict.has_value() &&
                step.action.verdict->decision == Decision::revise)
                ++summary.revision_count;
        }
    }

    std::vector<std::vector<Rational>> groups;
    if (summary.env_kind == "travel") {
        summary.metric_name = "travel_score";
        for (const auto& bucket : summary.per_task) {
            std::vector<Rational> components;
            for (const auto& reward : bucket.runs)
                for (const auto& c : reward.breakdown) components.push_back(c.value);
            groups.push_back(std::move(components));
        }
        summary.metric_value = travel_score(groups);
    } else {
        summary.metric_name = "pass_at_1";
        for (const auto& bucket : summary.per_task) {
            std::vector<Rational> values;
            for (const auto& reward : bucket.runs) values.push_back(reward.value);
            groups.push_back(std::move(values));
        }
        summary.metric_value = pass_at_1(groups);
    }
    return summary;
}

std::string render_summary(const RunSummary& summary) {
    std::ostringstream out;
    out << "method: " << summary.method << "\n";
    out << "environment: " << summary.env_kind << "\n";
    out << "tasks: " << summary.per_task.size() << ", episodes: " << summary.episodes << "\n";
    out << summary.metric_name << ": " << metric_cell(summary.metric_value) << "\n";
    out << "interventions: " << summary.intervention_count
        << ", revisions: " << summary.revision_count << "\n";
    return out.str();
}

Json to_json(const RunSummary& summary) {
    Json per_task = Json::array();
    for (const auto& bucket : summary.per_task) {
        Json runs = Json::array();
        for (const auto& reward : bucket.runs) runs.push_back(to_json(reward));
        per_task.push_back(Json{{"task_id", bucket.task_id}, {"runs", runs}});
    }
    return Json{{"schema", "criticgate.summary.v1"},
                {"method", summary.method},
                {"env_kind", summary.env_kind},
                {"metric", Json{{"name", summary.metric_name},
                                {"value", to_json(summary.metric_value)}}},
                {"episodes", summary.episodes},
                {"interventions", summary.intervention_count},
                {"revisions", summary.revision_count},
                {"per_task", per_task}};
}

UpliftReport uplift_report(const RunSummary& baseline, const RunSummary& treated) {
    if (baseline.env_kind != treated.env_kind)
        throw PreconditionError("uplift report over different environments");
    if (baseline.per_task.size() != treated.per_task.size())
        throw PreconditionError("uplift report over different task sets");
    for (std::size_t i = 0; i < baseline.per_task.size(); ++i) {
        if (baseline.per_task[i].task_id != treated.per_task[i].task_id)
            throw PreconditionError("uplift report task mismatch: " +
                                    baseline.per_task[i].task_id + " vs " +
                                    treated.per_task[i].task_id);
        if (baseline.per_task[i].runs.size() != treated.per_task[i].runs.size())
            throw PreconditionError("uplift report run-count mismatch on " +
                                    baseline.per_task[i].task_id);
    }

    const Rational delta = treated.metric_value - baseline.metric_value;
    std::ostringstream text;
    text << "metric: " << baseline.metric_name << "\n";
    text << "                      baseline (" << baseline.method << ")  treated ("
         << treated.method << ")\n";
    text << "score                 " << metric_cell(baseline.metric_value) << "  "
         << metric_cell(treated.metric_value) << "\n";
    text << "delta                 " << metric_cell(delta) << "\n";
    text << "interventions         " << baseline.intervention_count << "  "
         << treated.intervention_count << "\n";
    text << "revisions             " << baseline.revision_count << "  "
         << treated.revision_count << "\n";
    text << "per-task mean reward deltas:\n";

    Json per_task = Json::array();
    for (std::size_t i = 0; i < baseline.per_task.size(); ++i) {
        const auto& b = baseline.per_task[i];
        const auto& t = treated.per_task[i];
        std::vector<Rational> bv, tv;
        for (const auto& r : b.runs) bv.push_back(r.value);
        for (const auto& r : t.runs) tv.push_back(r.value);
        const Rational bm = rational_mean(bv.begin(), bv.end());
        const Rational tm = rational_mean(tv.begin(), tv.end());
        const Rational d = tm - bm;
        text << "  " << b.task_id << "  " << decimal4(bm) << " -> " << decimal4(tm)
             << "  (" << (d < Rational(0) ? "" : "+") << decimal4(d) << ")\n";
        per_task.push_back(Json{{"task_id", b.task_id},
                                {"baseline", to_json(bm)},
                                {"treated", to_json(tm)},
                                {"delta", to_json(d)}});
    }

    UpliftReport report;
    report.text = text.str();
    report.machine = Json{{"schema", "criticgate.uplift.v1"},
                          {"metric", baseline.metric_name},
                          {"baseline", to_json(baseline)},
                          {"treated", to_json(treated)},
                          {"delta", to_json(delta)},
                          {"per_task", per_task}};
    return report;
}

}  // namespace criticgate
