#include "criticgate/eval.hpp"
#include "criticgate/hash.hpp"
#include "criticgate/runner.hpp"
#include "criticgate/generators.hpp"
#include "criticgate/serialize.hpp"

#include <doctest.h>

#include <algorithm>

using namespace criticgate;

TEST_CASE("pass_at_1 arithmetic") {
    CHECK(pass_at_1({{Rational(1), Rational(0), Rational(1), Rational(1), Rational(0)}}) ==
          Rational(3, 5));
    CHECK(pass_at_1({{Rational(1)}, {Rational(1)}, {Rational(1)}}) == Rational(1));
    CHECK_THROWS_AS(pass_at_1({{Rational(4, 5)}}), PreconditionError);
    CHECK_THROWS_AS(pass_at_1({}), PreconditionError);
    // singleton case: the metric is that run's reward
    CHECK(pass_at_1({{Rational(0)}}) == Rational(0));
}

TEST_CASE("travel_score arithmetic") {
    CHECK(travel_score({{Rational(1), Rational(4, 5)}}) == Rational(9, 10));
    CHECK(travel_score({{Rational(0), Rational(0)}, {Rational(0)}}) == Rational(0));
    CHECK(travel_score({{Rational(4, 5)}}) == Rational(4, 5));
    CHECK_THROWS_AS(travel_score({{Rational(1, 2)}}), PreconditionError);
}

TEST_CASE("metrics agree with independent recounts on randomized inputs") {
    Rng rng(11111);
    for (int iter = 0; iter < 1000; ++iter) {
        const int tasks = 1 + static_cast<int>(rng.below(6));
        std::vector<std::vector<Rational>> binary, components;
        std::int64_t ones = 0, n = 0;
        Rational component_sum;
        std::int64_t m = 0;
        for (int t = 0; t < tasks; ++t) {
            const int runs = 1 + static_cast<int>(rng.below(5));
            std::vector<Rational> b, c;
            for (int r = 0; r < runs; ++r) {
                const bool one = rng.below(2) == 0;
                b.push_back(one ? Rational(1) : Rational(0));
                ones += one ? 1 : 0;
                ++n;
                const auto pick = rng.below(3);
                const Rational comp =
                    pick == 0 ? Rational(0) : pick == 1 ? Rational(4, 5) : Rational(1);
                c.push_back(comp);
                component_sum = component_sum + comp;
                ++m;
            }
            binary.push_back(std::move(b));
            components.push_back(std::move(c));
        }
        // independent recount: tally, then one exact division
        CHECK(pass_at_1(binary) == Rational(ones, n));
        CHECK(travel_score(components) == component_sum / m);

        // order-insensitivity under per-task permutation
        std::vector<std::vector<Rational>> shuffled = binary;
        for (auto& group : shuffled)
            for (std::size_t k = group.size(); k > 1; --k)
                std::swap(group[k - 1], group[rng.below(k)]);
        std::reverse(shuffled.begin(), shuffled.end());
        CHECK(pass_at_1(shuffled) == pass_at_1(binary));
    }
}

TEST_CASE("summaries recompute from trajectory logs alone") {
    const Suite suite = generate_retail_suite(4, 17);
    RunOptions options;
    options.gate_policy = GatePolicy::state_mutating;
    options.runs_per_task = 3;
    options.seed_base = 3;
    const auto outcomes = run_suite(suite, scripted_actor_factory(suite),
                                    oracle_critic_factory(suite), options);
    const auto log = trajectories_of(outcomes);
    const RunSummary summary = summarize_trajectories("actor-critic", log);
    CHECK(summary.env_kind == "retail");
    CHECK(summary.metric_name == "pass_at_1");
    CHECK(summary.episodes == 12);
    CHECK(summary.per_task.size() == 4);

    // aggregate is recomputable from the per-task lists
    std::vector<std::vector<Rational>> groups;
    for (const auto& bucket : summary.per_task) {
        std::vector<Rational> values;
        for (const auto& reward : bucket.runs) values.push_back(reward.value);
        groups.push_back(std::move(values));
    }
    CHECK(pass_at_1(groups) == summary.metric_value);

    // serialization round-trip of the log preserves the summary
    const auto reparsed = trajectory_log_from_string(trajectory_log_to_string(log));
    const RunSummary again = summarize_trajectories("actor-critic", reparsed);
    CHECK(to_json(again).dump() == to_json(summary).dump());
}

TEST_CASE("travel summaries aggregate per-aspect components") {
    const Suite suite = generate_travel_suite(3, 2, 71);
    RunOptions options;
    options.gate_policy = GatePolicy::final_recommendation;
    options.runs_per_task = 2;
    const auto outcomes = run_suite(suite, scripted_actor_factory(suite),
                                    oracle_critic_factory(suite), options);
    const RunSummary summary =
        summarize_trajectories("actor-critic", trajectories_of(outcomes));
    CHECK(summary.metric_name == "travel_score");
    // oracle supervision drives every aspect to its optimal pick
    CHECK(summary.metric_value == Rational(1));
}

TEST_CASE("uplift report: zero deltas, golden shape, mismatch errors") {
    const Suite suite = generate_retail_suite(3, 29);
    RunOptions options;
    options.gate_policy = GatePolicy::never;
    options.runs_per_task = 2;
    options.seed_base = 8;
    const auto base = trajectories_of(
        run_suite(suite, scripted_actor_factory(suite), nullptr, options));
    const RunSummary baseline = summarize_trajectories("actor-only", base);

    SUBCASE("identical summaries produce zero delta everywhere") {
        const UpliftReport report = uplift_report(baseline, baseline);
        CHECK(report.text.find("delta                 0.0000 (0)") != std::string::npos);
        CHECK(report.machine["delta"] == to_json(Rational(0)));
        for (const auto& row : report.machine["per_task"])
            CHECK(row["delta"] == to_json(Rational(0)));
    }

    SUBCASE("treated run reports per-task deltas") {
        options.gate_policy = GatePolicy::state_mutating;
        const auto treated_log = trajectories_of(run_suite(
            suite, scripted_actor_factory(suite), oracle_critic_factory(suite), options));
        const RunSummary treated = summarize_trajectories("actor-critic", treated_log);
        const UpliftReport report = uplift_report(baseline, treated);
        CHECK(treated.metric_value >= baseline.metric_value);
        CHECK(report.machine["metric"] == "pass_at_1");
        CHECK(report.machine["per_task"].size() == 3);
        CHECK(report.text.find("per-task mean reward deltas:") != std::string::npos);
    }

    SUBCASE("mismatched task sets are rejected") {
        const Suite other = generate_retail_suite(2, 30);
        const auto other_log = trajectories_of(
            run_suite(other, scripted_actor_factory(other), nullptr, options));
        const RunSummary mismatched = summarize_trajectories("actor-only", other_log);
        CHECK_THROWS_AS(uplift_report(baseline, mismatched), PreconditionError);
    }
}
