#include "criticgate/critic_prompts.hpp"
#include "criticgate/datagen.hpp"
#include "criticgate/eval.hpp"
#include "criticgate/generators.hpp"
#include "criticgate/hash.hpp"
#include "criticgate/retail_env.hpp"
#include "criticgate/serialize.hpp"
#include "criticgate/travel_env.hpp"

#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <set>

using namespace criticgate;

namespace {

void report(int number, const std::string& what, bool ok) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", number, what.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", number, ": ", what);
}

// Every trajectory produced while running the acceptance suite, scanned by
// criterion 7.
std::vector<Trajectory>& all_logged_trajectories() {
    static std::vector<Trajectory> logs;
    return logs;
}

void log_all(const std::vector<EpisodeOutcome>& outcomes) {
    for (const auto& outcome : outcomes)
        if (outcome.trajectory.has_value())
            all_logged_trajectories().push_back(*outcome.trajectory);
}

std::string acceptance_dir() {
    static std::string dir = [] {
        const auto path = std::filesystem::temp_directory_path() / "criticgate-acceptance";
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
        return path.string();
    }();
    return dir;
}

constexpr std::uint64_t kSuiteSeed = 20250808;

const Suite& retail50() {
    static const Suite suite = generate_retail_suite(50, kSuiteSeed);
    return suite;
}

}  // namespace

TEST_CASE("criterion 1: oracle supervision uplift on the 50-task retail suite") {
    const auto started = std::chrono::steady_clock::now();
    const Suite& suite = retail50();
    REQUIRE(suite.tasks.size() == 50);

    RunOptions options;
    options.gate_policy = GatePolicy::never;
    options.runs_per_task = 5;
    options.seed_base = 1000;

    const auto baseline =
        run_suite(suite, scripted_actor_factory(suite), nullptr, options);
    log_all(baseline);
    const RunSummary actor_only =
        summarize_trajectories("actor-only", trajectories_of(baseline));

    options.gate_policy = GatePolicy::state_mutating;
    const auto treated = run_suite(suite, scripted_actor_factory(suite),
                                   oracle_critic_factory(suite), options);
    log_all(treated);
    const RunSummary supervised =
        summarize_trajectories("actor-critic", trajectories_of(treated));

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const bool baseline_low = actor_only.metric_value <= Rational(4, 5);
    const bool supervised_high = supervised.metric_value >= Rational(19, 20);
    const bool fast = elapsed < 30.0;
    std::printf("  actor-only pass@1 = %s, actor-critic pass@1 = %s, wall = %.2fs\n",
                actor_only.metric_value.str().c_str(),
                supervised.metric_value.str().c_str(), elapsed);
    CHECK(baseline_low);
    CHECK(supervised_high);
    CHECK(fast);
    report(1, "oracle-critic pass@1 >= 0.95, actor-only <= 0.80, wall < 30 s",
           baseline_low && supervised_high && fast);
}

TEST_CASE("criterion 2: gate=never trajectories byte-identical to critic-disabled") {
    std::vector<Suite> corpus;
    corpus.push_back(retail50());
    for (int difficulty = 2; difficulty <= 4; ++difficulty)
        corpus.push_back(generate_travel_suite(10, difficulty, kSuiteSeed + difficulty));

    int mismatches = 0;
    for (const auto& suite : corpus) {
        RunOptions options;
        options.gate_policy = GatePolicy::never;
        options.runs_per_task = 2;
        options.seed_base = 77;

        const auto gated = run_suite(suite, scripted_actor_factory(suite),
                                     oracle_critic_factory(suite), options);
        const auto disabled =
            run_suite(suite, scripted_actor_factory(suite), nullptr, options);
        log_all(gated);
        log_all(disabled);

        const std::string left = trajectory_log_to_string(trajectories_of(gated));
        const std::string right = trajectory_log_to_string(trajectories_of(disabled));
        if (left != right) ++mismatches;
    }
    CHECK(mismatches == 0);
    report(2, "pass-through equivalence over the full fixture corpus (0 mismatches)",
           mismatches == 0);
}

TEST_CASE("criterion 3: reward implementations match independent oracles on every fixture") {
    bool all_match = true;

    // travel: brute-force enumeration over every option of every fixture aspect
    for (int difficulty = 2; difficulty <= 4; ++difficulty) {
        const Suite suite = generate_travel_suite(10, difficulty, kSuiteSeed + 10 + difficulty);
        for (const auto& task : suite.tasks) {
            auto env = make_environment(task);
            auto* tenv = dynamic_cast<travel::TravelEnv*>(env.get());
            REQUIRE(tenv != nullptr);
            for (const auto& aspect : tenv->aspects()) {
                REQUIRE(aspect.options.size() <= 20);
                const auto& prefs = tenv->preferences().at(aspect.aspect);
                for (const auto& option : aspect.options) {
                    // enumerate: satisfying set and its minimal price
                    bool chosen_ok = true;
                    std::int64_t min_price = -1;
                    for (const auto& other : aspect.options) {
                        bool ok = true;
                        for (const auto& p : prefs)
                            if (!travel::preference_satisfied(p, other)) ok = false;
                        if (ok && (min_price < 0 || other.price < min_price))
                            min_price = other.price;
                        if (other.option_id == option.option_id) {
                            for (const auto& p : prefs)
                                if (!travel::preference_satisfied(p, option)) chosen_ok = false;
                        }
                    }
                    const Rational expected = !chosen_ok ? Rational(0)
                                              : option.price == min_price ? Rational(1)
                                                                          : Rational(4, 5);
                    const Rational got = travel::aspect_reward(
                        aspect.aspect, option.option_id, tenv->preferences(), aspect);
                    if (got != expected) all_match = false;
                }
            }
        }
    }

    // retail: field-wise comparison through the serialized state, an
    // independent route from resolve_path
    for (const auto& task : retail50().tasks) {
        auto env = make_environment(task);
        auto* renv = dynamic_cast<retail::RetailEnv*>(env.get());
        REQUIRE(renv != nullptr);
        const ScriptedActorProgram program = scripted_program_of(task);
        env->initial_observation();

        std::vector<retail::RetailState> states{renv->state()};
        for (const auto& step : program.steps) {
            env->execute(step.intended);
            states.push_back(renv->state());
        }
        for (const auto& state : states) {
            const Json dump = retail::state_to_json(state);
            bool expected_match = true;
            std::set<std::string> expected_mismatches;
            for (const auto& [path, want] : renv->ground_truth()) {
                // walk the JSON dump segment by segment; items are keyed lists
                Json cursor = dump;
                bool found = true;
                std::istringstream in(path);
                std::string seg;
                std::vector<std::string> segs;
                while (std::getline(in, seg, '.')) segs.push_back(seg);
                for (std::size_t i = 0; i < segs.size() && found; ++i) {
                    if (segs[i] == "items" && i + 1 < segs.size()) {
                        Json matched;
                        bool hit = false;
                        for (const auto& item : cursor["items"])
                            if (item["item_id"] == segs[i + 1]) {
                                matched = item;
                                hit = true;
                            }
                        found = hit;
                        if (hit) cursor = matched;
                        ++i;
                    } else if (cursor.is_object() && cursor.contains(segs[i])) {
                        cursor = cursor[segs[i]];
                    } else {
                        found = false;
                    }
                }
                if (!found || cursor != want) {
                    expected_match = false;
                    expected_mismatches.insert(path);
                }
            }
            const RewardValue got = retail::reward(state, renv->ground_truth());
            if ((got.value == Rational(1)) != expected_match) all_match = false;
            if (!expected_match) {
                std::set<std::string> reported;
                for (const auto& c : got.breakdown) reported.insert(c.name);
                if (reported != expected_mismatches) all_match = false;
            }
        }
    }

    CHECK(all_match);
    report(3, "travel and retail rewards match brute-force oracles on 100% of fixtures",
           all_match);
}

TEST_CASE("criterion 4: datagen fidelity with K=5, psi=2") {
    const Suite suite = generate_retail_suite(20, kSuiteSeed + 40);
    FilterConfig cfg;
    cfg.runs_per_task = 5;
    cfg.psi = 2;
    cfg.seed_base = 9000;

    const std::string dir_a = acceptance_dir() + "/datagen-a";
    const std::string dir_b = acceptance_dir() + "/datagen-b";
    const DatagenResult first = run_datagen_pipeline(
        suite, scripted_actor_factory(suite), oracle_critic_factory(suite),
        GatePolicy::state_mutating, cfg, dir_a);
    const DatagenResult second = run_datagen_pipeline(
        suite, scripted_actor_factory(suite), oracle_critic_factory(suite),
        GatePolicy::state_mutating, cfg, dir_b);

    const auto filter_log = read_trajectory_log(first.filter_log_path);
    const auto collect_log = read_trajectory_log(first.collect_log_path);
    log_all([&] {
        std::vector<EpisodeOutcome> wrap;
        for (const auto& t : filter_log)
            wrap.push_back(EpisodeOutcome{t.task_id, t.seed, t, 0, 0, ""});
        for (const auto& t : collect_log)
            wrap.push_back(EpisodeOutcome{t.task_id, t.seed, t, 0, 0, ""});
        return wrap;
    }());

    // (a) hard set equals an independent recount from the persisted logs
    std::set<std::string> recount;
    for (const auto& task : suite.tasks) {
        int successes = 0;
        for (const auto& t : filter_log)
            if (t.task_id == task.spec.task_id && t.reward->value == Rational(1)) ++successes;
        if (cfg.runs_per_task - successes >= cfg.psi) recount.insert(task.spec.task_id);
    }
    const bool hard_set_ok =
        recount == std::set<std::string>(first.hard_task_ids.begin(),
                                         first.hard_task_ids.end()) &&
        !recount.empty();

    // (b) every emitted sample's source trajectory has R=1 and >= 1 revise
    // (c) label == positive iff the completion parses as revise
    const auto rows = read_jsonl(first.dataset_path, kDatasetSchema);
    bool sources_ok = !rows.empty();
    bool labels_ok = true;
    for (const auto& row : rows) {
        const std::string task_id = row.at("task_id").get<std::string>();
        const int turn = row.at("turn_index").get<int>();
        const std::string completion = row.at("completion").get<std::string>();
        const std::string label = row.at("label").get<std::string>();

        const CriticVerdict verdict = parse_verdict(completion);
        if (label != (verdict.decision == Decision::revise ? "positive" : "negative"))
            labels_ok = false;

        bool sourced = false;
        for (const auto& t : collect_log) {
            if (t.task_id != task_id) continue;
            if (!t.reward.has_value() || t.reward->value != Rational(1)) continue;
            bool has_revise = false;
            bool matches_turn = false;
            for (const auto& step : t.steps) {
                if (step.action.verdict.has_value() &&
                    step.action.verdict->decision == Decision::revise)
                    has_revise = true;
                if (step.action.turn_index == turn && step.action.verdict.has_value() &&
                    step.action.verdict->raw_output == completion)
                    matches_turn = true;
            }
            if (has_revise && matches_turn) sourced = true;
        }
        if (!sourced) sources_ok = false;
    }

    // (d) rerun with the same seed is byte-identical
    const bool rerun_ok =
        read_text_file(first.dataset_path) == read_text_file(second.dataset_path) &&
        read_text_file(dir_a + "/dataset_stats.json") ==
            read_text_file(dir_b + "/dataset_stats.json");

    CHECK(hard_set_ok);
    CHECK(sources_ok);
    CHECK(labels_ok);
    CHECK(rerun_ok);
    std::printf("  hard tasks: %zu/20, samples: %d (pos %d / neg %d)\n",
                first.hard_task_ids.size(), first.stats.n_samples, first.stats.n_positive,
                first.stats.n_negative);
    report(4, "datagen hard-set recount, retention, labels, byte-identical rerun",
           hard_set_ok && sources_ok && labels_ok && rerun_ok);
}

TEST_CASE("criterion 5: metrics equal independent recounts on 1000 random fixtures") {
    Rng rng(555555);
    bool all_equal = true;
    for (int iter = 0; iter < 1000; ++iter) {
        const int tasks = 1 + static_cast<int>(rng.below(7));
        std::vector<std::vector<Rational>> binary, components;
        std::int64_t ones = 0, n = 0, comp_num_sum = 0, m = 0;  // components in fifths
        for (int t = 0; t < tasks; ++t) {
            const int runs = 1 + static_cast<int>(rng.below(5));
            std::vector<Rational> b, c;
            for (int r = 0; r < runs; ++r) {
                const bool one = rng.below(2) == 0;
                b.push_back(one ? Rational(1) : Rational(0));
                ones += one;
                ++n;
                const auto pick = rng.below(3);
                c.push_back(pick == 0 ? Rational(0) : pick == 1 ? Rational(4, 5) : Rational(1));
                comp_num_sum += pick == 0 ? 0 : pick == 1 ? 4 : 5;
                ++m;
            }
            binary.push_back(std::move(b));
            components.push_back(std::move(c));
        }
        if (pass_at_1(binary) != Rational(ones, n)) all_equal = false;
        if (travel_score(components) != Rational(comp_num_sum, 5 * m)) all_equal = false;
    }
    CHECK(all_equal);
    report(5, "pass@1 and travel score: exact rational equality on 1000 random fixtures",
           all_equal);
}

TEST_CASE("criterion 6: critic prompts contain the template sentences verbatim") {
    const auto tool_proposal = ActionProposal::make_tool_call(
        "cancel_order", {{"order_id", "W1"}, {"refund_method", "credit_card_1"}});
    const CriticPrompt retail =
        build_critic_prompt("retail", "[user] hi", tool_proposal, "- [P1] rule");
    const auto rec_proposal = ActionProposal::make_recommendation("flight", "F3");
    const CriticPrompt travel =
        build_critic_prompt("travel", "[user] hi", rec_proposal, "flight options:\n- F1");

    const std::vector<std::pair<const std::string*, std::string>> goldens{
        {&retail.system,
         "You are a policy verification Critic Agent. Your role is to evaluate and advise a "
         "customer service LLM agent to ensure its actions and responses are fully aligned "
         "with domain policies."},
        {&retail.system,
         "Valid Requests: If the user’s request is valid and complies with all applicable "
         "policies, confirm that the customer service agent correctly addresses the request "
         "without inventing or misrepresenting policies."},
        {&retail.system,
         "Policy Violations: If the user’s request violates policy, ensure that the "
         "customer service agent appropriately declines the request. If the agent fails to do "
         "so, advise that it must decline."},
        {&retail.system,
         "Compliance Verification: Assess whether the agent’s response and intended "
         "actions (including tool calls) comply with all relevant policies."},
        {&retail.system,
         "Argument Validation: Check that the arguments/parameters provided in tool calls "
         "also meet policy requirements."},
        {&retail.system,
         "Faithful Execution: Ensure the agent fully executes valid user requests without "
         "hallucinating policies or misapplying them."},
        {&retail.system,
         "Always base your judgment on the conversation between the user and the customer "
         "service agent, as well as the official policies in force."},
        {&retail.system, "The current time is 2024-05-15 15:00:00 EST."},
        {&retail.user,
         "Below is the information you need to verify whether the agent's proposed action is "
         "compliant with the policies."},
        {&retail.user, "The Agent's Proposed Action:"},
        {&retail.user, "Relevant Domain Policies:"},
        {&retail.user, "Conversation History:"},
        {&retail.user,
         "Review the agent's proposed action, the action's arguments (if it contains tool "
         "calls), the relevant policy and the conversation history. Determine whether the "
         "agent’s action and its arguments (if any) fully comply with the domain policy. "},
        {&travel.system,
         "You are a Preference Verification Critic Agent. Your role is to evaluate and advise "
         "a travel planning LLM agent to ensure its recommendations are fully aligned with "
         "the user’s expressed or implied preferences."},
        {&travel.system,
         "Ensure that the agent recommends at most one option per travel aspect. If the agent "
         "attempts to re-recommend or override an existing recommendation, flag this as an "
         "error."},
        {&travel.system,
         "Always base your judgment strictly on the explicitly provided options and the user "
         "preferences inferred from the conversation. Do not introduce new preference "
         "dimensions or external assumptions."},
        {&travel.user,
         "Below is the information you need to verify whether the agent’s proposed "
         "recommendation is appropriate."},
        {&travel.user, "Travel Aspect Under Consideration:"},
        {&travel.user, "The Agent’s Proposed Recommendation:"},
        {&travel.user, "Available Options for This Aspect:"},
        {&travel.user,
         "1. Whether the proposed recommendation is the optimal choice given the known user "
         "preferences."},
        {&travel.user,
         "2. Whether there are critical user preferences relevant to this travel aspect that "
         "have not yet been elicited."}};

    bool all_contained = true;
    for (const auto& [haystack, needle] : goldens) {
        if (haystack->find(needle) == std::string::npos) {
            all_contained = false;
            std::printf("  MISSING: %s\n", needle.c_str());
        }
    }
    CHECK(all_contained);
    report(6, "critic prompt templates contained verbatim (both domains)", all_contained);
}

TEST_CASE("criterion 7: no turn carries more than one critic verdict") {
    const auto& logs = all_logged_trajectories();
    REQUIRE(!logs.empty());

    int violations = 0;
    int verdicts_seen = 0;
    for (const auto& trajectory : logs) {
        const Json serialized = to_json(trajectory);
        for (const auto& step : serialized.at("steps")) {
            const Json& action = step.at("action");
            // structural shape: exactly one verdict slot, object or null
            int verdict_fields = 0;
            for (const auto& [key, value] : action.items())
                if (key == "verdict") ++verdict_fields;
            if (verdict_fields != 1) ++violations;
            const Json& verdict = action.at("verdict");
            if (!verdict.is_object() && !verdict.is_null()) ++violations;
            const int gate = action.at("gate").get<int>();
            if (gate == 1 && !verdict.is_object()) ++violations;
            if (gate == 0 && !verdict.is_null()) ++violations;
            if (gate == 0 && action.at("final_action") != action.at("proposal")) ++violations;
            if (verdict.is_object()) ++verdicts_seen;
        }
    }
    std::printf("  scanned %zu trajectories, %d verdicts, %d violations\n", logs.size(),
                verdicts_seen, violations);
    CHECK(verdicts_seen > 0);
    CHECK(violations == 0);
    report(7, "single-revision contract holds across all acceptance logs (0 violations)",
           violations == 0);
}
