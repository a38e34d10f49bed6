#include "criticgate/hash.hpp"
#include "criticgate/model.hpp"
#include "criticgate/serialize.hpp"

#include <doctest.h>

using namespace criticgate;

namespace {

Observation user_obs(int turn, const std::string& content) {
    Observation o;
    o.turn_index = turn;
    o.source = Source::user;
    o.content = content;
    return o;
}

Observation tool_obs(int turn, const std::string& content, Json result) {
    Observation o;
    o.turn_index = turn;
    o.source = Source::tool;
    o.content = content;
    o.tool_result = std::move(result);
    return o;
}

InterventionRecord plain_record(int turn, ActionProposal action) {
    InterventionRecord rec;
    rec.turn_index = turn;
    rec.gate = 0;
    rec.proposal = action;
    rec.final_action = std::move(action);
    return rec;
}

InterventionRecord gated_record(int turn, ActionProposal proposal, Decision decision,
                                ActionProposal final_action) {
    InterventionRecord rec;
    rec.turn_index = turn;
    rec.gate = 1;
    rec.proposal = std::move(proposal);
    CriticVerdict v;
    v.decision = decision;
    v.guidance = decision == Decision::revise ? "fix it" : "";
    v.raw_output = decision == Decision::revise ? "[REVISE] fix it" : "[APPROVE] ok";
    rec.verdict = v;
    rec.final_action = std::move(final_action);
    return rec;
}

}  // namespace

TEST_CASE("rational arithmetic is exact and normalized") {
    CHECK(Rational(4, 5) == Rational(8, 10));
    CHECK((Rational(1) + Rational(4, 5)) == Rational(9, 5));
    CHECK((Rational(9, 5) / 2) == Rational(9, 10));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(1, 3) < Rational(1, 2));
    std::vector<Rational> values{Rational(1), Rational(4, 5), Rational(0)};
    CHECK(rational_mean(values.begin(), values.end()) == Rational(3, 5));
    CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("action codec round-trips every kind") {
    const auto msg = ActionProposal::make_message("Sure, let me check that.");
    const auto tool = ActionProposal::make_tool_call(
        "cancel_order", {{"order_id", "W1"}, {"refund_method", "credit_card_1"}});
    const auto rec = ActionProposal::make_recommendation("flight", "F3");
    for (const auto& action : {msg, tool, rec})
        CHECK(parse_action(format_action(action)) == action);

    CHECK(format_action(tool) ==
          "```tool cancel_order\norder_id: W1\nrefund_method: credit_card_1\n```");

    // Fences embedded in surrounding prose still parse as the fenced action.
    const auto wrapped = parse_action("Let me do that.\n" + format_action(tool) + "\nDone.");
    CHECK(wrapped == tool);

    CHECK_THROWS_AS(parse_action("```tool cancel_order\norder_id: W1\n"), ParseError);
    CHECK_THROWS_AS(parse_action("```recommend\naspect: flight\n```"), ParseError);
}

TEST_CASE("action invariants: exactly the kind-mandated fields") {
    ActionProposal bad = ActionProposal::make_message("hello");
    bad.tool_name = "cancel_order";
    CHECK_THROWS_AS(validate_action(bad), InvariantViolation);

    ActionProposal newline_arg =
        ActionProposal::make_tool_call("t", {{"k", "line1\nline2"}});
    CHECK_THROWS_AS(validate_action(newline_arg), InvariantViolation);

    ActionProposal no_option = ActionProposal::make_recommendation("flight", "F1");
    no_option.option_id.clear();
    CHECK_THROWS_AS(validate_action(no_option), InvariantViolation);
}

TEST_CASE("append_step base case and ordering errors") {
    Trajectory t;
    t.task_id = "retail-9001";
    append_step(t, user_obs(1, "hi"), plain_record(1, ActionProposal::make_message("hello")));
    CHECK(t.steps.size() == 1);

    // length-1 trajectory + observation with turn_index 1 again: ordering error
    CHECK_THROWS_AS(
        append_step(t, user_obs(1, "again"),
                    plain_record(1, ActionProposal::make_message("x"))),
        PreconditionError);

    t.terminated = true;
    CHECK_THROWS_AS(
        append_step(t, user_obs(2, "late"), plain_record(2, ActionProposal::make_message("x"))),
        PreconditionError);
}

TEST_CASE("intervention record invariants over all (gate, verdict) combinations") {
    const auto a = ActionProposal::make_message("a");
    const auto b = ActionProposal::make_message("b");

    InterventionRecord ok0 = plain_record(1, a);
    CHECK_NOTHROW(validate_record(ok0));

    InterventionRecord gate0_verdict = plain_record(1, a);
    gate0_verdict.verdict = CriticVerdict{Decision::approve, "", "[APPROVE]"};
    CHECK_THROWS_AS(validate_record(gate0_verdict), InvariantViolation);

    InterventionRecord gate0_divergent = plain_record(1, a);
    gate0_divergent.final_action = b;
    CHECK_THROWS_AS(validate_record(gate0_divergent), InvariantViolation);

    InterventionRecord gate1_missing = plain_record(1, a);
    gate1_missing.gate = 1;
    CHECK_THROWS_AS(validate_record(gate1_missing), InvariantViolation);

    CHECK_NOTHROW(validate_record(gated_record(1, a, Decision::revise, b)));
    CHECK_NOTHROW(validate_record(gated_record(1, a, Decision::approve, a)));
    CHECK_THROWS_AS(validate_record(gated_record(1, a, Decision::approve, b)),
                    InvariantViolation);

    InterventionRecord empty_guidance = gated_record(1, a, Decision::revise, b);
    empty_guidance.verdict->guidance = "";
    CHECK_THROWS_AS(validate_record(empty_guidance), InvariantViolation);

    // tool_result presence is tied to the source
    Trajectory t;
    Observation bad_tool = user_obs(1, "hi");
    bad_tool.tool_result = Json{{"ok", true}};
    CHECK_THROWS_AS(append_step(t, bad_tool, plain_record(1, a)), InvariantViolation);
}

TEST_CASE("render_history: empty, two-line, and frozen golden transcript") {
    Trajectory t;
    CHECK(render_history(t) == "");

    t.task_id = "retail-9001";
    append_step(t, user_obs(1, "Please cancel order W1."),
                plain_record(1, ActionProposal::make_tool_call("get_order_details",
                                                               {{"order_id", "W1"}})));
    append_step(t, tool_obs(2, "order W1", Json{{"ok", true}, {"data", Json{{"order_id", "W1"}}}}),
                plain_record(2, ActionProposal::make_message("Done.")));

    const std::string golden =
        "[user] Please cancel order W1.\n"
        "[assistant] ```tool get_order_details\norder_id: W1\n```\n"
        "[tool] order W1 {\"ok\":true,\"data\":{\"order_id\":\"W1\"}}\n"
        "[assistant] Done.";
    CHECK(render_history(t) == golden);

    Trajectory two;
    append_step(two, user_obs(1, "hi"),
                plain_record(1, ActionProposal::make_message("hello")));
    CHECK(render_history(two) == "[user] hi\n[assistant] hello");
}

TEST_CASE("trajectory serialization round-trips and is idempotent") {
    Trajectory t;
    CHECK(trajectory_from_json(to_json(t), "t") == t);

    t.task_id = "travel-9001";
    t.seed = 42;
    int turn = 1;
    append_step(t, user_obs(turn, "opening"),
                plain_record(turn, ActionProposal::make_message("question?")));
    ++turn;
    append_step(t, user_obs(turn, "answer"),
                gated_record(turn, ActionProposal::make_recommendation("flight", "F1"),
                             Decision::revise,
                             ActionProposal::make_recommendation("flight", "F2")));
    ++turn;
    append_step(t, tool_obs(turn, "result", Json{{"ok", false}, {"error", "nope"}}),
                gated_record(turn,
                             ActionProposal::make_tool_call("cancel_order",
                                                            {{"order_id", "W1"}}),
                             Decision::approve,
                             ActionProposal::make_tool_call("cancel_order",
                                                            {{"order_id", "W1"}})));
    for (int i = 0; i < 7; ++i) {
        ++turn;
        append_step(t, user_obs(turn, "u" + std::to_string(i)),
                    plain_record(turn, ActionProposal::make_message("m" + std::to_string(i))));
    }
    t.terminated = true;
    RewardValue reward;
    reward.value = Rational(4, 5);
    reward.breakdown.push_back(RewardComponent{"flight", Rational(4, 5), "not minimal"});
    t.reward = reward;

    const Trajectory back = trajectory_from_json(to_json(t), "t");
    CHECK(back == t);
    // roundtrip of a roundtrip changes nothing, byte-for-byte
    CHECK(to_json(back).dump() == to_json(t).dump());
}

TEST_CASE("trajectory parse errors name the missing field and the line") {
    Trajectory t;
    t.task_id = "x";
    Json j = to_json(t);
    j.erase("terminated");
    try {
        trajectory_from_json(j, "doc");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("terminated") != std::string::npos);
    }

    const std::string log = std::string("{\"schema\":\"criticgate.trajectories.v1\"}\n") +
                            "{\"task_id\": \"x\", \"seed\": }\n";
    try {
        trajectory_log_from_string(log);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);  // line number
    }
}

TEST_CASE("randomized trajectories round-trip structurally") {
    Rng rng(20250808);
    for (int iter = 0; iter < 100; ++iter) {
        Trajectory t;
        t.task_id = "retail-" + std::to_string(rng.below(10));
        t.seed = static_cast<std::int64_t>(rng.below(1000));
        const int steps = static_cast<int>(rng.below(6));
        for (int s = 1; s <= steps; ++s) {
            Observation obs;
            obs.turn_index = s;
            const auto pick = rng.below(3);
            obs.source = pick == 0 ? Source::user : pick == 1 ? Source::tool : Source::system;
            obs.content = "c" + std::to_string(rng.below(100));
            if (obs.source == Source::tool)
                obs.tool_result = Json{{"ok", rng.below(2) == 0},
                                       {"v", static_cast<std::int64_t>(rng.below(50))}};
            ActionProposal proposal =
                rng.below(2) == 0
                    ? ActionProposal::make_message("m" + std::to_string(rng.below(100)))
                    : ActionProposal::make_tool_call(
                          "t" + std::to_string(rng.below(5)),
                          {{"k", "v" + std::to_string(rng.below(100))}});
            InterventionRecord rec;
            if (rng.below(3) == 0) {
                const bool approve = rng.below(2) == 0;
                rec = gated_record(s, proposal,
                                   approve ? Decision::approve : Decision::revise,
                                   approve ? proposal
                                           : ActionProposal::make_message("revised"));
            } else {
                rec = plain_record(s, proposal);
            }
            append_step(t, std::move(obs), std::move(rec));
        }
        if (rng.below(2) == 0) {
            t.terminated = true;
            RewardValue r;
            r.value = rng.below(2) == 0 ? Rational(1) : Rational(0);
            r.breakdown.push_back(RewardComponent{"state_match", r.value, ""});
            t.reward = r;
        }
        const std::string once = to_json(t).dump();
        const Trajectory back = trajectory_from_json(Json::parse(once), "rt");
        CHECK(back == t);
        CHECK(to_json(back).dump() == once);
    }
}

TEST_CASE("task spec validation") {
    TaskSpec spec;
    spec.task_id = "retail-1";
    spec.environment_id = "retail";
    spec.instruction = "do it";
    spec.user_script_id = "u";
    spec.success_criterion = Json{{"state_match", Json::object()}};
    spec.horizon = 1;
    CHECK_NOTHROW(validate_task_spec(spec));
    spec.horizon = 0;
    CHECK_THROWS_AS(validate_task_spec(spec), InvariantViolation);
    CHECK_THROWS_AS(task_spec_from_json(Json{{"task_id", "x"}}, "spec"), ParseError);
}
