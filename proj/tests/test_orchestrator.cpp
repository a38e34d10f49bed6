#include "criticgate/orchestrator.hpp"
#include "criticgate/retail_env.hpp"
#include "criticgate/runner.hpp"
#include "criticgate/serialize.hpp"

#include <doctest.h>

#include "test_support.hpp"

using namespace criticgate;

namespace {

struct Episode {
    TaskDocument doc;
    std::unique_ptr<Environment> env;
    std::shared_ptr<ScriptedActor> actor;
    std::unique_ptr<OracleCritic> critic;
    ScriptedActorProgram program;
};

Episode make_episode(TaskDocument doc) {
    Episode e;
    e.doc = std::move(doc);
    e.env = make_environment(e.doc);
    e.program = scripted_program_of(e.doc);
    std::map<std::string, ScriptedActorProgram> programs{{e.doc.spec.task_id, e.program}};
    e.actor = std::make_shared<ScriptedActor>(std::move(programs));
    e.critic = std::make_unique<OracleCritic>(*e.env, e.program);
    return e;
}

}  // namespace

TEST_CASE("should_intervene implements the gate table") {
    const auto doc = cgtest::tiny_cancel_task();
    auto env = make_environment(doc);
    const auto cancel = ActionProposal::make_tool_call(
        "cancel_order", {{"order_id", "W1"}, {"refund_method", "credit_card_1"}});
    const auto lookup =
        ActionProposal::make_tool_call("get_order_details", {{"order_id", "W1"}});
    const auto message = ActionProposal::make_message("hello");
    const auto recommend = ActionProposal::make_recommendation("flight", "F1");

    CHECK(should_intervene(cancel, *env, GatePolicy::state_mutating) == 1);
    CHECK(should_intervene(lookup, *env, GatePolicy::state_mutating) == 0);
    CHECK(should_intervene(message, *env, GatePolicy::state_mutating) == 0);
    CHECK(should_intervene(message, *env, GatePolicy::final_recommendation) == 0);
    CHECK(should_intervene(recommend, *env, GatePolicy::final_recommendation) == 1);
    CHECK(should_intervene(cancel, *env, GatePolicy::final_recommendation) == 0);
    CHECK(should_intervene(message, *env, GatePolicy::always) == 1);
    CHECK(should_intervene(cancel, *env, GatePolicy::never) == 0);

    const auto ghost = ActionProposal::make_tool_call("teleport_order", {{"order_id", "W1"}});
    CHECK_THROWS_AS(should_intervene(ghost, *env, GatePolicy::state_mutating),
                    UnknownToolError);
}

TEST_CASE("zero-error actor with gate never passes through to reward 1") {
    auto e = make_episode(cgtest::tiny_cancel_task());
    EpisodeConfig cfg;
    cfg.critic_enabled = false;
    cfg.gate_policy = GatePolicy::never;
    cfg.horizon = e.doc.spec.horizon;
    cfg.seed = 5;
    const EpisodeResult result = run_episode(e.doc.spec, *e.actor, nullptr, *e.env, cfg);
    CHECK(result.reward.value == Rational(1));
    CHECK(result.intervention_count == 0);
    CHECK(result.revision_count == 0);
    CHECK(result.trajectory.terminated);
    CHECK(result.trajectory.steps.size() == 4);
}

TEST_CASE("deterministic violation at turn 3: one revise verdict, reward restored") {
    const Json schedule{{"3", "violate_constraint"}};

    // actor-critic run: exactly one revise at turn 3, reward 1
    auto supervised = make_episode(cgtest::tiny_cancel_task(0.0, schedule));
    EpisodeConfig cfg;
    cfg.critic_enabled = true;
    cfg.gate_policy = GatePolicy::state_mutating;
    cfg.horizon = supervised.doc.spec.horizon;
    cfg.seed = 9;
    const EpisodeResult treated =
        run_episode(supervised.doc.spec, *supervised.actor, supervised.critic.get(),
                    *supervised.env, cfg);
    CHECK(treated.reward.value == Rational(1));
    CHECK(treated.revision_count == 1);
    int revises = 0;
    for (const auto& step : treated.trajectory.steps) {
        if (step.action.verdict.has_value() &&
            step.action.verdict->decision == Decision::revise) {
            ++revises;
            CHECK(step.action.turn_index == 3);
            CHECK(step.action.proposal.tool_args.at("refund_method") == "gift_card_2");
            CHECK(step.action.final_action.tool_args.at("refund_method") == "credit_card_1");
        }
    }
    CHECK(revises == 1);

    // same seed with the critic disabled: the violation executes, reward 0
    auto baseline = make_episode(cgtest::tiny_cancel_task(0.0, schedule));
    EpisodeConfig off = cfg;
    off.critic_enabled = false;
    const EpisodeResult untreated =
        run_episode(baseline.doc.spec, *baseline.actor, nullptr, *baseline.env, off);
    CHECK(untreated.reward.value == Rational(0));
}

TEST_CASE("preconditions: horizon and critic wiring") {
    auto e = make_episode(cgtest::tiny_cancel_task());
    EpisodeConfig cfg;
    cfg.horizon = 0;
    CHECK_THROWS_AS(run_episode(e.doc.spec, *e.actor, nullptr, *e.env, cfg),
                    PreconditionError);
    cfg.horizon = 5;
    cfg.critic_enabled = true;
    CHECK_THROWS_AS(run_episode(e.doc.spec, *e.actor, nullptr, *e.env, cfg),
                    PreconditionError);
    cfg.critic_enabled = false;
    CHECK_THROWS_AS(run_episode(e.doc.spec, *e.actor, e.critic.get(), *e.env, cfg),
                    PreconditionError);
}

TEST_CASE("revise_with_feedback honors the single-revision contract") {
    auto complying = make_episode(cgtest::tiny_cancel_task(0.0, Json{{"3", "violate_constraint"}}));
    const auto proposal = ActionProposal::make_tool_call(
        "cancel_order", {{"order_id", "W1"}, {"refund_method", "gift_card_2"}});
    CriticVerdict verdict{Decision::revise, "use the original payment method", "[REVISE] ..."};

    const auto revised =
        revise_with_feedback(*complying.actor, "sys", "history", proposal, verdict,
                             complying.doc.spec.task_id, 3, 9);
    CHECK(revised != proposal);
    CHECK(revised.tool_args.at("refund_method") == "credit_card_1");

    auto ignoring = make_episode(cgtest::tiny_cancel_task(0.0, Json{{"3", "violate_constraint"}},
                                                          "ignores_guidance"));
    const auto unchanged =
        revise_with_feedback(*ignoring.actor, "sys", "history", proposal, verdict,
                             ignoring.doc.spec.task_id, 3, 9);
    CHECK(unchanged == proposal);  // still accepted as final

    CriticVerdict approve{Decision::approve, "", "[APPROVE]"};
    CHECK_THROWS_AS(revise_with_feedback(*complying.actor, "sys", "history", proposal, approve,
                                         complying.doc.spec.task_id, 3, 9),
                    PreconditionError);
}

TEST_CASE("pass-through equivalence: gate never equals critic disabled, byte for byte") {
    const Json schedule{{"3", "violate_constraint"}};
    auto with_gate_never = make_episode(cgtest::tiny_cancel_task(0.4, schedule));
    EpisodeConfig cfg;
    cfg.critic_enabled = true;
    cfg.gate_policy = GatePolicy::never;
    cfg.horizon = with_gate_never.doc.spec.horizon;
    cfg.seed = 21;
    const EpisodeResult gated =
        run_episode(with_gate_never.doc.spec, *with_gate_never.actor,
                    with_gate_never.critic.get(), *with_gate_never.env, cfg);

    auto without_critic = make_episode(cgtest::tiny_cancel_task(0.4, schedule));
    EpisodeConfig off;
    off.critic_enabled = false;
    off.gate_policy = GatePolicy::state_mutating;
    off.horizon = without_critic.doc.spec.horizon;
    off.seed = 21;
    const EpisodeResult plain =
        run_episode(without_critic.doc.spec, *without_critic.actor, nullptr,
                    *without_critic.env, off);

    CHECK(to_json(gated.trajectory).dump() == to_json(plain.trajectory).dump());
    CHECK(gated.intervention_count == 0);
}

TEST_CASE("identical inputs produce identical episode results") {
    for (int rep = 0; rep < 2; ++rep) {
        auto a = make_episode(cgtest::tiny_cancel_task(0.5));
        auto b = make_episode(cgtest::tiny_cancel_task(0.5));
        EpisodeConfig cfg;
        cfg.critic_enabled = true;
        cfg.gate_policy = GatePolicy::state_mutating;
        cfg.horizon = a.doc.spec.horizon;
        cfg.seed = 33 + rep;
        const EpisodeResult first =
            run_episode(a.doc.spec, *a.actor, a.critic.get(), *a.env, cfg);
        const EpisodeResult second =
            run_episode(b.doc.spec, *b.actor, b.critic.get(), *b.env, cfg);
        CHECK(to_json(first.trajectory).dump() == to_json(second.trajectory).dump());
        CHECK(first.intervention_count == second.intervention_count);
        CHECK(first.revision_count == second.revision_count);
    }
}

TEST_CASE("horizon exhaustion terminates with the reward of the reached state") {
    auto e = make_episode(cgtest::tiny_cancel_task());
    EpisodeConfig cfg;
    cfg.critic_enabled = false;
    cfg.gate_policy = GatePolicy::never;
    cfg.horizon = 2;  // stops before the cancellation
    cfg.seed = 5;
    const EpisodeResult result = run_episode(e.doc.spec, *e.actor, nullptr, *e.env, cfg);
    CHECK(result.trajectory.terminated);
    CHECK(result.trajectory.steps.size() == 2);
    CHECK(result.reward.value == Rational(0));
}

TEST_CASE("episode counters are recomputable from the trajectory") {
    auto e = make_episode(cgtest::tiny_cancel_task(0.0, Json{{"3", "violate_constraint"}}));
    EpisodeConfig cfg;
    cfg.critic_enabled = true;
    cfg.gate_policy = GatePolicy::state_mutating;
    cfg.horizon = e.doc.spec.horizon;
    cfg.seed = 2;
    const EpisodeResult result =
        run_episode(e.doc.spec, *e.actor, e.critic.get(), *e.env, cfg);
    int gates = 0, revisions = 0;
    for (const auto& step : result.trajectory.steps) {
        gates += step.action.gate;
        if (step.action.verdict.has_value() &&
            step.action.verdict->decision == Decision::revise)
            ++revisions;
    }
    CHECK(gates == result.intervention_count);
    CHECK(revisions == result.revision_count);
    CHECK(revisions <= gates);
    CHECK(result.trajectory.reward.has_value());
    CHECK(result.trajectory.reward->value == result.reward.value);
}

TEST_CASE("gate soundness: every gated turn names a state-mutating tool") {
    auto e = make_episode(cgtest::tiny_cancel_task(0.6));
    EpisodeConfig cfg;
    cfg.critic_enabled = true;
    cfg.gate_policy = GatePolicy::state_mutating;
    cfg.horizon = e.doc.spec.horizon;
    cfg.seed = 77;
    const EpisodeResult result =
        run_episode(e.doc.spec, *e.actor, e.critic.get(), *e.env, cfg);
    auto env = make_environment(e.doc);
    for (const auto& step : result.trajectory.steps) {
        if (step.action.gate == 1) {
            CHECK(step.action.proposal.kind == ActionKind::tool_call);
            CHECK(env->is_state_mutating(step.action.proposal.tool_name));
        }
    }
}

namespace {

// Fails on a chosen turn; earlier turns defer to the scripted program.
class FlakyActor final : public ModelBackend {
public:
    FlakyActor(ScriptedActorProgram program, int failing_turn)
        : program_(std::move(program)), failing_turn_(failing_turn) {}
    std::string identity() const override { return "flaky-actor/v1"; }
    std::string complete(const BackendRequest& request) override {
        if (request.turn == failing_turn_) throw Error("connection reset by peer");
        return format_action(
            scripted_actor_step(program_, request.turn, request.seed, request.guidance));
    }

private:
    const ScriptedActorProgram program_;
    const int failing_turn_;
};

}  // namespace

TEST_CASE("backend failures abort the episode with turn context") {
    const auto doc = cgtest::tiny_cancel_task();
    auto env = make_environment(doc);
    FlakyActor actor(scripted_program_of(doc), 2);
    EpisodeConfig cfg;
    cfg.critic_enabled = false;
    cfg.gate_policy = GatePolicy::never;
    cfg.horizon = doc.spec.horizon;
    cfg.seed = 1;
    try {
        run_episode(doc.spec, actor, nullptr, *env, cfg);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.turn == 2);
        CHECK(std::string(e.what()).find("turn 2") != std::string::npos);
        CHECK(std::string(e.what()).find("connection reset") != std::string::npos);
    }
}

TEST_CASE("hallucinated declines are caught under the always gate") {
    const Json schedule{{"3", "hallucinate_constraint"}};

    // under state-mutating gating the decline is never inspected: task fails
    auto ungated = make_episode(cgtest::tiny_cancel_task(0.0, schedule));
    EpisodeConfig cfg;
    cfg.critic_enabled = true;
    cfg.gate_policy = GatePolicy::state_mutating;
    cfg.horizon = ungated.doc.spec.horizon;
    cfg.seed = 4;
    const EpisodeResult missed =
        run_episode(ungated.doc.spec, *ungated.actor, ungated.critic.get(), *ungated.env, cfg);
    CHECK(missed.reward.value == Rational(0));
    CHECK(missed.revision_count == 0);

    // the always gate lets the oracle repair the hallucinated constraint
    auto gated = make_episode(cgtest::tiny_cancel_task(0.0, schedule));
    cfg.gate_policy = GatePolicy::always;
    const EpisodeResult caught =
        run_episode(gated.doc.spec, *gated.actor, gated.critic.get(), *gated.env, cfg);
    CHECK(caught.reward.value == Rational(1));
    CHECK(caught.revision_count == 1);
}
