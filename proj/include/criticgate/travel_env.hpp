#pragma once

#include "criticgate/environment.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace criticgate {
namespace travel {

struct TravelOption {
    std::string option_id;
    std::int64_t price = 0;
    std::map<std::string, Json> attributes;  // scalar values only

    friend bool operator==(const TravelOption&, const TravelOption&) = default;
};

struct AspectOptions {
    std::string aspect;
    std::vector<TravelOption> options;

    friend bool operator==(const AspectOptions&, const AspectOptions&) = default;
};

// One user preference over an aspect attribute. "price" refers to the option
// price. Unrevealed preferences still count toward the reward; the agent is
// expected to elicit them through questions.
struct Preference {
    std::string attribute;
    std::string comparator;  // gte | lte | eq | in
    Json threshold;
    bool revealed = false;
    std::vector<std::string> reveal_trigger;  // lowercase keywords

    friend bool operator==(const Preference&, const Preference&) = default;
};

// aspect name -> preferences, iterated in key order for determinism.
using PreferenceSet = std::map<std::string, std::vector<Preference>>;

// At most one recommendation per aspect, immutable once set.
struct RecommendationLedger {
    std::map<std::string, std::string> accepted;  // aspect -> option_id

    friend bool operator==(const RecommendationLedger&, const RecommendationLedger&) = default;
};

bool preference_satisfied(const Preference& pref, const TravelOption& option);

// {0, 4/5, 1}: 1 = satisfies every preference at minimal price among the
// satisfying options (price ties all score 1); 4/5 = satisfies all but is not
// price-minimal; 0 = violates some preference. Throws on unknown option_id.
Rational aspect_reward(const std::string& aspect, const std::string& chosen_option,
                       const PreferenceSet& prefs, const AspectOptions& options);

// Verbalizes a preference the way the scripted user states it.
std::string verbalize_preference(const std::string& aspect, const Preference& pref);

struct UserReply {
    std::string text;
    PreferenceSet prefs;  // updated set
};

// Reveals every unrevealed preference whose trigger keywords intersect the
// question; already-revealed preferences that match are restated without a
// state change. No match yields the neutral reply.
UserReply user_reply(const PreferenceSet& prefs, const std::string& question,
                     const std::string& neutral_reply);

struct RecordResult {
    RecommendationLedger ledger;
    bool accepted = false;
    std::string error;  // non-empty iff rejected
};

RecordResult record_recommendation(const RecommendationLedger& ledger,
                                   const std::vector<AspectOptions>& aspects,
                                   const std::string& aspect, const std::string& option_id);

std::string render_options(const AspectOptions& aspect);

Json to_json(const Preference& pref);
Preference preference_from_json(const Json& j, const std::string& where);

class TravelEnv final : public Environment {
public:
    TravelEnv(std::vector<AspectOptions> aspects, PreferenceSet prefs, std::string opening,
              std::string neutral_reply);

    // environment block: {"aspects": [...], "user": {"opening": ..., "neutral_reply": ...}};
    // success criterion: {"preferences": {aspect: [...]}}.
    static std::unique_ptr<TravelEnv> from_fixture(const Json& environment,
                                                   const Json& success_criterion,
                                                   const std::string& where);

    std::string kind() const override { return "travel"; }
    Observation initial_observation() override;
    bool has_tool(const std::string&) const override { return false; }
    bool is_state_mutating(const std::string&) const override { return false; }
    ExecutionResult execute(const ActionProposal& action) override;
    RewardValue evaluate() const override;
    std::string critic_context(const ActionProposal& proposal) const override;
    std::string actor_instructions() const override;
    std::vector<Finding> diagnose(const ActionProposal& action) const override;
    std::unique_ptr<Environment> clone() const override;

    const std::vector<AspectOptions>& aspects() const { return aspects_; }
    const PreferenceSet& preferences() const { return prefs_; }
    const RecommendationLedger& ledger() const { return ledger_; }

private:
    const AspectOptions* find_aspect(const std::string& name) const;

    std::vector<AspectOptions> aspects_;
    PreferenceSet prefs_;
    RecommendationLedger ledger_;
    std::string opening_;
    std::string neutral_reply_;
};

}  // namespace travel
}  // namespace criticgate
