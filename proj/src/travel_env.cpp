#include "criticgate/travel_env.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace criticgate {
namespace travel {

namespace {

Json option_value(const TravelOption& option, const std::string& attribute) {
    if (attribute == "price") return Json(option.price);
    auto it = option.attributes.find(attribute);
    if (it == option.attributes.end()) return Json(nullptr);
    return it->second;
}

bool numeric_pair(const Json& a, const Json& b, double& av, double& bv) {
    if (!a.is_number() || !b.is_number()) return false;
    av = a.get<double>();
    bv = b.get<double>();
    return true;
}

std::string scalar_str(const Json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

std::set<std::string> tokenize(const std::string& text) {
    std::set<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.insert(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.insert(current);
    return tokens;
}

}  // namespace

bool preference_satisfied(const Preference& pref, const TravelOption& option) {
    const Json value = option_value(option, pref.attribute);
    if (value.is_null()) return false;
    if (pref.comparator == "gte" || pref.comparator == "lte") {
        double v = 0, t = 0;
        if (!numeric_pair(value, pref.threshold, v, t)) return false;
        return pref.comparator == "gte" ? v >= t : v <= t;
    }
    if (pref.comparator == "eq") return value == pref.threshold;
    if (pref.comparator == "in") {
        if (!pref.threshold.is_array())
            throw InvariantViolation("'in' preference needs an array threshold");
        for (const auto& allowed : pref.threshold)
            if (allowed == value) return true;
        return false;
    }
    throw InvariantViolation("unknown comparator '" + pref.comparator + "'");
}

Rational aspect_reward(const std::string& aspect, const std::string& chosen_option,
                       const PreferenceSet& prefs, const AspectOptions& options) {
    const TravelOption* chosen = nullptr;
    for (const auto& o : options.options)
        if (o.option_id == chosen_option) chosen = &o;
    if (!chosen) throw PreconditionError("unknown option_id '" + chosen_option + "'");

    const auto pit = prefs.find(aspect);
    const std::vector<Preference> empty;
    const std::vector<Preference>& aspect_prefs = pit == prefs.end() ? empty : pit->second;

    auto satisfies_all = [&](const TravelOption& o) {
        for (const auto& p : aspect_prefs)
            if (!preference_satisfied(p, o)) return false;
        return true;
    };

    if (!satisfies_all(*chosen)) return Rational(0);
    std::int64_t min_price = chosen->price;
    for (const auto& o : options.options)
        if (satisfies_all(o)) min_price = std::min(min_price, o.price);
    return chosen->price == min_price ? Rational(1) : Rational(4, 5);
}

std::string verbalize_preference(const std::string& aspect, const Preference& pref) {
    if (pref.comparator == "gte")
        return "For the " + aspect + ", I'd want " + pref.attribute + " to be at least " +
               scalar_str(pref.threshold) + ".";
    if (pref.comparator == "lte")
        return "For the " + aspect + ", I'd like " + pref.attribute + " to be at most " +
               scalar_str(pref.threshold) + ".";
    if (pref.comparator == "eq")
        return "For the " + aspect + ", I need " + pref.attribute + " to be " +
               scalar_str(pref.threshold) + ".";
    if (pref.comparator == "in") {
        std::string values;
        for (const auto& v : pref.threshold) {
            if (!values.empty()) values += " or ";
            values += scalar_str(v);
        }
        return "For the " + aspect + ", " + values + " would work for " + pref.attribute + ".";
    }
    throw InvariantViolation("unknown comparator '" + pref.comparator + "'");
}

UserReply user_reply(const PreferenceSet& prefs, const std::string& question,
                     const std::string& neutral_reply) {
    const auto tokens = tokenize(question);
    UserReply reply;
    reply.prefs = prefs;
    std::vector<std::string> statements;
    for (auto& [aspect, aspect_prefs] : reply.prefs) {
        for (auto& pref : aspect_prefs) {
            bool triggered = false;
            for (const auto& kw : pref.reveal_trigger)
                if (tokens.count(kw)) triggered = true;
            if (!triggered) continue;
            pref.revealed = true;  // idempotent for already-revealed preferences
            statements.push_back(verbalize_preference(aspect, pref));
        }
    }
    if (statements.empty()) {
        reply.text = neutral_reply;
    } else {
        for (const auto& s : statements) {
            if (!reply.text.empty()) reply.text += " ";
            reply.text += s;
        }
    }
    return reply;
}

RecordResult record_recommendation(const RecommendationLedger& ledger,
                                   const std::vector<AspectOptions>& aspects,
                                   const std::string& aspect, const std::string& option_id) {
    RecordResult result;
    result.ledger = ledger;
    const AspectOptions* target = nullptr;
    for (const auto& a : aspects)
        if (a.aspect == aspect) target = &a;
    if (!target) {
        result.error = "unknown travel aspect '" + aspect + "'";
        return result;
    }
    bool option_known = false;
    for (const auto& o : target->options)
        if (o.option_id == option_id) option_known = true;
    if (!option_known) {
        result.error = "unknown option '" + option_id + "' for aspect '" + aspect + "'";
        return result;
    }
    if (ledger.accepted.count(aspect)) {
        result.error = "a recommendation for '" + aspect + "' has already been made (" +
                       ledger.accepted.at(aspect) + "); it cannot be overridden";
        return result;
    }
    result.ledger.accepted[aspect] = option_id;
    result.accepted = true;
    return result;
}

std::string render_options(const AspectOptions& aspect) {
    std::string out = aspect.aspect + " options:";
    for (const auto& o : aspect.options) {
        out += "\n- " + o.option_id + ": price " + std::to_string(o.price);
        for (const auto& [name, value] : o.attributes) out += ", " + name + " " + scalar_str(value);
    }
    return out;
}

Json to_json(const Preference& pref) {
    return Json{{"attribute", pref.attribute},
                {"comparator", pref.comparator},
                {"threshold", pref.threshold},
                {"revealed", pref.revealed},
                {"reveal_trigger", pref.reveal_trigger}};
}

Preference preference_from_json(const Json& j, const std::string& where) {
    Preference pref;
    pref.attribute = j.at("attribute").get<std::string>();
    pref.comparator = j.at("comparator").get<std::string>();
    pref.threshold = Json(j.at("threshold"));
    pref.revealed = j.value("revealed", false);
    for (const auto& kw : j.value("reveal_trigger", Json::array()))
        pref.reveal_trigger.push_back(kw.get<std::string>());
    if (!pref.revealed && pref.reveal_trigger.empty())
        throw ParseError(where, "unrevealed preference without reveal_trigger");
    static const std::set<std::string> comparators{"gte", "lte", "eq", "in"};
    if (!comparators.count(pref.comparator))
        throw ParseError(where, "unknown comparator '" + pref.comparator + "'");
    return pref;
}

// ── Environment ──────────────────────────────────────────────────────

TravelEnv::TravelEnv(std::vector<AspectOptions> aspects, PreferenceSet prefs, std::string opening,
                     std::string neutral_reply)
    : aspects_(std::move(aspects)),
      prefs_(std::move(prefs)),
      opening_(std::move(opening)),
      neutral_reply_(std::move(neutral_reply)) {
    std::set<std::string> names;
    for (const auto& a : aspects_) {
        if (!names.insert(a.aspect).second)
            throw InvariantViolation("duplicate aspect '" + a.aspect + "'");
        std::set<std::string> ids;
        for (const auto& o : a.options) {
            if (!ids.insert(o.option_id).second)
                throw InvariantViolation("duplicate option_id '" + o.option_id + "'");
            if (o.price <= 0)
                throw InvariantViolation("option " + o.option_id + " has non-positive price");
        }
    }
    for (const auto& [aspect, aspect_prefs] : prefs_) {
        if (!names.count(aspect))
            throw InvariantViolation("preferences for unknown aspect '" + aspect + "'");
        // Task solvability: at least one option must satisfy every preference.
        const AspectOptions* a = find_aspect(aspect);
        bool solvable = false;
        for (const auto& o : a->options) {
            bool all = true;
            for (const auto& p : aspect_prefs)
                if (!preference_satisfied(p, o)) all = false;
            if (all) solvable = true;
        }
        if (!solvable)
            throw InvariantViolation("no option satisfies all preferences for '" + aspect + "'");
    }
}

std::unique_ptr<TravelEnv> TravelEnv::from_fixture(const Json& environment,
                                                   const Json& success_criterion,
                                                   const std::string& where) {
    std::vector<AspectOptions> aspects;
    for (const auto& aj : environment.at("aspects")) {
        AspectOptions a;
        a.aspect = aj.at("aspect").get<std::string>();
        for (const auto& oj : aj.at("options")) {
            TravelOption o;
            o.option_id = oj.at("option_id").get<std::string>();
            o.price = oj.at("price").get<std::int64_t>();
            const Json attrs_json = oj.value("attributes", Json::object());
            for (const auto& [name, value] : attrs_json.items())
                o.attributes[name] = Json(value);
            a.options.push_back(std::move(o));
        }
        aspects.push_back(std::move(a));
    }
    if (!success_criterion.is_object() || !success_criterion.contains("preferences"))
        throw ParseError(where + ".success_criterion", "expected {\"preferences\": {...}}");
    PreferenceSet prefs;
    for (const auto& [aspect, list] : success_criterion.at("preferences").items()) {
        std::vector<Preference> aspect_prefs;
        for (const auto& pj : list)
            aspect_prefs.push_back(preference_from_json(pj, where + ".preferences." + aspect));
        prefs[aspect] = std::move(aspect_prefs);
    }
    const Json& uj = environment.at("user");
    return std::make_unique<TravelEnv>(
        std::move(aspects), std::move(prefs), uj.at("opening").get<std::string>(),
        uj.value("neutral_reply", "No strong preference beyond what I've mentioned."));
}

const AspectOptions* TravelEnv::find_aspect(const std::string& name) const {
    for (const auto& a : aspects_)
        if (a.aspect == name) return &a;
    return nullptr;
}

Observation TravelEnv::initial_observation() {
    Observation obs;
    obs.source = Source::user;
    obs.content = opening_;
    return obs;
}

Environment::ExecutionResult TravelEnv::execute(const ActionProposal& action) {
    ExecutionResult result;
    switch (action.kind) {
        case ActionKind::message: {
            UserReply reply = user_reply(prefs_, action.text, neutral_reply_);
            prefs_ = std::move(reply.prefs);
            Observation obs;
            obs.source = Source::user;
            obs.content = std::move(reply.text);
            result.observation = std::move(obs);
            return result;
        }
        case ActionKind::recommendation: {
            RecordResult rec =
                record_recommendation(ledger_, aspects_, action.aspect, action.option_id);
            Observation obs;
            obs.source = Source::system;
            if (rec.accepted) {
                ledger_ = std::move(rec.ledger);
                obs.content = "recommendation recorded for " + action.aspect + ": " +
                              action.option_id;
                result.terminated = ledger_.accepted.size() == aspects_.size();
            } else {
                obs.content = "error: " + rec.error;
            }
            result.observation = std::move(obs);
            return result;
        }
        case ActionKind::tool_call: {
            Observation obs;
            obs.source = Source::system;
            obs.content = "error: no tools are available in this environment";
            result.observation = std::move(obs);
            return result;
        }
    }
    throw InvariantViolation("unknown ActionKind");
}

RewardValue TravelEnv::evaluate() const {
    RewardValue r;
    std::vector<Rational> components;
    for (const auto& a : aspects_) {
        auto it = ledger_.accepted.find(a.aspect);
        if (it == ledger_.accepted.end()) {
            components.push_back(Rational(0));
            r.breakdown.push_back(
                RewardComponent{a.aspect, Rational(0), "no recommendation recorded"});
            continue;
        }
        const Rational component = aspect_reward(a.aspect, it->second, prefs_, a);
        components.push_back(component);
        std::string detail = "option " + it->second;
        if (component == Rational(1))
            detail += " satisfies all preferences at minimal price";
        else if (component == Rational(4, 5))
            detail += " satisfies all preferences but is not price-minimal";
        else
            detail += " violates at least one preference";
        r.breakdown.push_back(RewardComponent{a.aspect, component, detail});
    }
    r.value = components.empty() ? Rational(0) : rational_mean(components.begin(), components.end());
    return r;
}

std::string TravelEnv::critic_context(const ActionProposal& proposal) const {
    if (proposal.kind == ActionKind::recommendation) {
        const AspectOptions* a = find_aspect(proposal.aspect);
        if (a) return render_options(*a);
    }
    std::string out;
    for (const auto& a : aspects_) {
        if (!out.empty()) out += "\n\n";
        out += render_options(a);
    }
    return out;
}

std::string TravelEnv::actor_instructions() const {
    std::string out =
        "You are a travel planning agent. Ask the user questions to uncover their "
        "preferences, then recommend exactly one option per travel aspect with a fenced "
        "block:\n```recommend\naspect: <aspect>\noption_id: <option_id>\n```\n\n"
        "Aim for the cheapest option that satisfies every preference. Each aspect accepts "
        "a single recommendation; it cannot be changed afterwards.\n\n";
    for (const auto& a : aspects_) out += render_options(a) + "\n\n";
    out += "Anything outside a fenced block is sent to the user as a message.";
    return out;
}

std::vector<Finding> TravelEnv::diagnose(const ActionProposal& action) const {
    std::vector<Finding> findings;
    if (action.kind != ActionKind::recommendation) return findings;
    const AspectOptions* a = find_aspect(action.aspect);
    if (!a) {
        findings.push_back(Finding{"redundant", "there is no travel aspect named '" +
                                                    action.aspect + "'"});
        return findings;
    }
    if (ledger_.accepted.count(action.aspect)) {
        findings.push_back(Finding{
            "redundant", "an option for '" + action.aspect +
                             "' was already recommended and cannot be overridden"});
        return findings;
    }
    const TravelOption* chosen = nullptr;
    for (const auto& o : a->options)
        if (o.option_id == action.option_id) chosen = &o;
    if (!chosen) {
        findings.push_back(Finding{"preference_violation", "option '" + action.option_id +
                                                               "' does not exist for '" +
                                                               action.aspect + "'"});
        return findings;
    }
    const auto pit = prefs_.find(action.aspect);
    if (pit == prefs_.end()) return findings;
    bool violated = false;
    for (const auto& pref : pit->second) {
        if (!preference_satisfied(pref, *chosen)) {
            violated = true;
            findings.push_back(Finding{
                "preference_violation",
                "option " + action.option_id + " does not satisfy the user's preference: " +
                    verbalize_preference(action.aspect, pref)});
        }
    }
    if (!violated) {
        const Rational component = aspect_reward(action.aspect, action.option_id, prefs_, *a);
        if (component == Rational(4, 5))
            findings.push_back(Finding{
                "suboptimal",
                "option " + action.option_id +
                    " satisfies the preferences but a cheaper satisfying option exists"});
    }
    return findings;
}

std::unique_ptr<Environment> TravelEnv::clone() const {
    auto copy = std::make_unique<TravelEnv>(aspects_, prefs_, opening_, neutral_reply_);
    copy->ledger_ = ledger_;
    return copy;
}

}  // namespace travel
}  // namespace criticgate
