#include "criticgate/generators.hpp"

#include "criticgate/hash.hpp"
#include "criticgate/retail_env.hpp"
#include "criticgate/serialize.hpp"
#include "criticgate/travel_env.hpp"

#include <algorithm>
#include <cstdio>

namespace criticgate {

namespace {

std::string zero_pad(int value, int width) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%0*d", width, value);
    return buf;
}

Json program_meta(const GeneratorOptions& opts) {
    Json modes = Json::array();
    for (const auto& m : opts.error_modes) modes.push_back(to_string(m));
    return Json{{"compliance", to_string(opts.compliance)},
                {"error_modes", modes},
                {"error_probability", opts.error_probability},
                {"error_schedule", Json::object()}};
}

Json step_json(const ActionProposal& intended,
               const std::vector<std::pair<ErrorMode, ActionProposal>>& perturbations = {}) {
    Json p = Json::object();
    for (const auto& [mode, action] : perturbations) p[to_string(mode)] = to_json(action);
    return Json{{"intended", to_json(intended)}, {"perturbations", p}};
}

// ── Retail ───────────────────────────────────────────────────────────

struct RetailNames {
    std::vector<std::string> products{"desk lamp",   "backpack",  "action camera",
                                      "patio umbrella", "headphones", "water bottle"};
    std::vector<std::string> variant_labels{"black", "blue", "red", "large", "compact", "steel"};
    std::vector<std::string> payment_kinds{"credit_card", "gift_card", "paypal"};
};

TaskDocument make_retail_task(int index, Rng& rng, const GeneratorOptions& opts) {
    const RetailNames names;
    const std::string task_id = "retail-" + zero_pad(index, 4);
    const std::string order_id = "W" + std::to_string(1000 + index);
    const std::string user_id = "u" + std::to_string(index);

    // User with at least two payment methods so a wrong-refund perturbation
    // always exists.
    std::vector<std::string> methods;
    const std::size_t first_kind = rng.below(names.payment_kinds.size());
    for (std::size_t k = 0; k < 2 + rng.below(2); ++k) {
        const auto& kind = names.payment_kinds[(first_kind + k) % names.payment_kinds.size()];
        methods.push_back(kind + "_" + std::to_string(1000 + rng.below(9000)));
    }
    const std::string original_method = methods[0];
    const std::string wrong_method = methods[1];

    // Catalog: three products, three variants each, distinct prices.
    Json catalog = Json::object();
    std::vector<std::string> product_ids;
    std::vector<std::vector<std::string>> variant_ids;
    std::vector<std::vector<std::int64_t>> variant_prices;
    const std::size_t name_base = rng.below(names.products.size());
    for (int p = 0; p < 3; ++p) {
        const std::string pid = "p" + std::to_string(p + 1);
        product_ids.push_back(pid);
        Json variants = Json::array();
        std::vector<std::string> ids;
        std::vector<std::int64_t> prices;
        const std::size_t label_base = rng.below(names.variant_labels.size());
        for (int v = 0; v < 3; ++v) {
            const std::string vid = pid + "_v" + std::to_string(v + 1);
            const std::int64_t price = 20 + 60 * p + 17 * v + rng.range(0, 9);
            variants.push_back(Json{
                {"variant_id", vid},
                {"label", names.variant_labels[(label_base + v) % names.variant_labels.size()]},
                {"price", price}});
            ids.push_back(vid);
            prices.push_back(price);
        }
        catalog[pid] = Json{{"name", names.products[(name_base + p) % names.products.size()]},
                            {"variants", variants}};
        variant_ids.push_back(ids);
        variant_prices.push_back(prices);
    }

    // Order with two items on distinct products; current variant index 0.
    const std::vector<std::string> item_ids{"i1", "i2"};
    Json items = Json::array();
    for (std::size_t k = 0; k < item_ids.size(); ++k)
        items.push_back(Json{{"item_id", item_ids[k]},
                             {"variant_id", variant_ids[k][0]},
                             {"price", variant_prices[k][0]}});
    Json orders = Json::object();
    orders[order_id] = Json{{"items", items},
                            {"status", "pending"},
                            {"payment_method", original_method},
                            {"refund_method", ""}};
    // Occasional shipped decoy order, irrelevant to the ground truth.
    if (rng.below(3) == 0) {
        const std::string decoy_id = "W" + std::to_string(8000 + index);
        orders[decoy_id] = Json{{"items", Json::array({Json{{"item_id", "i1"},
                                                            {"variant_id", variant_ids[2][0]},
                                                            {"price", variant_prices[2][0]}}})},
                                {"status", "shipped"},
                                {"payment_method", original_method},
                                {"refund_method", ""}};
    }

    Json initial_state{{"orders", orders},
                       {"users", Json{{user_id, Json{{"payment_methods", methods},
                                                     {"membership", rng.below(2) ? "premium"
                                                                                 : "regular"}}}}},
                       {"catalog", catalog}};

    // Task pattern: 0,1 cancel; 2,3 two modifications; 4 one modification.
    const std::uint64_t pattern = rng.below(5);

    auto tool = [](const std::string& name, std::map<std::string, std::string> args) {
        return ActionProposal::make_tool_call(name, std::move(args));
    };
    auto msg = [](const std::string& text) { return ActionProposal::make_message(text); };

    std::string instruction;
    std::vector<std::string> utterances;
    Json steps = Json::array();
    Json authorized_cancels = Json::array();
    Json authorized_modifications = Json::array();
    Json state_match = Json::object();

    const ActionProposal hallucinated_decline = msg(
        "I'm sorry, but store policy does not allow me to make that change to this order.");

    if (pattern <= 1) {
        instruction = "Hi! Please cancel my order " + order_id +
                      " — I no longer need it. The refund should go back to my original "
                      "payment method.";
        utterances = {instruction, "Yes, please go ahead."};
        authorized_cancels.push_back(order_id);
        state_match["orders." + order_id + ".status"] = "cancelled";
        state_match["orders." + order_id + ".refund_method"] = original_method;

        steps.push_back(step_json(tool("get_order_details", {{"order_id", order_id}})));
        steps.push_back(step_json(msg("I found order " + order_id +
                                      ". The refund will go to " + original_method +
                                      ". Shall I proceed with the cancellation?")));
        steps.push_back(step_json(
            tool("cancel_order", {{"order_id", order_id}, {"refund_method", original_method}}),
            {{ErrorMode::violate_constraint,
              tool("cancel_order", {{"order_id", order_id}, {"refund_method", wrong_method}})},
             {ErrorMode::hallucinate_constraint, hallucinated_decline}}));
        steps.push_back(step_json(msg("All done — order " + order_id +
                                      " is cancelled and the refund goes to " + original_method +
                                      ".")));
    } else {
        const int n_mods = pattern == 4 ? 1 : 2;
        std::vector<std::string> targets, decoys, labels;
        for (int k = 0; k < n_mods; ++k) {
            // current variant is index 0; intended target and decoy differ
            const int target = 1 + static_cast<int>(rng.below(2));
            const int decoy = target == 1 ? 2 : 1;
            targets.push_back(variant_ids[static_cast<std::size_t>(k)][target]);
            decoys.push_back(variant_ids[static_cast<std::size_t>(k)][decoy]);
            labels.push_back(catalog[product_ids[static_cast<std::size_t>(k)]]["variants"]
                                    [target]["label"]
                                        .get<std::string>());
        }
        instruction = "Hi! For order " + order_id + ", please switch item " + item_ids[0] +
                      " to the " + labels[0] + " variant (" + targets[0] + ")";
        if (n_mods == 2)
            instruction += " and item " + item_ids[1] + " to the " + labels[1] + " variant (" +
                           targets[1] + ")";
        instruction += ". Keep everything else as is.";
        utterances = {instruction};

        state_match["orders." + order_id + ".status"] = "modified";
        steps.push_back(step_json(tool("get_order_details", {{"order_id", order_id}})));
        for (int k = 0; k < n_mods; ++k) {
            const std::string& item = item_ids[static_cast<std::size_t>(k)];
            authorized_modifications.push_back(order_id + "/" + item + "/" + targets[static_cast<std::size_t>(k)]);
            state_match["orders." + order_id + ".items." + item + ".variant_id"] =
                targets[static_cast<std::size_t>(k)];
            steps.push_back(step_json(
                tool("modify_item", {{"order_id", order_id},
                                     {"item_id", item},
                                     {"new_variant_id", targets[static_cast<std::size_t>(k)]}}),
                {{ErrorMode::violate_constraint,
                  tool("modify_item", {{"order_id", order_id},
                                       {"item_id", item},
                                       {"new_variant_id", decoys[static_cast<std::size_t>(k)]}})},
                 {ErrorMode::hallucinate_constraint, hallucinated_decline}}));
        }
        steps.push_back(step_json(msg("All set — the requested item changes on " + order_id +
                                      " are in place.")));
    }

    Json policies = Json::array(
        {Json{{"rule_id", "cancel-not-shipped"},
              {"tool", "cancel_order"},
              {"require", Json::array({Json{{"lhs", "order.status"},
                                            {"op", "in"},
                                            {"rhs", Json::array({"pending", "modified"})}}})},
              {"message",
               "Orders that have shipped or were already cancelled cannot be cancelled."}},
         Json{{"rule_id", "refund-original-method"},
              {"tool", "cancel_order"},
              {"require", Json::array({Json{{"lhs", "arg.refund_method"},
                                            {"op", "eq"},
                                            {"rhs_ref", "order.payment_method"}}})},
              {"message", "Refunds must be processed using the original payment method."}},
         Json{{"rule_id", "authorized-cancellation"},
              {"tool", "cancel_order"},
              {"require", Json::array({Json{{"lhs", "arg.order_id"},
                                            {"op", "in"},
                                            {"rhs", authorized_cancels}}})},
              {"message", "Only cancellations the customer has requested may be processed."}},
         Json{{"rule_id", "modify-not-shipped"},
              {"tool", "modify_item"},
              {"require", Json::array({Json{{"lhs", "order.status"},
                                            {"op", "in"},
                                            {"rhs", Json::array({"pending", "modified"})}}})},
              {"message", "Only orders that have not shipped can be modified."}},
         Json{{"rule_id", "variant-same-product"},
              {"tool", "modify_item"},
              {"require", Json::array({Json{{"lhs", "variant_product"},
                                            {"op", "eq"},
                                            {"rhs_ref", "item_product"}}})},
              {"message", "Items can only be exchanged for another variant of the same product."}},
         Json{{"rule_id", "authorized-modification"},
              {"tool", "modify_item"},
              {"require",
               Json::array({Json{{"lhs", "join(order_id,item_id,new_variant_id)"},
                                 {"op", "in"},
                                 {"rhs", authorized_modifications}}})},
              {"message", "Item changes must match exactly what the customer requested."}}});

    TaskDocument doc;
    doc.spec.task_id = task_id;
    doc.spec.environment_id = "retail";
    doc.spec.instruction = instruction;
    doc.spec.user_script_id = task_id + "-user";
    doc.spec.success_criterion = Json{{"state_match", state_match}};
    doc.spec.horizon = static_cast<int>(steps.size()) + 3;
    doc.environment = Json{{"initial_state", initial_state},
                           {"policies", policies},
                           {"user_script", Json{{"id", doc.spec.user_script_id},
                                                {"utterances", utterances},
                                                {"farewell", "Thanks, that's everything."}}}};
    doc.actor_program = program_meta(opts);
    doc.actor_program["steps"] = steps;
    return doc;
}

// ── Travel ───────────────────────────────────────────────────────────

struct TravelAttr {
    std::string name;
    bool numeric;
    std::int64_t lo = 0, hi = 0;          // numeric range
    std::vector<std::string> values;      // categorical values
    std::string comparator;               // gte | lte | eq
    std::vector<std::string> triggers;
};

struct TravelAspectSpec {
    std::string name;
    std::string option_prefix;
    std::vector<TravelAttr> attrs;
};

const std::vector<TravelAspectSpec>& travel_aspect_specs() {
    static const std::vector<TravelAspectSpec> specs{
        {"flight",
         "F",
         {{"rating", true, 1, 10, {}, "gte", {"rating", "quality", "reviews"}},
          {"stops", true, 0, 2, {}, "lte", {"stops", "layover", "layovers", "direct"}},
          {"baggage", true, 0, 2, {}, "gte", {"baggage", "bags", "luggage"}},
          {"refundable", false, 0, 0, {"yes", "no"}, "eq",
           {"refundable", "refund", "cancellation"}}}},
        {"apartment",
         "A",
         {{"rating", true, 1, 10, {}, "gte", {"rating", "quality", "reviews"}},
          {"bedrooms", true, 1, 4, {}, "gte", {"bedrooms", "rooms", "space"}},
          {"wifi", false, 0, 0, {"yes", "no"}, "eq", {"wifi", "internet", "connection"}},
          {"area", false, 0, 0, {"center", "suburb", "airport"}, "eq",
           {"area", "location", "neighborhood"}}}},
        {"rental_car",
         "C",
         {{"rating", true, 1, 10, {}, "gte", {"rating", "quality", "reviews"}},
          {"seats", true, 2, 7, {}, "gte", {"seats", "seating", "passengers"}},
          {"insurance", false, 0, 0, {"yes", "no"}, "eq",
           {"insurance", "coverage", "waiver"}},
          {"transmission", false, 0, 0, {"automatic", "manual"}, "eq",
           {"transmission", "gearbox", "shift"}}}}};
    return specs;
}

Json random_attr_value(const TravelAttr& attr, Rng& rng) {
    if (attr.numeric) return Json(rng.range(attr.lo, attr.hi));
    return Json(attr.values[rng.below(attr.values.size())]);
}

Json satisfying_attr_value(const TravelAttr& attr, const Json& threshold, Rng& rng) {
    if (!attr.numeric) return threshold;
    const std::int64_t t = threshold.get<std::int64_t>();
    if (attr.comparator == "gte") return Json(rng.range(t, attr.hi));
    return Json(rng.range(attr.lo, t));  // lte
}

Json violating_attr_value(const TravelAttr& attr, const Json& threshold, Rng& rng) {
    if (!attr.numeric) {
        std::vector<std::string> others;
        for (const auto& v : attr.values)
            if (Json(v) != threshold) others.push_back(v);
        return Json(others[rng.below(others.size())]);
    }
    const std::int64_t t = threshold.get<std::int64_t>();
    if (attr.comparator == "gte") return Json(rng.range(attr.lo, t - 1));
    return Json(rng.range(t + 1, attr.hi));  // lte
}

TaskDocument make_travel_task(int index, int difficulty, Rng& rng,
                              const GeneratorOptions& opts) {
    const auto& specs = travel_aspect_specs();
    const std::string task_id = "travel-d" + std::to_string(difficulty) + "-" + zero_pad(index, 4);

    // Two aspects per task, as in the two-aspect travel environments.
    const std::uint64_t pair_choice = rng.below(3);
    std::vector<const TravelAspectSpec*> chosen;
    if (pair_choice == 0) chosen = {&specs[0], &specs[1]};
    else if (pair_choice == 1) chosen = {&specs[0], &specs[2]};
    else chosen = {&specs[1], &specs[2]};

    Json aspects = Json::array();
    Json preferences = Json::object();
    Json steps = Json::array();
    std::string options_text;

    for (const TravelAspectSpec* spec : chosen) {
        // difficulty preferences over distinct attributes; thresholds leave
        // room on both sides so satisfying and violating values exist.
        std::vector<std::size_t> attr_order{0, 1, 2, 3};
        for (std::size_t k = attr_order.size(); k > 1; --k)
            std::swap(attr_order[k - 1], attr_order[rng.below(k)]);
        attr_order.resize(static_cast<std::size_t>(difficulty));

        struct ChosenPref {
            const TravelAttr* attr;
            Json threshold;
        };
        std::vector<ChosenPref> prefs;
        Json pref_json = Json::array();
        for (const auto ai : attr_order) {
            const TravelAttr& attr = spec->attrs[ai];
            Json threshold;
            if (attr.numeric)
                threshold = Json(rng.range(attr.lo + 1, attr.hi - 1));
            else
                threshold = Json(attr.values[rng.below(attr.values.size())]);
            prefs.push_back(ChosenPref{&attr, threshold});
            pref_json.push_back(Json{{"attribute", attr.name},
                                     {"comparator", attr.comparator},
                                     {"threshold", threshold},
                                     {"revealed", false},
                                     {"reveal_trigger", attr.triggers}});
        }
        preferences[spec->name] = pref_json;

        // Options: a few guaranteed-satisfying, a few guaranteed-violating,
        // the rest random; all prices distinct.
        const int n_options = 8 + static_cast<int>(rng.below(5));
        const int n_sat = 2 + static_cast<int>(rng.below(2));
        const int n_bad = 2 + static_cast<int>(rng.below(2));
        std::vector<std::int64_t> prices;
        for (int o = 0; o < n_options; ++o)
            prices.push_back(80 + 15 * o + rng.range(0, 9));
        for (std::size_t k = prices.size(); k > 1; --k)
            std::swap(prices[k - 1], prices[rng.below(k)]);

        Json options = Json::array();
        for (int o = 0; o < n_options; ++o) {
            Json attributes = Json::object();
            if (o < n_sat) {
                for (const auto& p : prefs)
                    attributes[p.attr->name] = satisfying_attr_value(*p.attr, p.threshold, rng);
            } else if (o < n_sat + n_bad) {
                const auto& broken = prefs[rng.below(prefs.size())];
                for (const auto& p : prefs)
                    attributes[p.attr->name] =
                        &p == &broken ? violating_attr_value(*p.attr, p.threshold, rng)
                                      : satisfying_attr_value(*p.attr, p.threshold, rng);
            }
            for (const auto& attr : spec->attrs)
                if (!attributes.contains(attr.name))
                    attributes[attr.name] = random_attr_value(attr, rng);
            options.push_back(Json{{"option_id", spec->option_prefix + std::to_string(o + 1)},
                                   {"price", prices[static_cast<std::size_t>(o)]},
                                   {"attributes", attributes}});
        }
        aspects.push_back(Json{{"aspect", spec->name}, {"options", options}});
    }

    // Resolve each aspect against the actual predicates to script the optimal
    // recommendation and the perturbations.
    std::vector<travel::AspectOptions> parsed_aspects;
    travel::PreferenceSet parsed_prefs;
    for (const auto& aj : aspects) {
        travel::AspectOptions a;
        a.aspect = aj.at("aspect").get<std::string>();
        for (const auto& oj : aj.at("options")) {
            travel::TravelOption o;
            o.option_id = oj.at("option_id").get<std::string>();
            o.price = oj.at("price").get<std::int64_t>();
            for (const auto& [name, value] : oj.at("attributes").items())
                o.attributes[name] = Json(value);
            a.options.push_back(std::move(o));
        }
        parsed_aspects.push_back(std::move(a));
    }
    for (const auto& [aspect, list] : preferences.items()) {
        std::vector<travel::Preference> ps;
        for (const auto& pj : list) ps.push_back(travel::preference_from_json(pj, task_id));
        parsed_prefs[aspect] = std::move(ps);
    }

    for (const auto& a : parsed_aspects) {
        const auto& ps = parsed_prefs.at(a.aspect);
        auto satisfies_all = [&](const travel::TravelOption& o) {
            for (const auto& p : ps)
                if (!travel::preference_satisfied(p, o)) return false;
            return true;
        };
        const travel::TravelOption* optimal = nullptr;
        const travel::TravelOption* second = nullptr;
        const travel::TravelOption* violating = nullptr;
        for (const auto& o : a.options) {
            if (satisfies_all(o)) {
                if (!optimal || o.price < optimal->price) optimal = &o;
            } else if (!violating) {
                violating = &o;
            }
        }
        for (const auto& o : a.options)
            if (satisfies_all(o) && o.option_id != optimal->option_id &&
                (!second || o.price < second->price))
                second = &o;

        std::string question = "Before I pick a " + a.aspect + ": any preferences on ";
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (k) question += k + 1 == ps.size() ? " or " : ", ";
            question += ps[k].reveal_trigger.front();
        }
        question += "?";
        steps.push_back(step_json(ActionProposal::make_message(question)));

        const ActionProposal recommend =
            ActionProposal::make_recommendation(a.aspect, optimal->option_id);
        std::vector<std::pair<ErrorMode, ActionProposal>> perturbations;
        if (violating)
            perturbations.push_back({ErrorMode::violate_constraint,
                                     ActionProposal::make_recommendation(a.aspect,
                                                                         violating->option_id)});
        if (second)
            perturbations.push_back({ErrorMode::suboptimal_choice,
                                     ActionProposal::make_recommendation(a.aspect,
                                                                         second->option_id)});
        perturbations.push_back(
            {ErrorMode::hallucinate_constraint,
             ActionProposal::make_message("Just to be sure about the " + a.aspect +
                                          ": is there anything else I should know?")});
        steps.push_back(step_json(recommend, perturbations));

        if (!options_text.empty()) options_text += "\n\n";
        options_text += travel::render_options(a);
    }

    const std::string instruction =
        "Hi! I'm planning a trip and need your help picking a " + chosen[0]->name + " and a " +
        chosen[1]->name +
        ". Please recommend exactly one option for each — ask me whatever you need.\n\n" +
        options_text;

    TaskDocument doc;
    doc.spec.task_id = task_id;
    doc.spec.environment_id = "travel";
    doc.spec.instruction = instruction;
    doc.spec.user_script_id = task_id + "-user";
    doc.spec.success_criterion = Json{{"preferences", preferences}};
    doc.spec.horizon = static_cast<int>(steps.size()) + 3;
    doc.environment =
        Json{{"aspects", aspects},
             {"user", Json{{"opening", instruction},
                           {"neutral_reply",
                            "No strong preference beyond what I've mentioned."}}}};
    doc.actor_program = program_meta(opts);
    doc.actor_program["steps"] = steps;
    return doc;
}

}  // namespace

Suite generate_retail_suite(int n_tasks, std::uint64_t seed, const GeneratorOptions& opts) {
    Suite suite;
    suite.env_kind = "retail";
    for (int i = 1; i <= n_tasks; ++i) {
        Rng rng(mix(seed, static_cast<std::uint64_t>(i)));
        TaskDocument doc = make_retail_task(i, rng, opts);
        validate_task_document(doc);
        suite.tasks.push_back(std::move(doc));
    }
    return suite;
}

Suite generate_travel_suite(int n_tasks, int difficulty, std::uint64_t seed,
                            const GeneratorOptions& opts) {
    if (difficulty < 2 || difficulty > 4)
        throw ConfigError("travel difficulty must be 2, 3 or 4");
    Suite suite;
    suite.env_kind = "travel";
    for (int i = 1; i <= n_tasks; ++i) {
        Rng rng(mix(seed ^ 0x7261766c65ULL, mix(static_cast<std::uint64_t>(difficulty),
                                                static_cast<std::uint64_t>(i))));
        TaskDocument doc = make_travel_task(i, difficulty, rng, opts);
        validate_task_document(doc);
        suite.tasks.push_back(std::move(doc));
    }
    return suite;
}

void validate_task_document(const TaskDocument& doc) {
    const ScriptedActorProgram program = scripted_program_of(doc);
    auto env = make_environment(doc);
    env->initial_observation();
    auto* retail_env = dynamic_cast<retail::RetailEnv*>(env.get());

    bool terminated = false;
    for (const auto& step : program.steps) {
        if (terminated)
            throw InvariantViolation(doc.spec.task_id +
                                     ": scripted steps continue past termination");
        if (retail_env && step.intended.kind == ActionKind::tool_call &&
            retail_env->is_state_mutating(step.intended.tool_name)) {
            const auto violated =
                retail::check_policies(retail_env->state(), retail_env->policies(),
                                       retail::tool_call_of(step.intended));
            if (!violated.empty())
                throw InvariantViolation(doc.spec.task_id + ": intended call violates policy " +
                                         violated.front().rule_id);
        }
        if (!retail_env && step.intended.kind == ActionKind::recommendation) {
            if (!env->diagnose(step.intended).empty())
                throw InvariantViolation(doc.spec.task_id +
                                         ": intended recommendation is not optimal");
        }
        terminated = env->execute(step.intended).terminated;
    }
    if (env->evaluate().value != Rational(1))
        throw InvariantViolation(doc.spec.task_id + ": scripted path does not reach reward 1");
    if (static_cast<int>(program.steps.size()) > doc.spec.horizon)
        throw InvariantViolation(doc.spec.task_id + ": horizon shorter than the script");
}

}  // namespace criticgate
