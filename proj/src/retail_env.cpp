#include "criticgate/retail_env.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace criticgate {
namespace retail {

namespace {

const std::set<std::string>& valid_statuses() {
    static const std::set<std::string> s{"pending", "shipped", "cancelled", "modified"};
    return s;
}

const Order* find_order(const RetailState& state, const std::string& id) {
    auto it = state.orders.find(id);
    return it == state.orders.end() ? nullptr : &it->second;
}

const OrderItem* find_item(const Order& order, const std::string& item_id) {
    for (const auto& item : order.items)
        if (item.item_id == item_id) return &item;
    return nullptr;
}

// product owning a variant, or nullptr
const Product* product_of_variant(const RetailState& state, const std::string& variant_id,
                                  const ProductVariant** out_variant = nullptr) {
    for (const auto& [pid, product] : state.catalog)
        for (const auto& v : product.variants)
            if (v.variant_id == variant_id) {
                if (out_variant) *out_variant = &v;
                return &product;
            }
    return nullptr;
}

}  // namespace

void validate_state(const RetailState& state) {
    for (const auto& [pid, product] : state.catalog) {
        if (product.product_id != pid)
            throw InvariantViolation("catalog key mismatch for " + pid);
        if (product.variants.empty())
            throw InvariantViolation("product " + pid + " has no variants");
        for (const auto& v : product.variants)
            if (v.price <= 0)
                throw InvariantViolation("variant " + v.variant_id + " has non-positive price");
    }
    for (const auto& [uid, user] : state.users) {
        if (user.user_id != uid) throw InvariantViolation("user key mismatch for " + uid);
        if (user.payment_methods.empty())
            throw InvariantViolation("user " + uid + " has no payment methods");
    }
    for (const auto& [oid, order] : state.orders) {
        if (order.order_id != oid) throw InvariantViolation("order key mismatch for " + oid);
        if (!valid_statuses().count(order.status))
            throw InvariantViolation("order " + oid + " has invalid status '" + order.status + "'");
        if (order.payment_method.empty())
            throw InvariantViolation("order " + oid + " has no payment method");
        for (const auto& item : order.items) {
            if (item.price <= 0)
                throw InvariantViolation("item " + item.item_id + " has non-positive price");
            if (!product_of_variant(state, item.variant_id))
                throw InvariantViolation("item " + item.item_id + " references unknown variant " +
                                         item.variant_id);
        }
    }
}

Json state_to_json(const RetailState& state) {
    Json orders = Json::object();
    for (const auto& [oid, order] : state.orders) {
        Json items = Json::array();
        for (const auto& item : order.items)
            items.push_back(Json{{"item_id", item.item_id},
                                 {"variant_id", item.variant_id},
                                 {"price", item.price}});
        orders[oid] = Json{{"items", items},
                           {"status", order.status},
                           {"payment_method", order.payment_method},
                           {"refund_method", order.refund_method}};
    }
    Json users = Json::object();
    for (const auto& [uid, user] : state.users)
        users[uid] = Json{{"payment_methods", user.payment_methods},
                          {"membership", user.membership}};
    Json catalog = Json::object();
    for (const auto& [pid, product] : state.catalog) {
        Json variants = Json::array();
        for (const auto& v : product.variants)
            variants.push_back(
                Json{{"variant_id", v.variant_id}, {"label", v.label}, {"price", v.price}});
        catalog[pid] = Json{{"name", product.name}, {"variants", variants}};
    }
    return Json{{"orders", orders}, {"users", users}, {"catalog", catalog}};
}

RetailState state_from_json(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where, "expected an object");
    RetailState state;
    const Json orders_json = j.value("orders", Json::object());
    for (const auto& [oid, oj] : orders_json.items()) {
        Order order;
        order.order_id = oid;
        for (const auto& ij : oj.value("items", Json::array())) {
            OrderItem item;
            item.item_id = ij.at("item_id").get<std::string>();
            item.variant_id = ij.at("variant_id").get<std::string>();
            item.price = ij.at("price").get<std::int64_t>();
            order.items.push_back(std::move(item));
        }
        order.status = oj.value("status", "pending");
        order.payment_method = oj.value("payment_method", "");
        order.refund_method = oj.value("refund_method", "");
        state.orders[oid] = std::move(order);
    }
    const Json users_json = j.value("users", Json::object());
    for (const auto& [uid, uj] : users_json.items()) {
        User user;
        user.user_id = uid;
        for (const auto& pm : uj.value("payment_methods", Json::array()))
            user.payment_methods.push_back(pm.get<std::string>());
        user.membership = uj.value("membership", "regular");
        state.users[uid] = std::move(user);
    }
    const Json catalog_json = j.value("catalog", Json::object());
    for (const auto& [pid, pj] : catalog_json.items()) {
        Product product;
        product.product_id = pid;
        product.name = pj.value("name", pid);
        for (const auto& vj : pj.value("variants", Json::array())) {
            ProductVariant v;
            v.variant_id = vj.at("variant_id").get<std::string>();
            v.label = vj.value("label", v.variant_id);
            v.price = vj.at("price").get<std::int64_t>();
            product.variants.push_back(std::move(v));
        }
        state.catalog[pid] = std::move(product);
    }
    try {
        validate_state(state);
    } catch (const InvariantViolation& e) {
        throw ParseError(where, e.what());
    }
    return state;
}

std::optional<Json> resolve_path(const RetailState& state, const std::string& path) {
    std::vector<std::string> parts;
    std::istringstream in(path);
    std::string seg;
    while (std::getline(in, seg, '.')) parts.push_back(seg);
    if (parts.size() < 3 || parts[0] != "orders") return std::nullopt;
    const Order* order = find_order(state, parts[1]);
    if (!order) return std::nullopt;
    if (parts.size() == 3) {
        if (parts[2] == "status") return Json(order->status);
        if (parts[2] == "payment_method") return Json(order->payment_method);
        if (parts[2] == "refund_method") return Json(order->refund_method);
        return std::nullopt;
    }
    if (parts.size() == 5 && parts[2] == "items") {
        const OrderItem* item = find_item(*order, parts[3]);
        if (!item) return std::nullopt;
        if (parts[4] == "variant_id") return Json(item->variant_id);
        if (parts[4] == "price") return Json(item->price);
    }
    return std::nullopt;
}

ToolCall tool_call_of(const ActionProposal& action) {
    if (action.kind != ActionKind::tool_call)
        throw PreconditionError("action is not a tool call");
    return ToolCall{action.tool_name, action.tool_args};
}

const std::vector<std::string>& read_only_tools() {
    static const std::vector<std::string> tools{"get_order_details", "get_user_details",
                                                "get_product_variants"};
    return tools;
}

const std::vector<std::string>& mutating_tools() {
    static const std::vector<std::string> tools{"cancel_order", "modify_item"};
    return tools;
}

bool is_registered_tool(const std::string& name) {
    const auto& r = read_only_tools();
    const auto& m = mutating_tools();
    return std::find(r.begin(), r.end(), name) != r.end() ||
           std::find(m.begin(), m.end(), name) != m.end();
}

bool is_mutating_tool(const std::string& name) {
    const auto& m = mutating_tools();
    return std::find(m.begin(), m.end(), name) != m.end();
}

namespace {

ToolOutcome tool_error(const RetailState& state, const std::string& message) {
    Observation obs;
    obs.source = Source::tool;
    obs.content = "error: " + message;
    obs.tool_result = Json{{"ok", false}, {"error", message}};
    return ToolOutcome{state, std::move(obs)};
}

ToolOutcome tool_ok(RetailState state, const std::string& summary, Json data) {
    Observation obs;
    obs.source = Source::tool;
    obs.content = summary;
    obs.tool_result = Json{{"ok", true}, {"data", std::move(data)}};
    return ToolOutcome{std::move(state), std::move(obs)};
}

std::optional<std::string> missing_args(const ToolCall& call,
                                        const std::vector<std::string>& required) {
    for (const auto& key : required)
        if (!call.args.count(key) || call.args.at(key).empty())
            return "missing argument '" + key + "'";
    return std::nullopt;
}

}  // namespace

ToolOutcome execute_tool(const RetailState& state, const ToolCall& call) {
    if (!is_registered_tool(call.tool_name))
        return tool_error(state, "unknown tool '" + call.tool_name + "'");

    if (call.tool_name == "get_order_details") {
        if (auto err = missing_args(call, {"order_id"})) return tool_error(state, *err);
        const Order* order = find_order(state, call.args.at("order_id"));
        if (!order) return tool_error(state, "unknown order " + call.args.at("order_id"));
        Json items = Json::array();
        for (const auto& item : order->items)
            items.push_back(Json{{"item_id", item.item_id},
                                 {"variant_id", item.variant_id},
                                 {"price", item.price}});
        return tool_ok(state, "order " + order->order_id,
                       Json{{"order_id", order->order_id},
                            {"items", items},
                            {"status", order->status},
                            {"payment_method", order->payment_method}});
    }

    if (call.tool_name == "get_user_details") {
        if (auto err = missing_args(call, {"user_id"})) return tool_error(state, *err);
        auto it = state.users.find(call.args.at("user_id"));
        if (it == state.users.end())
            return tool_error(state, "unknown user " + call.args.at("user_id"));
        return tool_ok(state, "user " + it->first,
                       Json{{"user_id", it->first},
                            {"payment_methods", it->second.payment_methods},
                            {"membership", it->second.membership}});
    }

    if (call.tool_name == "get_product_variants") {
        if (auto err = missing_args(call, {"product_id"})) return tool_error(state, *err);
        auto it = state.catalog.find(call.args.at("product_id"));
        if (it == state.catalog.end())
            return tool_error(state, "unknown product " + call.args.at("product_id"));
        Json variants = Json::array();
        for (const auto& v : it->second.variants)
            variants.push_back(
                Json{{"variant_id", v.variant_id}, {"label", v.label}, {"price", v.price}});
        return tool_ok(state, "product " + it->first,
                       Json{{"product_id", it->first}, {"variants", variants}});
    }

    if (call.tool_name == "cancel_order") {
        if (auto err = missing_args(call, {"order_id", "refund_method"}))
            return tool_error(state, *err);
        const std::string& oid = call.args.at("order_id");
        const Order* order = find_order(state, oid);
        if (!order) return tool_error(state, "unknown order " + oid);
        if (order->status == "shipped") return tool_error(state, "cannot cancel shipped order");
        if (order->status == "cancelled") return tool_error(state, "order already cancelled");
        RetailState next = state;
        Order& target = next.orders[oid];
        target.status = "cancelled";
        target.refund_method = call.args.at("refund_method");
        const std::string refund_method = target.refund_method;
        return tool_ok(std::move(next), "cancelled " + oid,
                       Json{{"order_id", oid},
                            {"status", "cancelled"},
                            {"refund_method", refund_method}});
    }

    if (call.tool_name == "modify_item") {
        if (auto err = missing_args(call, {"order_id", "item_id", "new_variant_id"}))
            return tool_error(state, *err);
        const std::string& oid = call.args.at("order_id");
        const Order* order = find_order(state, oid);
        if (!order) return tool_error(state, "unknown order " + oid);
        if (order->status == "shipped") return tool_error(state, "cannot modify shipped order");
        if (order->status == "cancelled")
            return tool_error(state, "cannot modify cancelled order");
        const OrderItem* item = find_item(*order, call.args.at("item_id"));
        if (!item)
            return tool_error(state, "unknown item " + call.args.at("item_id") + " in " + oid);
        const ProductVariant* variant = nullptr;
        if (!product_of_variant(state, call.args.at("new_variant_id"), &variant))
            return tool_error(state, "unknown variant " + call.args.at("new_variant_id"));
        RetailState next = state;
        Order& target = next.orders[oid];
        for (auto& it2 : target.items)
            if (it2.item_id == item->item_id) {
                it2.variant_id = variant->variant_id;
                it2.price = variant->price;
            }
        target.status = "modified";
        return tool_ok(std::move(next), "modified " + oid,
                       Json{{"order_id", oid},
                            {"item_id", call.args.at("item_id")},
                            {"variant_id", variant->variant_id},
                            {"price", variant->price},
                            {"status", "modified"}});
    }

    return tool_error(state, "unknown tool '" + call.tool_name + "'");
}

// ── Policy engine ────────────────────────────────────────────────────

namespace {

// Resolves a reference against (state, call); nullopt when it cannot resolve.
std::optional<Json> resolve_ref(const RetailState& state, const ToolCall& call,
                                const std::string& ref) {
    if (ref.rfind("arg.", 0) == 0) {
        auto it = call.args.find(ref.substr(4));
        if (it == call.args.end()) return std::nullopt;
        return Json(it->second);
    }
    if (ref.rfind("order.", 0) == 0) {
        auto it = call.args.find("order_id");
        if (it == call.args.end()) return std::nullopt;
        const Order* order = find_order(state, it->second);
        if (!order) return std::nullopt;
        const std::string field = ref.substr(6);
        if (field == "status") return Json(order->status);
        if (field == "payment_method") return Json(order->payment_method);
        if (field == "refund_method") return Json(order->refund_method);
        return std::nullopt;
    }
    if (ref == "item_product") {
        auto oit = call.args.find("order_id");
        auto iit = call.args.find("item_id");
        if (oit == call.args.end() || iit == call.args.end()) return std::nullopt;
        const Order* order = find_order(state, oit->second);
        if (!order) return std::nullopt;
        const OrderItem* item = find_item(*order, iit->second);
        if (!item) return std::nullopt;
        const Product* product = product_of_variant(state, item->variant_id);
        if (!product) return std::nullopt;
        return Json(product->product_id);
    }
    if (ref == "variant_product") {
        auto it = call.args.find("new_variant_id");
        if (it == call.args.end()) return std::nullopt;
        const Product* product = product_of_variant(state, it->second);
        if (!product) return std::nullopt;
        return Json(product->product_id);
    }
    if (ref.rfind("join(", 0) == 0 && ref.back() == ')') {
        std::string keys = ref.substr(5, ref.size() - 6);
        std::istringstream in(keys);
        std::string key;
        std::string joined;
        while (std::getline(in, key, ',')) {
            auto it = call.args.find(key);
            if (it == call.args.end()) return std::nullopt;
            if (!joined.empty()) joined += "/";
            joined += it->second;
        }
        return Json(joined);
    }
    return std::nullopt;
}

// true when the condition holds (or cannot be resolved).
bool condition_holds(const RetailState& state, const ToolCall& call,
                     const PolicyCondition& cond) {
    auto lhs = resolve_ref(state, call, cond.lhs);
    if (!lhs) return true;
    Json rhs;
    if (cond.rhs_ref) {
        auto resolved = resolve_ref(state, call, *cond.rhs_ref);
        if (!resolved) return true;
        rhs = *resolved;
    } else if (cond.rhs_value) {
        rhs = *cond.rhs_value;
    } else {
        throw InvariantViolation("policy condition without rhs");
    }
    if (cond.op == "eq") return *lhs == rhs;
    if (cond.op == "ne") return *lhs != rhs;
    if (cond.op == "in") {
        if (!rhs.is_array()) throw InvariantViolation("'in' condition needs an array rhs");
        for (const auto& v : rhs)
            if (v == *lhs) return true;
        return false;
    }
    throw InvariantViolation("unknown policy op '" + cond.op + "'");
}

}  // namespace

Json to_json(const PolicyRule& rule) {
    Json conditions = Json::array();
    for (const auto& c : rule.require) {
        Json cj{{"lhs", c.lhs}, {"op", c.op}};
        if (c.rhs_ref)
            cj["rhs_ref"] = *c.rhs_ref;
        else
            cj["rhs"] = c.rhs_value.value_or(Json(nullptr));
        conditions.push_back(std::move(cj));
    }
    return Json{{"rule_id", rule.rule_id},
                {"tool", rule.tool},
                {"require", conditions},
                {"message", rule.message}};
}

PolicyRule policy_rule_from_json(const Json& j, const std::string& where) {
    PolicyRule rule;
    rule.rule_id = j.at("rule_id").get<std::string>();
    rule.tool = j.at("tool").get<std::string>();
    rule.message = j.at("message").get<std::string>();
    if (rule.rule_id.empty() || rule.tool.empty() || rule.message.empty())
        throw ParseError(where, "policy rule with empty rule_id, tool or message");
    for (const auto& cj : j.value("require", Json::array())) {
        PolicyCondition c;
        c.lhs = cj.at("lhs").get<std::string>();
        c.op = cj.at("op").get<std::string>();
        if (cj.contains("rhs_ref"))
            c.rhs_ref = cj["rhs_ref"].get<std::string>();
        else if (cj.contains("rhs"))
            c.rhs_value = Json(cj["rhs"]);
        else
            throw ParseError(where, "policy condition without rhs or rhs_ref");
        rule.require.push_back(std::move(c));
    }
    return rule;
}

std::vector<PolicyRule> check_policies(const RetailState& state,
                                       const std::vector<PolicyRule>& rules,
                                       const ToolCall& call) {
    std::vector<PolicyRule> violated;
    for (const auto& rule : rules) {
        if (rule.tool != call.tool_name) continue;
        for (const auto& cond : rule.require) {
            if (!condition_holds(state, call, cond)) {
                violated.push_back(rule);
                break;
            }
        }
    }
    return violated;
}

std::string render_policies(const std::vector<PolicyRule>& rules) {
    std::string out;
    for (const auto& rule : rules) {
        if (!out.empty()) out += "\n";
        out += "- [" + rule.rule_id + "] (" + rule.tool + ") " + rule.message;
    }
    return out;
}

RewardValue reward(const RetailState& final_state, const GroundTruth& gt) {
    RewardValue r;
    for (const auto& [path, expected] : gt) {
        auto actual = resolve_path(final_state, path);
        if (!actual.has_value()) {
            r.breakdown.push_back(RewardComponent{
                path, Rational(0), "path not found; expected " + expected.dump()});
        } else if (*actual != expected) {
            r.breakdown.push_back(RewardComponent{
                path, Rational(0), "expected " + expected.dump() + ", got " + actual->dump()});
        }
    }
    if (r.breakdown.empty()) {
        r.value = Rational(1);
        r.breakdown.push_back(RewardComponent{"state_match", Rational(1), ""});
    } else {
        r.value = Rational(0);
    }
    return r;
}

// ── Environment ──────────────────────────────────────────────────────

RetailEnv::RetailEnv(RetailState state, std::vector<PolicyRule> policies, GroundTruth gt,
                     UserScript script)
    : state_(std::move(state)),
      policies_(std::move(policies)),
      gt_(std::move(gt)),
      script_(std::move(script)) {
    validate_state(state_);
    if (script_.utterances.empty())
        throw InvariantViolation("user script " + script_.id + " has no utterances");
}

std::unique_ptr<RetailEnv> RetailEnv::from_fixture(const Json& environment,
                                                   const Json& success_criterion,
                                                   const std::string& where) {
    RetailState state = state_from_json(environment.at("initial_state"), where + ".initial_state");
    std::vector<PolicyRule> policies;
    for (const auto& rj : environment.value("policies", Json::array()))
        policies.push_back(policy_rule_from_json(rj, where + ".policies"));
    GroundTruth gt;
    if (!success_criterion.is_object() || !success_criterion.contains("state_match"))
        throw ParseError(where + ".success_criterion", "expected {\"state_match\": {...}}");
    for (const auto& [path, expected] : success_criterion.at("state_match").items())
        gt[path] = Json(expected);
    UserScript script;
    const Json& uj = environment.at("user_script");
    script.id = uj.at("id").get<std::string>();
    for (const auto& u : uj.at("utterances")) script.utterances.push_back(u.get<std::string>());
    script.farewell = uj.value("farewell", script.farewell);
    return std::make_unique<RetailEnv>(std::move(state), std::move(policies), std::move(gt),
                                       std::move(script));
}

Observation RetailEnv::initial_observation() {
    Observation obs;
    obs.source = Source::user;
    obs.content = script_.utterances.front();
    next_utterance_ = 1;
    return obs;
}

bool RetailEnv::has_tool(const std::string& tool_name) const {
    return is_registered_tool(tool_name);
}

bool RetailEnv::is_state_mutating(const std::string& tool_name) const {
    return is_mutating_tool(tool_name);
}

Environment::ExecutionResult RetailEnv::execute(const ActionProposal& action) {
    ExecutionResult result;
    switch (action.kind) {
        case ActionKind::tool_call: {
            ToolOutcome outcome = execute_tool(state_, tool_call_of(action));
            state_ = std::move(outcome.state);
            result.observation = std::move(outcome.observation);
            return result;
        }
        case ActionKind::message: {
            Observation obs;
            obs.source = Source::user;
            if (next_utterance_ < script_.utterances.size()) {
                obs.content = script_.utterances[next_utterance_++];
            } else {
                obs.content = script_.farewell;
                result.terminated = true;
            }
            result.observation = std::move(obs);
            return result;
        }
        case ActionKind::recommendation: {
            Observation obs;
            obs.source = Source::system;
            obs.content = "error: recommendations are not supported in this environment";
            result.observation = std::move(obs);
            return result;
        }
    }
    throw InvariantViolation("unknown ActionKind");
}

RewardValue RetailEnv::evaluate() const { return reward(state_, gt_); }

std::string RetailEnv::critic_context(const ActionProposal&) const {
    return render_policies(policies_);
}

std::string RetailEnv::actor_instructions() const {
    std::string out =
        "You are a customer service agent for an online retailer. Use the tools below to "
        "resolve the customer's request, and comply with every store policy.\n\n"
        "Tools (invoke with a fenced block, one 'key: value' argument per line):\n"
        "```tool <tool_name>\nkey: value\n```\n\n"
        "- get_order_details(order_id) [read-only]\n"
        "- get_user_details(user_id) [read-only]\n"
        "- get_product_variants(product_id) [read-only]\n"
        "- cancel_order(order_id, refund_method)\n"
        "- modify_item(order_id, item_id, new_variant_id)\n\n"
        "Store policies:\n" +
        render_policies(policies_) +
        "\n\nAnything outside a fenced block is sent to the customer as a message.";
    return out;
}

std::vector<Finding> RetailEnv::diagnose(const ActionProposal& action) const {
    std::vector<Finding> findings;
    if (action.kind != ActionKind::tool_call) return findings;
    for (const auto& rule : check_policies(state_, policies_, tool_call_of(action)))
        findings.push_back(Finding{"policy_violation", "[" + rule.rule_id + "] " + rule.message});
    return findings;
}

std::unique_ptr<Environment> RetailEnv::clone() const {
    auto copy = std::make_unique<RetailEnv>(state_, policies_, gt_, script_);
    copy->next_utterance_ = next_utterance_;
    return copy;
}

}  // namespace retail
}  // namespace criticgate
