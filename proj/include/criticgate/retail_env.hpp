#pragma once

#include "criticgate/environment.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace criticgate {
namespace retail {

// ── State ────────────────────────────────────────────────────────────

struct OrderItem {
    std::string item_id;
    std::string variant_id;
    std::int64_t price = 0;

    friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

// status: pending | shipped | cancelled | modified. refund_method is set by a
// completed cancellation ("" = no refund yet); without it a refund routed to
// the wrong payment method would be invisible to the ground-truth match.
struct Order {
    std::string order_id;
    std::vector<OrderItem> items;
    std::string status = "pending";
    std::string payment_method;
    std::string refund_method;

    friend bool operator==(const Order&, const Order&) = default;
};

struct User {
    std::string user_id;
    std::vector<std::string> payment_methods;
    std::string membership;  // regular | premium

    friend bool operator==(const User&, const User&) = default;
};

struct ProductVariant {
    std::string variant_id;
    std::string label;
    std::int64_t price = 0;

    friend bool operator==(const ProductVariant&, const ProductVariant&) = default;
};

struct Product {
    std::string product_id;
    std::string name;
    std::vector<ProductVariant> variants;

    friend bool operator==(const Product&, const Product&) = default;
};

struct RetailState {
    std::map<std::string, Order> orders;
    std::map<std::string, User> users;
    std::map<std::string, Product> catalog;

    friend bool operator==(const RetailState&, const RetailState&) = default;
};

// Throws InvariantViolation when ids dangle, prices are non-positive or a
// status is outside the allowed set.
void validate_state(const RetailState& state);

Json state_to_json(const RetailState& state);
RetailState state_from_json(const Json& j, const std::string& where);

// Resolves a canonical dotted path such as "orders.W1001.status" or
// "orders.W1001.items.i1.variant_id". nullopt when the path does not exist.
std::optional<Json> resolve_path(const RetailState& state, const std::string& path);

// ── Tool calls ───────────────────────────────────────────────────────

struct ToolCall {
    std::string tool_name;
    std::map<std::string, std::string> args;
};

ToolCall tool_call_of(const ActionProposal& action);

// Registered tools: get_order_details, get_user_details, get_product_variants
// (read-only); cancel_order, modify_item (state-mutating).
const std::vector<std::string>& read_only_tools();
const std::vector<std::string>& mutating_tools();
bool is_registered_tool(const std::string& name);
bool is_mutating_tool(const std::string& name);

struct ToolOutcome {
    RetailState state;   // unchanged on error and for read-only tools
    Observation observation;  // source=tool, tool_result = {"ok": ..., ...}
};

// Applies a tool call. Unknown tools, invalid args and domain errors (e.g.
// cancelling a shipped order) are in-band tool-result errors, not exceptions.
ToolOutcome execute_tool(const RetailState& state, const ToolCall& call);

// ── Policies ─────────────────────────────────────────────────────────

// Declarative condition over (state, tool_call). References:
//   arg.<key>                    tool argument value
//   order.<field>                field of orders[arg.order_id]
//   item_product                 product owning item (arg.order_id, arg.item_id)
//   variant_product              product owning variant arg.new_variant_id
//   join(<k1>,<k2>,...)          arg values joined with '/'
// rhs is either a literal JSON value or another reference. An unresolvable
// reference leaves the condition satisfied; dangling ids are the domain
// layer's error, not the policy layer's.
struct PolicyCondition {
    std::string lhs;
    std::string op;  // eq | ne | in
    std::optional<Json> rhs_value;
    std::optional<std::string> rhs_ref;
};

struct PolicyRule {
    std::string rule_id;
    std::string tool;  // rule applies to calls of this tool
    std::vector<PolicyCondition> require;  // all must hold; any failure violates
    std::string message;
};

Json to_json(const PolicyRule& rule);
PolicyRule policy_rule_from_json(const Json& j, const std::string& where);

// All violated rules (not just the first), in registration order.
std::vector<PolicyRule> check_policies(const RetailState& state,
                                       const std::vector<PolicyRule>& rules,
                                       const ToolCall& call);

std::string render_policies(const std::vector<PolicyRule>& rules);

// ── Reward ───────────────────────────────────────────────────────────

// Canonical-path ground truth: only the fields the task constrains.
using GroundTruth = std::map<std::string, Json>;

// 1 iff every constrained path equals the expected value, else 0 with one
// breakdown component per mismatched path.
RewardValue reward(const RetailState& final_state, const GroundTruth& gt);

// ── Environment ──────────────────────────────────────────────────────

struct UserScript {
    std::string id;
    std::vector<std::string> utterances;  // [0] is the opening instruction
    std::string farewell = "Thanks, that's everything.";
};

class RetailEnv final : public Environment {
public:
    RetailEnv(RetailState state, std::vector<PolicyRule> policies, GroundTruth gt,
              UserScript script);

    // Builds and validates from a task document's environment block plus the
    // success criterion {"state_match": {path: expected, ...}}.
    static std::unique_ptr<RetailEnv> from_fixture(const Json& environment,
                                                   const Json& success_criterion,
                                                   const std::string& where);

    std::string kind() const override { return "retail"; }
    Observation initial_observation() override;
    bool has_tool(const std::string& tool_name) const override;
    bool is_state_mutating(const std::string& tool_name) const override;
    ExecutionResult execute(const ActionProposal& action) override;
    RewardValue evaluate() const override;
    std::string critic_context(const ActionProposal& proposal) const override;
    std::string actor_instructions() const override;
    std::vector<Finding> diagnose(const ActionProposal& action) const override;
    std::unique_ptr<Environment> clone() const override;

    const RetailState& state() const { return state_; }
    const std::vector<PolicyRule>& policies() const { return policies_; }
    const GroundTruth& ground_truth() const { return gt_; }

private:
    RetailState state_;
    std::vector<PolicyRule> policies_;
    GroundTruth gt_;
    UserScript script_;
    std::size_t next_utterance_ = 0;
};

}  // namespace retail
}  // namespace criticgate
