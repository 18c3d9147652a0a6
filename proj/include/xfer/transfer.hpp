// Unification-based transfer: source patterns are matched against a plain
// source QLF top-down; each match splices an instantiated target pattern,
// with tr(@x) positions transferred recursively. When several rules match
// one node their targets become the alternatives of a fresh choice node,
// and rule-usage events record under which choice conditions each rule
// participates.
//
// Rule file (`.rules`): one rule per declaration,
//   rule <id>: <source-pattern> => <target-pattern>.
// Meta-variables are written `@name`; `tr(@name)` marks recursive transfer
// in targets; `%` starts a comment.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xfer/qlf.hpp"

namespace xfer {

struct TransferRule {
  std::string id;
  QlfNode source;
  QlfNode target;
};

class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<TransferRule> rules);

  const std::vector<TransferRule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }
  std::size_t size() const { return rules_.size(); }

  // Object-variable names introduced by any rule target; fresh target
  // variables must avoid these.
  const std::set<std::string>& reserved_var_names() const {
    return reserved_vars_;
  }

 private:
  std::vector<TransferRule> rules_;
  std::set<std::string> reserved_vars_;
};

RuleSet load_rules(std::string_view text);
RuleSet load_rules_file(const std::string& path);

// Meta-variable values plus the pattern-variable renaming discovered while
// matching. The renaming is injective.
struct Bindings {
  std::map<std::string, QlfNode> meta;
  std::map<std::string, std::string> vars;
};

// One-directional match of a source pattern against a choice-free node.
std::optional<Bindings> match_pattern(const QlfNode& pattern,
                                      const QlfNode& node);

// Records that a rule fired; `conditions` names the choice alternatives the
// firing is contingent on (empty = unconditional).
struct RuleEvent {
  std::string rule_id;
  std::map<int, int> conditions;

  bool operator==(const RuleEvent&) const = default;
};

struct TransferResult {
  QlfNode packed;
  std::vector<RuleEvent> events;
};

struct TransferOptions {
  int max_depth = 256;
};

// Deterministic: identical rules and source produce identical results,
// including choice-id numbering (ids count up from 1).
TransferResult transfer(const RuleSet& rules, const QlfNode& source,
                        const TransferOptions& opts = {});

// Rule ids of all events whose conditions are satisfied by the assignment,
// with multiplicity, sorted. Throws MissingChoice if `a` is not full for
// the packed tree.
std::vector<std::string> rule_bag_for_assignment(const TransferResult& r,
                                                 const Assignment& a);

// Shared helper: true iff every (choice, index) condition is consistent
// with the assignment (missing choices are treated as unreachable).
bool conditions_satisfied(const std::map<int, int>& conditions,
                          const Assignment& a);

// Validates that `a` covers every choice reachable under its own
// selections; throws MissingChoice / IndexOutOfRange.
void check_full_assignment(const QlfNode& packed, const Assignment& a);

}  // namespace xfer
