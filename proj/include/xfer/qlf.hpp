// The QLF term language: immutable trees, concrete syntax, validation,
// and packed-form utilities (choice collection, assignment application,
// exhaustive unpacking).
//
// Concrete syntax (whitespace-insensitive, `%` comments to end of line):
//   expr   := atom | objvar | apply | abs | list | choice
//   atom   := [a-z][a-z0-9_]*          objvar := [A-Z][A-Za-z0-9_]*
//   apply  := atom '(' expr (',' expr)* ')'
//   abs    := objvar '^' expr
//   list   := '[' expr (',' expr)* ']'
//   choice := '#(' integer ',[' expr (',' expr)* '])'
// Pattern syntax (rule files only) adds meta-variables `@name` and, on
// target sides, the recursive-transfer marker `tr(@name)`.

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xfer/error.hpp"

namespace xfer {

enum class NodeKind {
  Atom,
  ObjVar,
  Apply,
  Abs,
  List,
  Choice,
  // Pattern-only kinds; never valid inside a plain QLF.
  MetaVar,
  TransferCall,
};

class QlfNode {
 public:
  static QlfNode atom(std::string name);
  static QlfNode objvar(std::string name);
  static QlfNode apply(std::string functor, std::vector<QlfNode> args);
  static QlfNode abs(std::string var, QlfNode body);
  static QlfNode list(std::vector<QlfNode> items);
  static QlfNode choice(int id, std::vector<QlfNode> alternatives);
  static QlfNode meta(std::string name);
  static QlfNode transfer_call(std::string meta_name);

  NodeKind kind() const { return kind_; }
  // Atom/ObjVar/MetaVar name, Apply functor, Abs bound variable,
  // TransferCall meta-variable.
  const std::string& name() const { return name_; }
  int choice_id() const { return choice_id_; }
  const std::vector<QlfNode>& kids() const { return kids_; }
  const QlfNode& body() const { return kids_.front(); }  // Abs only

  bool is(NodeKind k) const { return kind_ == k; }
  bool is_atom(std::string_view name) const {
    return kind_ == NodeKind::Atom && name_ == name;
  }
  // Apply with the given functor and arity.
  bool is_apply(std::string_view functor, std::size_t arity) const {
    return kind_ == NodeKind::Apply && name_ == functor &&
           kids_.size() == arity;
  }

  bool operator==(const QlfNode& other) const;
  std::strong_ordering operator<=>(const QlfNode& other) const;

 private:
  QlfNode(NodeKind kind, std::string name, int choice_id,
          std::vector<QlfNode> kids)
      : kind_(kind),
        name_(std::move(name)),
        choice_id_(choice_id),
        kids_(std::move(kids)) {}

  NodeKind kind_;
  std::string name_;
  int choice_id_ = -1;
  std::vector<QlfNode> kids_;
};

// ---------------------------------------------------------------------------
// Parsing and printing

QlfNode parse_qlf(std::string_view text);
// Pattern variant: accepts `@name` everywhere and `tr(@name)` when
// `target_side` is set.
QlfNode parse_pattern(std::string_view text, bool target_side);

// Canonical single-line rendering; parse_qlf(print_qlf(t)) == t.
std::string print_qlf(const QlfNode& node);
// Indented rendering for interactive display.
std::string pretty_qlf(const QlfNode& node, int width = 60);

// One QLF per non-comment line.
std::vector<QlfNode> load_qlf_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// ---------------------------------------------------------------------------
// Packed-form utilities

// An assignment picks one alternative index per choice id.
using Assignment = std::map<int, int>;

// (choice id, alternative count) in pre-order; throws DuplicateChoiceId.
std::vector<std::pair<int, int>> collect_choices(const QlfNode& node);

// Substitutes the selected alternatives; result is choice-free.
// Throws MissingChoice / IndexOutOfRange.
QlfNode apply_assignment(const QlfNode& node, const Assignment& a);

// Number of distinct reachable assignments (saturating).
std::uint64_t count_unpackings(const QlfNode& node);

// All (assignment, unpacked tree) pairs in lexicographic assignment order;
// throws LimitExceeded(count) if more than `limit` exist.
std::vector<std::pair<Assignment, QlfNode>> enumerate_unpackings(
    const QlfNode& node, std::uint64_t limit);

// ---------------------------------------------------------------------------
// Validation and variable utilities

// Empty iff the tree has unique choice ids, every choice carries >= 2
// alternatives, no object variable is bound twice on one path, and no
// pattern-only node occurs.
std::vector<Diagnostic> validate_qlf(const QlfNode& node);

// Object variables with no enclosing Abs binder.
std::set<std::string> free_vars(const QlfNode& node);

// Structural equality up to a consistent injective renaming of all object
// variables.
bool alpha_equal(const QlfNode& a, const QlfNode& b);
// Renames every object variable to v1, v2, ... in first-occurrence order.
QlfNode alpha_canonical(const QlfNode& node);

}  // namespace xfer
