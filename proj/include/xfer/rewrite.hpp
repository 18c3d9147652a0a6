// Rule-based pre- and post-transfer phases: code-referent coercion before
// transfer, canonicalization plus French PP-modifier ordering after.
//
// File formats (`%` comments everywhere):
//   phase file (.rw):   pre <id>: <pattern> => <pattern>.
//                       post <id>: <pattern> => <pattern>.
//   class table:        ppclass <label> locative|temporal|other
//   code-shape table:   codeshape <L|D>(,<L|D>)* <referent>

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xfer/qlf.hpp"

namespace xfer {

enum class Phase { Pre, Post };

struct RewriteRule {
  std::string id;
  Phase phase = Phase::Pre;
  QlfNode lhs;
  QlfNode rhs;
};

struct RewriteRules {
  std::vector<RewriteRule> pre;
  std::vector<RewriteRule> post;
};

RewriteRules load_rewrites(std::string_view text);
RewriteRules load_rewrites_file(const std::string& path);

enum class PpClass { Locative = 0, Other = 1, Temporal = 2 };

class PpClassTable {
 public:
  void set(const std::string& label, PpClass cls);
  // Unlisted labels are Other.
  PpClass classify(const std::string& label) const;
  static PpClassTable load(std::string_view text);
  static PpClassTable load_file(const std::string& path);

 private:
  std::map<std::string, PpClass> classes_;
};

enum class CodeToken { Letter, Digit };

struct CodePattern {
  std::vector<CodeToken> shape;
  std::string referent;
};

class CodeTable {
 public:
  void add(CodePattern pattern) { patterns_.push_back(std::move(pattern)); }
  const std::vector<CodePattern>& patterns() const { return patterns_; }
  static CodeTable load(std::string_view text);
  static CodeTable load_file(const std::string& path);

 private:
  std::vector<CodePattern> patterns_;
};

// Referent atom for a token sequence; first matching shape wins,
// `unknown_code` when nothing matches. Tokens are single-letter atoms and
// spelled-out digits (zero..nine).
std::string classify_code(const std::vector<std::string>& tokens,
                          const CodeTable& table);

// Single top-down pass: at each position the first matching rule fires
// once, then descent continues into the rewritten node's children.
QlfNode apply_rewrites(const std::vector<RewriteRule>& rules, const QlfNode& q,
                       int max_depth = 256);

// Annotates one-argument code_np nodes with their referent, then applies
// the pre-phase rules.
QlfNode pre_transfer(const QlfNode& q, const RewriteRules& rules,
                     const CodeTable& codes);

// Stable three-way sort by class rank locative < other < temporal.
std::vector<QlfNode> order_pp_modifiers(std::vector<QlfNode> mods,
                                        const PpClassTable& table);

// Post-phase rules, then PP reordering at every list carrying modifiers.
QlfNode post_transfer(const QlfNode& q, const RewriteRules& rules,
                      const PpClassTable& table);

// Modifier label: form(prep(p), _) -> p, form(atom, _) -> atom.
// Returns an empty string when no label is extractable.
std::string form_label(const QlfNode& form);

}  // namespace xfer
