// Rule loading, pattern matching, and the packing transfer procedure.

#include "xfer/transfer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace xfer {

// ---------------------------------------------------------------------------
// Rule files

namespace {

void collect_meta_names(const QlfNode& p, std::set<std::string>& out) {
  if (p.kind() == NodeKind::MetaVar || p.kind() == NodeKind::TransferCall)
    out.insert(p.name());
  for (const QlfNode& k : p.kids()) collect_meta_names(k, out);
}

void collect_objvar_names(const QlfNode& p, std::set<std::string>& out) {
  if (p.kind() == NodeKind::ObjVar || p.kind() == NodeKind::Abs)
    out.insert(p.name());
  for (const QlfNode& k : p.kids()) collect_objvar_names(k, out);
}

bool contains_kind(const QlfNode& p, NodeKind kind) {
  if (p.kind() == kind) return true;
  for (const QlfNode& k : p.kids())
    if (contains_kind(k, kind)) return true;
  return false;
}

// In source position `tr(@x)` parses as a plain apply; it is still a
// transfer marker as far as the rule author is concerned.
bool contains_transfer_marker(const QlfNode& p) {
  if (p.kind() == NodeKind::TransferCall) return true;
  if (p.is_apply("tr", 1) && p.kids()[0].kind() == NodeKind::MetaVar)
    return true;
  for (const QlfNode& k : p.kids())
    if (contains_transfer_marker(k)) return true;
  return false;
}

// Splits `text` into `.`-terminated declarations, skipping comments.
// Each declaration is handed to `handle(line_no, decl)`.
template <typename F>
void for_each_declaration(std::string_view text, F handle) {
  std::string decl;
  int line = 1;
  int decl_line = 1;
  bool in_comment = false;
  for (char c : text) {
    if (c == '\n') {
      ++line;
      in_comment = false;
      decl.push_back(' ');
      continue;
    }
    if (in_comment) continue;
    if (c == '%') {
      in_comment = true;
      continue;
    }
    if (c == '.') {
      if (decl.find_first_not_of(" \t\r") != std::string::npos)
        handle(decl_line, decl);
      decl.clear();
      decl_line = line;
      continue;
    }
    if (decl.find_first_not_of(" \t\r") == std::string::npos &&
        !std::isspace(static_cast<unsigned char>(c)))
      decl_line = line;
    decl.push_back(c);
  }
  if (decl.find_first_not_of(" \t\r") != std::string::npos)
    throw Error(ErrorCode::Syntax,
                "syntax error at line " + std::to_string(decl_line) +
                    ": declaration not terminated by '.'");
}

}  // namespace

RuleSet::RuleSet(std::vector<TransferRule> rules) : rules_(std::move(rules)) {
  std::set<std::string> ids;
  for (const TransferRule& r : rules_) {
    if (!ids.insert(r.id).second)
      throw Error(ErrorCode::DuplicateRuleId, "duplicate rule id: " + r.id);
    if (contains_transfer_marker(r.source))
      throw Error(ErrorCode::Syntax,
                  "rule " + r.id + ": tr(...) not allowed in source pattern");
    if (contains_kind(r.source, NodeKind::Choice) ||
        contains_kind(r.target, NodeKind::Choice))
      throw Error(ErrorCode::Syntax,
                  "rule " + r.id + ": choice nodes not allowed in patterns");
    std::set<std::string> src_meta, tgt_meta;
    collect_meta_names(r.source, src_meta);
    collect_meta_names(r.target, tgt_meta);
    for (const std::string& m : tgt_meta)
      if (!src_meta.count(m))
        throw Error(ErrorCode::UnboundTargetMeta,
                    "rule " + r.id + ": target meta-variable @" + m +
                        " does not occur in the source pattern");
    collect_objvar_names(r.target, reserved_vars_);
  }
}

RuleSet load_rules(std::string_view text) {
  std::vector<TransferRule> rules;
  for_each_declaration(text, [&](int line, const std::string& decl) {
    std::istringstream in(decl);
    std::string kw, id;
    in >> kw >> id;
    if (kw != "rule" || id.empty() || id.back() != ':')
      throw Error(ErrorCode::Syntax,
                  "syntax error at line " + std::to_string(line) +
                      ": expected 'rule <id>: <src> => <tgt>.'");
    id.pop_back();
    std::string rest((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    auto arrow = rest.find("=>");
    if (arrow == std::string::npos)
      throw Error(ErrorCode::Syntax,
                  "syntax error at line " + std::to_string(line) +
                      ": rule " + id + " has no '=>'");
    QlfNode src = parse_pattern(rest.substr(0, arrow), false);
    QlfNode tgt = parse_pattern(rest.substr(arrow + 2), true);
    rules.push_back({std::move(id), std::move(src), std::move(tgt)});
  });
  return RuleSet(std::move(rules));
}

RuleSet load_rules_file(const std::string& path) {
  return load_rules(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Matching

namespace {

bool match_rec(const QlfNode& p, const QlfNode& n, Bindings& b) {
  switch (p.kind()) {
    case NodeKind::MetaVar: {
      auto [it, inserted] = b.meta.emplace(p.name(), n);
      return inserted || it->second == n;
    }
    case NodeKind::Atom:
      return n.kind() == NodeKind::Atom && p.name() == n.name();
    case NodeKind::ObjVar:
    case NodeKind::Abs: {
      if (n.kind() != p.kind()) return false;
      auto it = b.vars.find(p.name());
      if (it != b.vars.end()) {
        if (it->second != n.name()) return false;
      } else {
        // Injective: no two pattern variables may map to one node variable.
        for (const auto& [pv, nv] : b.vars)
          if (nv == n.name()) return false;
        b.vars.emplace(p.name(), n.name());
      }
      if (p.kind() == NodeKind::ObjVar) return true;
      return match_rec(p.body(), n.body(), b);
    }
    case NodeKind::Apply:
      if (n.kind() != NodeKind::Apply || p.name() != n.name() ||
          p.kids().size() != n.kids().size())
        return false;
      break;
    case NodeKind::List:
      if (n.kind() != NodeKind::List || p.kids().size() != n.kids().size())
        return false;
      break;
    default:
      return false;  // Choice / TransferCall never occur in source patterns
  }
  for (std::size_t i = 0; i < p.kids().size(); ++i)
    if (!match_rec(p.kids()[i], n.kids()[i], b)) return false;
  return true;
}

}  // namespace

std::optional<Bindings> match_pattern(const QlfNode& pattern,
                                      const QlfNode& node) {
  Bindings b;
  if (match_rec(pattern, node, b)) return b;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Transfer

namespace {

struct TransferState {
  const RuleSet& rules;
  const TransferOptions& opts;
  std::vector<RuleEvent> events;
  // Source variable -> fresh target variable, shared across the whole
  // transfer so alternatives of one choice agree on names.
  std::map<std::string, std::string> var_map;
  std::set<std::string> used_names;
  int next_choice_id = 1;
  int depth = 0;

  explicit TransferState(const RuleSet& r, const TransferOptions& o)
      : rules(r), opts(o), used_names(r.reserved_var_names()) {}

  const std::string& rename(const std::string& src) {
    auto it = var_map.find(src);
    if (it != var_map.end()) return it->second;
    for (int k = 1;; ++k) {
      std::string candidate = src + "_" + std::to_string(k);
      if (used_names.insert(candidate).second)
        return var_map.emplace(src, std::move(candidate)).first->second;
    }
  }

  struct DepthGuard {
    TransferState& st;
    explicit DepthGuard(TransferState& s) : st(s) {
      if (++st.depth > st.opts.max_depth)
        throw Error(ErrorCode::RecursionDepthExceeded,
                    "transfer exceeded depth " +
                        std::to_string(st.opts.max_depth));
    }
    ~DepthGuard() { --st.depth; }
  };

  QlfNode transfer_node(const QlfNode& n, const std::map<int, int>& ctx) {
    DepthGuard guard(*this);
    std::vector<std::pair<const TransferRule*, Bindings>> matches;
    for (const TransferRule& r : rules.rules())
      if (auto b = match_pattern(r.source, n))
        matches.emplace_back(&r, std::move(*b));

    if (matches.empty()) return congruent(n, ctx);
    if (matches.size() == 1) {
      auto& [rule, b] = matches.front();
      events.push_back({rule->id, ctx});
      return instantiate(rule->target, b, ctx);
    }
    int id = next_choice_id++;
    std::vector<QlfNode> alts;
    alts.reserve(matches.size());
    for (std::size_t k = 0; k < matches.size(); ++k) {
      auto& [rule, b] = matches[k];
      std::map<int, int> alt_ctx = ctx;
      alt_ctx[id] = static_cast<int>(k);
      events.push_back({rule->id, alt_ctx});
      alts.push_back(instantiate(rule->target, b, alt_ctx));
    }
    return QlfNode::choice(id, std::move(alts));
  }

  QlfNode congruent(const QlfNode& n, const std::map<int, int>& ctx) {
    switch (n.kind()) {
      case NodeKind::Atom:
        return n;
      case NodeKind::ObjVar:
        return QlfNode::objvar(rename(n.name()));
      case NodeKind::Abs:
        return QlfNode::abs(rename(n.name()), transfer_node(n.body(), ctx));
      case NodeKind::Apply:
      case NodeKind::List: {
        std::vector<QlfNode> kids;
        kids.reserve(n.kids().size());
        for (const QlfNode& k : n.kids())
          kids.push_back(transfer_node(k, ctx));
        return n.kind() == NodeKind::Apply
                   ? QlfNode::apply(n.name(), std::move(kids))
                   : QlfNode::list(std::move(kids));
      }
      default:
        throw Error(ErrorCode::Syntax,
                    "transfer source must be a choice-free plain QLF");
    }
  }

  // Splices a bound source fragment into the target, applying the
  // source->target variable renaming without transferring.
  QlfNode splice(const QlfNode& n) {
    switch (n.kind()) {
      case NodeKind::Atom:
        return n;
      case NodeKind::ObjVar:
        return QlfNode::objvar(rename(n.name()));
      case NodeKind::Abs:
        return QlfNode::abs(rename(n.name()), splice(n.body()));
      default: {
        std::vector<QlfNode> kids;
        kids.reserve(n.kids().size());
        for (const QlfNode& k : n.kids()) kids.push_back(splice(k));
        if (n.kind() == NodeKind::Apply)
          return QlfNode::apply(n.name(), std::move(kids));
        if (n.kind() == NodeKind::List) return QlfNode::list(std::move(kids));
        throw Error(ErrorCode::Syntax, "unexpected node in source fragment");
      }
    }
  }

  // Pattern variables matched against source variables follow the source
  // renaming; variables the rule introduces itself are copied literally.
  std::string target_var(const std::string& pattern_var, const Bindings& b) {
    auto it = b.vars.find(pattern_var);
    if (it != b.vars.end()) return rename(it->second);
    return pattern_var;
  }

  QlfNode instantiate(const QlfNode& t, const Bindings& b,
                      const std::map<int, int>& ctx) {
    switch (t.kind()) {
      case NodeKind::MetaVar:
        return splice(b.meta.at(t.name()));
      case NodeKind::TransferCall:
        return transfer_node(b.meta.at(t.name()), ctx);
      case NodeKind::Atom:
        return t;
      case NodeKind::ObjVar:
        return QlfNode::objvar(target_var(t.name(), b));
      case NodeKind::Abs:
        return QlfNode::abs(target_var(t.name(), b),
                            instantiate(t.body(), b, ctx));
      case NodeKind::Apply:
      case NodeKind::List: {
        std::vector<QlfNode> kids;
        kids.reserve(t.kids().size());
        for (const QlfNode& k : t.kids())
          kids.push_back(instantiate(k, b, ctx));
        return t.kind() == NodeKind::Apply
                   ? QlfNode::apply(t.name(), std::move(kids))
                   : QlfNode::list(std::move(kids));
      }
      default:
        throw Error(ErrorCode::Syntax, "choice node in target pattern");
    }
  }
};

}  // namespace

TransferResult transfer(const RuleSet& rules, const QlfNode& source,
                        const TransferOptions& opts) {
  if (!collect_choices(source).empty())
    throw Error(ErrorCode::Syntax, "transfer source must be choice-free");
  TransferState st(rules, opts);
  QlfNode packed = st.transfer_node(source, {});
  return {std::move(packed), std::move(st.events)};
}

// ---------------------------------------------------------------------------
// Rule bags

bool conditions_satisfied(const std::map<int, int>& conditions,
                          const Assignment& a) {
  for (const auto& [id, idx] : conditions) {
    auto it = a.find(id);
    if (it == a.end() || it->second != idx) return false;
  }
  return true;
}

namespace {

void check_full_rec(const QlfNode& n, const Assignment& a) {
  if (n.kind() == NodeKind::Choice) {
    auto it = a.find(n.choice_id());
    if (it == a.end())
      throw Error(ErrorCode::MissingChoice,
                  "assignment is missing choice " +
                      std::to_string(n.choice_id()));
    if (it->second < 0 || it->second >= static_cast<int>(n.kids().size()))
      throw Error(ErrorCode::IndexOutOfRange,
                  "alternative index out of range for choice " +
                      std::to_string(n.choice_id()));
    check_full_rec(n.kids()[it->second], a);
    return;
  }
  for (const QlfNode& k : n.kids()) check_full_rec(k, a);
}

}  // namespace

void check_full_assignment(const QlfNode& packed, const Assignment& a) {
  check_full_rec(packed, a);
}

std::vector<std::string> rule_bag_for_assignment(const TransferResult& r,
                                                 const Assignment& a) {
  check_full_assignment(r.packed, a);
  std::vector<std::string> bag;
  for (const RuleEvent& e : r.events)
    if (conditions_satisfied(e.conditions, a)) bag.push_back(e.rule_id);
  std::sort(bag.begin(), bag.end());
  return bag;
}

}  // namespace xfer
