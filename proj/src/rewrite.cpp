// Pre/post rewrite phases, code-referent coercion, PP-modifier ordering.

#include "xfer/rewrite.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "xfer/transfer.hpp"

namespace xfer {

// ---------------------------------------------------------------------------
// Loading

namespace {

void collect_meta(const QlfNode& p, std::set<std::string>& out) {
  if (p.kind() == NodeKind::MetaVar) out.insert(p.name());
  for (const QlfNode& k : p.kids()) collect_meta(k, out);
}

bool has_kind(const QlfNode& p, NodeKind kind) {
  if (p.kind() == kind) return true;
  for (const QlfNode& k : p.kids())
    if (has_kind(k, kind)) return true;
  return false;
}

// Splits on '.'-terminated declarations, skipping % comments.
template <typename F>
void split_declarations(std::string_view text, F handle) {
  std::string decl;
  int line = 1, decl_line = 1;
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

RewriteRules load_rewrites(std::string_view text) {
  RewriteRules out;
  std::set<std::string> ids;
  split_declarations(text, [&](int line, const std::string& decl) {
    std::istringstream in(decl);
    std::string kw, id;
    in >> kw >> id;
    if ((kw != "pre" && kw != "post") || id.empty() || id.back() != ':')
      throw Error(ErrorCode::Syntax,
                  "syntax error at line " + std::to_string(line) +
                      ": expected 'pre|post <id>: <lhs> => <rhs>.'");
    id.pop_back();
    if (!ids.insert(id).second)
      throw Error(ErrorCode::DuplicateRuleId, "duplicate rewrite id: " + id);
    std::string rest((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    auto arrow = rest.find("=>");
    if (arrow == std::string::npos)
      throw Error(ErrorCode::Syntax,
                  "syntax error at line " + std::to_string(line) +
                      ": rewrite " + id + " has no '=>'");
    RewriteRule r{id, kw == "pre" ? Phase::Pre : Phase::Post,
                  parse_pattern(rest.substr(0, arrow), false),
                  parse_pattern(rest.substr(arrow + 2), false)};
    if (has_kind(r.lhs, NodeKind::Choice) || has_kind(r.rhs, NodeKind::Choice))
      throw Error(ErrorCode::Syntax,
                  "rewrite " + id + ": choice nodes not allowed in patterns");
    std::set<std::string> lhs_meta, rhs_meta;
    collect_meta(r.lhs, lhs_meta);
    collect_meta(r.rhs, rhs_meta);
    for (const auto& m : rhs_meta)
      if (!lhs_meta.count(m))
        throw Error(ErrorCode::UnboundTargetMeta,
                    "rewrite " + id + ": rhs meta-variable @" + m +
                        " does not occur in the lhs");
    (r.phase == Phase::Pre ? out.pre : out.post).push_back(std::move(r));
  });
  return out;
}

RewriteRules load_rewrites_file(const std::string& path) {
  return load_rewrites(read_text_file(path));
}

void PpClassTable::set(const std::string& label, PpClass cls) {
  classes_[label] = cls;
}

PpClass PpClassTable::classify(const std::string& label) const {
  auto it = classes_.find(label);
  return it == classes_.end() ? PpClass::Other : it->second;
}

PpClassTable PpClassTable::load(std::string_view text) {
  PpClassTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto cut = line.find('%'); cut != std::string::npos) line.erase(cut);
    std::istringstream ls(line);
    std::string kw, label, cls;
    if (!(ls >> kw)) continue;
    if (kw != "ppclass" || !(ls >> label >> cls))
      throw Error(ErrorCode::Syntax,
                  "class table line " + std::to_string(lineno) +
                      ": expected 'ppclass <label> <class>'");
    if (cls == "locative")
      table.set(label, PpClass::Locative);
    else if (cls == "temporal")
      table.set(label, PpClass::Temporal);
    else if (cls == "other")
      table.set(label, PpClass::Other);
    else
      throw Error(ErrorCode::Syntax,
                  "class table line " + std::to_string(lineno) +
                      ": unknown class '" + cls + "'");
  }
  return table;
}

PpClassTable PpClassTable::load_file(const std::string& path) {
  return load(read_text_file(path));
}

CodeTable CodeTable::load(std::string_view text) {
  CodeTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto cut = line.find('%'); cut != std::string::npos) line.erase(cut);
    std::istringstream ls(line);
    std::string kw, shape, referent;
    if (!(ls >> kw)) continue;
    if (kw != "codeshape" || !(ls >> shape >> referent))
      throw Error(ErrorCode::Syntax,
                  "code table line " + std::to_string(lineno) +
                      ": expected 'codeshape <L|D>,... <referent>'");
    CodePattern p;
    p.referent = referent;
    std::istringstream ss(shape);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "L")
        p.shape.push_back(CodeToken::Letter);
      else if (item == "D")
        p.shape.push_back(CodeToken::Digit);
      else
        throw Error(ErrorCode::Syntax,
                    "code table line " + std::to_string(lineno) +
                        ": shape item must be L or D, got '" + item + "'");
    }
    table.add(std::move(p));
  }
  return table;
}

CodeTable CodeTable::load_file(const std::string& path) {
  return load(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Code classification

namespace {

const std::set<std::string>& spelled_digits() {
  static const std::set<std::string> digits = {
      "zero", "one", "two",   "three", "four",
      "five", "six", "seven", "eight", "nine"};
  return digits;
}

bool token_is(const std::string& tok, CodeToken cls) {
  if (cls == CodeToken::Letter)
    return tok.size() == 1 && std::islower(static_cast<unsigned char>(tok[0]));
  return spelled_digits().count(tok) > 0;
}

}  // namespace

std::string classify_code(const std::vector<std::string>& tokens,
                          const CodeTable& table) {
  for (const CodePattern& p : table.patterns()) {
    if (p.shape.size() != tokens.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < tokens.size() && ok; ++i)
      ok = token_is(tokens[i], p.shape[i]);
    if (ok) return p.referent;
  }
  return "unknown_code";
}

// ---------------------------------------------------------------------------
// Rewriting

namespace {

QlfNode instantiate_rhs(const QlfNode& rhs, const Bindings& b) {
  switch (rhs.kind()) {
    case NodeKind::MetaVar:
      return b.meta.at(rhs.name());
    case NodeKind::Atom:
      return rhs;
    case NodeKind::ObjVar: {
      auto it = b.vars.find(rhs.name());
      return QlfNode::objvar(it != b.vars.end() ? it->second : rhs.name());
    }
    case NodeKind::Abs: {
      auto it = b.vars.find(rhs.name());
      std::string var = it != b.vars.end() ? it->second : rhs.name();
      return QlfNode::abs(std::move(var), instantiate_rhs(rhs.body(), b));
    }
    case NodeKind::Apply:
    case NodeKind::List: {
      std::vector<QlfNode> kids;
      kids.reserve(rhs.kids().size());
      for (const QlfNode& k : rhs.kids())
        kids.push_back(instantiate_rhs(k, b));
      return rhs.kind() == NodeKind::Apply
                 ? QlfNode::apply(rhs.name(), std::move(kids))
                 : QlfNode::list(std::move(kids));
    }
    default:
      throw Error(ErrorCode::Syntax, "invalid rewrite rhs");
  }
}

QlfNode rewrite_rec(const std::vector<RewriteRule>& rules, const QlfNode& n,
                    int depth, int max_depth) {
  if (depth > max_depth)
    throw Error(ErrorCode::RecursionDepthExceeded,
                "rewriting exceeded depth " + std::to_string(max_depth));
  QlfNode cur = n;
  for (const RewriteRule& r : rules) {
    if (auto b = match_pattern(r.lhs, cur)) {
      cur = instantiate_rhs(r.rhs, *b);
      break;  // at most one firing per position
    }
  }
  if (cur.kids().empty()) return cur;
  std::vector<QlfNode> kids;
  kids.reserve(cur.kids().size());
  for (const QlfNode& k : cur.kids())
    kids.push_back(rewrite_rec(rules, k, depth + 1, max_depth));
  switch (cur.kind()) {
    case NodeKind::Apply:
      return QlfNode::apply(cur.name(), std::move(kids));
    case NodeKind::List:
      return QlfNode::list(std::move(kids));
    case NodeKind::Abs:
      return QlfNode::abs(cur.name(), std::move(kids.front()));
    case NodeKind::Choice:
      return QlfNode::choice(cur.choice_id(), std::move(kids));
    default:
      return cur;
  }
}

}  // namespace

QlfNode apply_rewrites(const std::vector<RewriteRule>& rules, const QlfNode& q,
                       int max_depth) {
  if (rules.empty()) return q;
  return rewrite_rec(rules, q, 0, max_depth);
}

// ---------------------------------------------------------------------------
// Pre-transfer

namespace {

QlfNode coerce_codes(const QlfNode& n, const CodeTable& codes) {
  if (n.is_apply("code_np", 1) && n.kids()[0].kind() == NodeKind::List) {
    const QlfNode& items = n.kids()[0];
    std::vector<std::string> tokens;
    bool all_atoms = true;
    for (const QlfNode& item : items.kids()) {
      if (item.kind() != NodeKind::Atom) {
        all_atoms = false;
        break;
      }
      tokens.push_back(item.name());
    }
    if (all_atoms)
      return QlfNode::apply(
          "code_np", {QlfNode::atom(classify_code(tokens, codes)), items});
  }
  if (n.kids().empty()) return n;
  std::vector<QlfNode> kids;
  kids.reserve(n.kids().size());
  for (const QlfNode& k : n.kids()) kids.push_back(coerce_codes(k, codes));
  switch (n.kind()) {
    case NodeKind::Apply:
      return QlfNode::apply(n.name(), std::move(kids));
    case NodeKind::List:
      return QlfNode::list(std::move(kids));
    case NodeKind::Abs:
      return QlfNode::abs(n.name(), std::move(kids.front()));
    case NodeKind::Choice:
      return QlfNode::choice(n.choice_id(), std::move(kids));
    default:
      return n;
  }
}

}  // namespace

QlfNode pre_transfer(const QlfNode& q, const RewriteRules& rules,
                     const CodeTable& codes) {
  return apply_rewrites(rules.pre, coerce_codes(q, codes));
}

// ---------------------------------------------------------------------------
// Post-transfer

std::string form_label(const QlfNode& form) {
  if (!form.is_apply("form", 2)) return "";
  const QlfNode& head = form.kids()[0];
  if (head.kind() == NodeKind::Atom) return head.name();
  if (head.is_apply("prep", 1) && head.kids()[0].kind() == NodeKind::Atom)
    return head.kids()[0].name();
  return "";
}

std::vector<QlfNode> order_pp_modifiers(std::vector<QlfNode> mods,
                                        const PpClassTable& table) {
  std::stable_sort(mods.begin(), mods.end(),
                   [&](const QlfNode& a, const QlfNode& b) {
                     return static_cast<int>(table.classify(form_label(a))) <
                            static_cast<int>(table.classify(form_label(b)));
                   });
  return mods;
}

namespace {

QlfNode reorder_rec(const QlfNode& n, const PpClassTable& table) {
  if (n.kids().empty()) return n;
  std::vector<QlfNode> kids;
  kids.reserve(n.kids().size());
  for (const QlfNode& k : n.kids()) kids.push_back(reorder_rec(k, table));

  // Reorder the form(...) subsequence in place, leaving other items fixed.
  std::vector<std::size_t> positions;
  std::vector<QlfNode> mods;
  for (std::size_t i = 0; i < kids.size(); ++i)
    if (kids[i].is_apply("form", 2)) {
      positions.push_back(i);
      mods.push_back(kids[i]);
    }
  if (mods.size() > 1) {
    mods = order_pp_modifiers(std::move(mods), table);
    for (std::size_t i = 0; i < positions.size(); ++i)
      kids[positions[i]] = std::move(mods[i]);
  }

  switch (n.kind()) {
    case NodeKind::Apply:
      return QlfNode::apply(n.name(), std::move(kids));
    case NodeKind::List:
      return QlfNode::list(std::move(kids));
    case NodeKind::Abs:
      return QlfNode::abs(n.name(), std::move(kids.front()));
    case NodeKind::Choice:
      return QlfNode::choice(n.choice_id(), std::move(kids));
    default:
      return n;
  }
}

}  // namespace

QlfNode post_transfer(const QlfNode& q, const RewriteRules& rules,
                      const PpClassTable& table) {
  return reorder_rec(apply_rewrites(rules.post, q), table);
}

}  // namespace xfer
