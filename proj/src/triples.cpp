// Triple extraction from plain and packed QLFs.

#include "xfer/triples.hpp"

#include <optional>
#include <sstream>

#include "xfer/transfer.hpp"

namespace xfer {

// ---------------------------------------------------------------------------
// Triple text form and role table

std::string print_triple(const Triple& t) {
  return "(" + t.left + "," + t.relation + "," + t.right + ")";
}

Triple parse_triple(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw Error(ErrorCode::Syntax, "malformed triple: " + std::string(text));
  s = s.substr(1, s.size() - 2);
  std::istringstream in(s);
  std::string l, rel, r;
  if (!std::getline(in, l, ',') || !std::getline(in, rel, ',') ||
      !std::getline(in, r) || l.empty() || rel.empty() || r.empty())
    throw Error(ErrorCode::Syntax, "malformed triple: " + std::string(text));
  return {l, rel, r};
}

void RoleTable::set(const std::string& pred, int arity, int position,
                    const std::string& label) {
  labels_[{pred, arity, position}] = label;
}

std::string RoleTable::label_for(const std::string& pred, int arity,
                                 int position) const {
  auto it = labels_.find({pred, arity, position});
  if (it != labels_.end()) return it->second;
  return "arg" + std::to_string(position);
}

RoleTable RoleTable::load(std::string_view text) {
  RoleTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto cut = line.find('%'); cut != std::string::npos) line.erase(cut);
    std::istringstream ls(line);
    std::string kw, spec, label;
    int position = 0;
    if (!(ls >> kw)) continue;
    if (kw != "role" || !(ls >> spec >> position >> label))
      throw Error(ErrorCode::Syntax,
                  "role table line " + std::to_string(lineno) +
                      ": expected 'role <pred>/<arity> <position> <label>'");
    auto slash = spec.find('/');
    if (slash == std::string::npos)
      throw Error(ErrorCode::Syntax,
                  "role table line " + std::to_string(lineno) +
                      ": predicate must be written <pred>/<arity>");
    table.set(spec.substr(0, slash), std::stoi(spec.substr(slash + 1)),
              position, label);
  }
  return table;
}

RoleTable RoleTable::load_file(const std::string& path) {
  return load(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Shared shape predicates

namespace {

bool is_term_node(const QlfNode& n) {
  return n.is_apply("term", 2) && n.kids()[1].kind() == NodeKind::Abs;
}

bool is_and_list(const QlfNode& n) {
  return n.kind() == NodeKind::List && n.kids().size() >= 2 &&
         n.kids()[0].is_atom("and");
}

// [P, V] with an atom predicate; the one-place predication shape.
bool is_pred2(const QlfNode& n) {
  return n.kind() == NodeKind::List && n.kids().size() == 2 &&
         n.kids()[0].kind() == NodeKind::Atom && !n.kids()[0].is_atom("and") &&
         n.kids()[1].kind() == NodeKind::ObjVar;
}

// [P, A1..Ak] predication with an atom head (k >= 1, not a conjunction).
bool is_predication(const QlfNode& n) {
  return n.kind() == NodeKind::List && n.kids().size() >= 2 &&
         n.kids()[0].kind() == NodeKind::Atom && !n.kids()[0].is_atom("and");
}

}  // namespace

// ---------------------------------------------------------------------------
// Plain extraction

namespace {

// First [P, V] over `bound` (empty = any variable), searching conjunctions
// left to right, depth first.
std::optional<std::string> find_head(const QlfNode& body,
                                     const std::string& bound) {
  if (is_pred2(body) && (bound.empty() || body.kids()[1].name() == bound))
    return body.kids()[0].name();
  if (is_and_list(body)) {
    for (std::size_t i = 1; i < body.kids().size(); ++i)
      if (auto head = find_head(body.kids()[i], bound)) return head;
  }
  return std::nullopt;
}

struct PlainSig {
  std::optional<std::string> det;
  std::optional<std::string> head;
};

struct PlainExtractor {
  const RoleTable& roles;
  TripleBag bag;
  std::vector<Diagnostic>* diags;

  void diagnose(const std::string& code, const QlfNode& n) {
    if (diags) diags->push_back({code, print_qlf(n)});
  }

  void emit(std::string l, std::string rel, std::string r) {
    bag[{std::move(l), std::move(rel), std::move(r)}] += 1;
  }

  // Determiner and head are extracted independently: a term with an exotic
  // determiner still governs its modifiers, a headless term still shows up
  // as a dependent determiner.
  PlainSig signature(const QlfNode& term) {
    PlainSig sig;
    if (term.kids()[0].kind() == NodeKind::Atom)
      sig.det = term.kids()[0].name();
    else
      diagnose("NonAtomSlot", term.kids()[0]);
    sig.head = find_head(term.kids()[1].body(), term.kids()[1].name());
    if (!sig.head) diagnose("NoHeadPredicate", term);
    return sig;
  }

  void emit_instance(const std::string& gov, const std::string& label,
                     const PlainSig& dep) {
    if (dep.head) emit(gov, label, *dep.head);
    if (dep.det) emit(gov, label, *dep.det);
  }

  void walk(const QlfNode& n, const std::string& gov) {
    switch (n.kind()) {
      case NodeKind::Atom:
      case NodeKind::ObjVar:
        return;
      case NodeKind::Choice:
        throw Error(ErrorCode::Syntax,
                    "extract_triples requires a choice-free QLF");
      case NodeKind::Abs:
        walk(n.body(), gov);
        return;
      case NodeKind::Apply: {
        if (is_term_node(n)) {
          PlainSig sig = signature(n);
          if (sig.det && sig.head) emit(*sig.det, "det", *sig.head);
          walk(n.kids()[0], "");
          walk(n.kids()[1].body(), sig.head ? *sig.head : "");
          return;
        }
        if (n.is_apply("form", 2)) {
          const std::string label = label_of(n.kids()[0]);
          if (!gov.empty() && !label.empty() && is_term_node(n.kids()[1]))
            emit_instance(gov, label, signature(n.kids()[1]));
          walk(n.kids()[0], "");
          walk(n.kids()[1], "");
          return;
        }
        for (const QlfNode& k : n.kids()) walk(k, gov);
        return;
      }
      case NodeKind::List: {
        if (is_predication(n)) {
          int arity = static_cast<int>(n.kids().size());
          for (std::size_t i = 1; i < n.kids().size(); ++i) {
            if (!is_term_node(n.kids()[i])) continue;
            std::string label = roles.label_for(n.kids()[0].name(), arity,
                                                static_cast<int>(i) + 1);
            emit_instance(n.kids()[0].name(), label, signature(n.kids()[i]));
          }
          for (const QlfNode& k : n.kids()) walk(k, gov);
          return;
        }
        std::string g = gov;
        if (is_and_list(n) && g.empty())
          if (auto head = find_head(n, "")) g = *head;
        for (const QlfNode& k : n.kids()) walk(k, g);
        return;
      }
      default:
        throw Error(ErrorCode::Syntax, "pattern node in plain QLF");
    }
  }

  static std::string label_of(const QlfNode& head) {
    if (head.kind() == NodeKind::Atom) return head.name();
    if (head.is_apply("prep", 1) && head.kids()[0].kind() == NodeKind::Atom)
      return head.kids()[0].name();
    return "";
  }
};

}  // namespace

std::pair<std::string, std::string> term_signature(const QlfNode& t) {
  if (!is_term_node(t))
    throw Error(ErrorCode::NoHeadPredicate,
                "not a term(Det, V^Body) node: " + print_qlf(t));
  if (t.kids()[0].kind() != NodeKind::Atom)
    throw Error(ErrorCode::NoHeadPredicate,
                "determiner is not an atom: " + print_qlf(t));
  auto head = find_head(t.kids()[1].body(), t.kids()[1].name());
  if (!head)
    throw Error(ErrorCode::NoHeadPredicate,
                "no head predication over " + t.kids()[1].name() + " in " +
                    print_qlf(t));
  return {t.kids()[0].name(), *head};
}

TripleBag extract_triples(const QlfNode& q, const RoleTable& roles,
                          std::vector<Diagnostic>* diagnostics) {
  PlainExtractor ex{roles, {}, diagnostics};
  ex.walk(q, "");
  return ex.bag;
}

// ---------------------------------------------------------------------------
// Packed extraction
//
// Every question asked of the tree (what is this determiner, what is the
// head, what is the label) is answered as a list of (value, conditions)
// branches; one branch per local choice combination. Crossing branch lists
// while merging conditions reproduces plain extraction under every
// assignment.

namespace {

using Cond = std::map<int, int>;

struct CondSym {
  std::string sym;
  Cond cond;
};

// Merge fails when the same choice id is pinned to two different
// alternatives; such combinations are unreachable and must be dropped.
std::optional<Cond> merge(const Cond& a, const Cond& b) {
  Cond out = a;
  for (const auto& [id, idx] : b) {
    auto [it, inserted] = out.emplace(id, idx);
    if (!inserted && it->second != idx) return std::nullopt;
  }
  return out;
}

struct View {
  const QlfNode* node;
  Cond cond;
};

void resolve_into(const QlfNode& n, const Cond& cond, std::vector<View>& out) {
  if (n.kind() == NodeKind::Choice) {
    for (std::size_t k = 0; k < n.kids().size(); ++k) {
      Cond c = cond;
      c[n.choice_id()] = static_cast<int>(k);
      resolve_into(n.kids()[k], c, out);
    }
    return;
  }
  out.push_back({&n, cond});
}

std::vector<View> resolve(const QlfNode& n, const Cond& cond) {
  std::vector<View> out;
  resolve_into(n, cond, out);
  return out;
}

struct PackedExtractor {
  const RoleTable& roles;
  std::uint64_t expansion_limit;
  std::vector<ConditionalTriple> out;
  std::vector<Diagnostic>* diags;
  std::map<int, std::uint64_t> choice_sizes;

  void diagnose(const std::string& code, const QlfNode& n) {
    if (diags) diags->push_back({code, print_qlf(n)});
  }

  // Product of alternative counts over the choice ids an instance touches
  // beyond its ambient context.
  void check_expansion(const QlfNode& at, const Cond& ctx,
                       std::initializer_list<const std::vector<CondSym>*>
                           parts) {
    std::set<int> ids;
    for (const auto* part : parts)
      for (const auto& b : *part)
        for (const auto& [id, idx] : b.cond)
          if (!ctx.count(id)) ids.insert(id);
    std::uint64_t combos = 1;
    for (int id : ids) {
      std::uint64_t size = choice_sizes.at(id);
      combos = combos > UINT64_MAX / size ? UINT64_MAX : combos * size;
    }
    if (combos > expansion_limit)
      throw Error(ErrorCode::ExpansionLimitExceeded,
                  "relation instance at " + print_qlf(at) + " spans " +
                      std::to_string(combos) +
                      " local choice combinations (limit " +
                      std::to_string(expansion_limit) + ")",
                  combos);
  }

  void emit(const std::string& l, const std::string& rel,
            const std::string& r, Cond cond) {
    out.push_back({{l, rel, r}, std::move(cond)});
  }

  // Atoms reachable at this position; non-atom branches are dropped with a
  // diagnostic (they cannot fill a triple slot).
  std::vector<CondSym> atoms_at(const QlfNode& n, const Cond& cond,
                                bool quiet = false) {
    std::vector<CondSym> syms;
    for (const View& v : resolve(n, cond)) {
      if (v.node->kind() == NodeKind::Atom)
        syms.push_back({v.node->name(), v.cond});
      else if (!quiet)
        diagnose("NonAtomSlot", *v.node);
    }
    return syms;
  }

  // --- head search -------------------------------------------------------

  struct HeadScan {
    std::vector<CondSym> heads;
    std::vector<Cond> misses;
  };

  // First [P, V] over `bound` (empty = any variable) within a conjunction,
  // continuing past items that fail under the relevant conditions.
  void scan_items(const std::vector<QlfNode>& items, std::size_t idx,
                  const std::string& bound, const Cond& cond, HeadScan& hs) {
    if (idx >= items.size()) {
      hs.misses.push_back(cond);
      return;
    }
    for (const View& v : resolve(items[idx], cond)) {
      if (v.node->kind() == NodeKind::List && v.node->kids().size() == 2 &&
          !v.node->kids()[0].is_atom("and")) {
        bool advanced = false;
        for (const View& p : resolve(v.node->kids()[0], v.cond)) {
          if (p.node->kind() != NodeKind::Atom) {
            scan_items(items, idx + 1, bound, p.cond, hs);
            advanced = true;
            continue;
          }
          for (const View& arg : resolve(v.node->kids()[1], p.cond)) {
            if (arg.node->kind() == NodeKind::ObjVar &&
                (bound.empty() || arg.node->name() == bound)) {
              hs.heads.push_back({p.node->name(), arg.cond});
            } else {
              scan_items(items, idx + 1, bound, arg.cond, hs);
            }
            advanced = true;
          }
        }
        if (!advanced) scan_items(items, idx + 1, bound, v.cond, hs);
        continue;
      }
      if (v.node->kind() == NodeKind::List && v.node->kids().size() >= 2 &&
          v.node->kids()[0].is_atom("and")) {
        HeadScan nested;
        scan_items(v.node->kids(), 1, bound, v.cond, nested);
        for (auto& h : nested.heads) hs.heads.push_back(std::move(h));
        for (auto& m : nested.misses) scan_items(items, idx + 1, bound, m, hs);
        continue;
      }
      scan_items(items, idx + 1, bound, v.cond, hs);
    }
  }

  HeadScan scan_body(const QlfNode& body, const std::string& bound,
                     const Cond& cond) {
    HeadScan hs;
    for (const View& v : resolve(body, cond)) {
      if (v.node->kind() == NodeKind::List) {
        if (is_and_list(*v.node)) {
          scan_items(v.node->kids(), 1, bound, v.cond, hs);
        } else {
          // A direct [P, ...] body scans as a one-item conjunction.
          std::vector<QlfNode> wrapper = {QlfNode::atom("and"), *v.node};
          scan_items(wrapper, 1, bound, v.cond, hs);
        }
        continue;
      }
      hs.misses.push_back(v.cond);
    }
    return hs;
  }

  // --- signatures ---------------------------------------------------------

  struct CondSig {
    std::vector<CondSym> dets;
    std::vector<CondSym> heads;
  };

  // `view` must be a term node; conditions start from `cond`.
  CondSig signature(const QlfNode& term, const Cond& cond) {
    CondSig sig;
    sig.dets = atoms_at(term.kids()[0], cond);
    HeadScan hs =
        scan_body(term.kids()[1].body(), term.kids()[1].name(), cond);
    sig.heads = std::move(hs.heads);
    if (!hs.misses.empty()) diagnose("NoHeadPredicate", term);
    return sig;
  }

  // --- labels --------------------------------------------------------------

  std::vector<CondSym> labels_at(const QlfNode& head, const Cond& cond) {
    std::vector<CondSym> labels;
    for (const View& v : resolve(head, cond)) {
      if (v.node->kind() == NodeKind::Atom) {
        labels.push_back({v.node->name(), v.cond});
      } else if (v.node->is_apply("prep", 1)) {
        for (auto& s : atoms_at(v.node->kids()[0], v.cond))
          labels.push_back(std::move(s));
      }
      // other shapes: unlabelable, no instance on this branch
    }
    return labels;
  }

  // --- emission -----------------------------------------------------------

  void emit_pairwise(const std::vector<CondSym>& lefts,
                     const std::string& rel,
                     const std::vector<CondSym>& rights) {
    for (const auto& l : lefts)
      for (const auto& r : rights)
        if (auto c = merge(l.cond, r.cond)) emit(l.sym, rel, r.sym, *c);
  }

  void emit_instance(const std::vector<CondSym>& govs,
                     const std::vector<CondSym>& labels,
                     const CondSig& dep) {
    for (const auto& g : govs)
      for (const auto& l : labels) {
        auto gl = merge(g.cond, l.cond);
        if (!gl) continue;
        for (const auto& n : dep.heads)
          if (auto c = merge(*gl, n.cond)) emit(g.sym, l.sym, n.sym, *c);
        for (const auto& d : dep.dets)
          if (auto c = merge(*gl, d.cond)) emit(g.sym, l.sym, d.sym, *c);
      }
  }

  // --- traversal -----------------------------------------------------------

  void walk(const QlfNode& n, const std::vector<CondSym>& govs,
            const Cond& ctx) {
    switch (n.kind()) {
      case NodeKind::Atom:
      case NodeKind::ObjVar:
        return;
      case NodeKind::Choice: {
        for (std::size_t k = 0; k < n.kids().size(); ++k) {
          Cond c = ctx;
          c[n.choice_id()] = static_cast<int>(k);
          walk(n.kids()[k], govs, c);
        }
        return;
      }
      case NodeKind::Abs:
        walk(n.body(), govs, ctx);
        return;
      case NodeKind::Apply: {
        if (is_term_node(n)) {
          CondSig sig = signature(n, ctx);
          check_expansion(n, ctx, {&sig.dets, &sig.heads});
          emit_pairwise(sig.dets, "det", sig.heads);
          walk(n.kids()[0], {}, ctx);
          walk(n.kids()[1].body(), sig.heads, ctx);
          return;
        }
        if (n.is_apply("form", 2)) {
          std::vector<CondSym> labels = labels_at(n.kids()[0], ctx);
          for (const View& dep : resolve(n.kids()[1], ctx)) {
            if (!is_term_node(*dep.node)) continue;
            CondSig sig = signature(*dep.node, dep.cond);
            check_expansion(n, ctx, {&govs, &labels, &sig.dets, &sig.heads});
            emit_instance(govs, labels, sig);
          }
          walk(n.kids()[0], {}, ctx);
          walk(n.kids()[1], {}, ctx);
          return;
        }
        for (const QlfNode& k : n.kids()) walk(k, govs, ctx);
        return;
      }
      case NodeKind::List: {
        // Predication instances: resolved head atom per branch.
        if (n.kids().size() >= 2 && !n.kids()[0].is_atom("and")) {
          std::vector<CondSym> preds = atoms_at(n.kids()[0], ctx, true);
          int arity = static_cast<int>(n.kids().size());
          for (std::size_t i = 1; i < n.kids().size(); ++i) {
            for (const View& arg : resolve(n.kids()[i], ctx)) {
              if (!is_term_node(*arg.node)) continue;
              CondSig sig = signature(*arg.node, arg.cond);
              check_expansion(n, ctx, {&preds, &sig.dets, &sig.heads});
              for (const auto& p : preds) {
                std::string label =
                    roles.label_for(p.sym, arity, static_cast<int>(i) + 1);
                std::vector<CondSym> pv = {p};
                std::vector<CondSym> lv = {{label, p.cond}};
                emit_instance(pv, lv, sig);
              }
            }
          }
          for (const QlfNode& k : n.kids()) walk(k, govs, ctx);
          return;
        }
        std::vector<CondSym> g = govs;
        if (is_and_list(n) && g.empty()) {
          HeadScan hs;
          scan_items(n.kids(), 1, "", ctx, hs);
          g = std::move(hs.heads);
        }
        for (const QlfNode& k : n.kids()) walk(k, g, ctx);
        return;
      }
      default:
        throw Error(ErrorCode::Syntax, "pattern node in packed QLF");
    }
  }
};

}  // namespace

std::vector<ConditionalTriple> extract_conditional_triples(
    const QlfNode& packed, const RoleTable& roles,
    std::uint64_t expansion_limit, std::vector<Diagnostic>* diagnostics) {
  PackedExtractor ex{roles, expansion_limit, {}, diagnostics, {}};
  for (auto& [id, size] : collect_choices(packed))
    ex.choice_sizes[id] = static_cast<std::uint64_t>(size);
  ex.walk(packed, {}, {});
  return ex.out;
}

TripleBag satisfied_triples(const std::vector<ConditionalTriple>& cts,
                            const Assignment& a) {
  TripleBag bag;
  for (const ConditionalTriple& ct : cts)
    if (conditions_satisfied(ct.conditions, a)) bag[ct.triple] += 1;
  return bag;
}

}  // namespace xfer
