// QLF term construction, concrete syntax, and packed-form utilities.

#include "xfer/qlf.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace xfer {

// ---------------------------------------------------------------------------
// Construction

QlfNode QlfNode::atom(std::string name) {
  return QlfNode(NodeKind::Atom, std::move(name), -1, {});
}

QlfNode QlfNode::objvar(std::string name) {
  return QlfNode(NodeKind::ObjVar, std::move(name), -1, {});
}

QlfNode QlfNode::apply(std::string functor, std::vector<QlfNode> args) {
  return QlfNode(NodeKind::Apply, std::move(functor), -1, std::move(args));
}

QlfNode QlfNode::abs(std::string var, QlfNode body) {
  std::vector<QlfNode> kids;
  kids.push_back(std::move(body));
  return QlfNode(NodeKind::Abs, std::move(var), -1, std::move(kids));
}

QlfNode QlfNode::list(std::vector<QlfNode> items) {
  return QlfNode(NodeKind::List, "", -1, std::move(items));
}

QlfNode QlfNode::choice(int id, std::vector<QlfNode> alternatives) {
  return QlfNode(NodeKind::Choice, "", id, std::move(alternatives));
}

QlfNode QlfNode::meta(std::string name) {
  return QlfNode(NodeKind::MetaVar, std::move(name), -1, {});
}

QlfNode QlfNode::transfer_call(std::string meta_name) {
  return QlfNode(NodeKind::TransferCall, std::move(meta_name), -1, {});
}

bool QlfNode::operator==(const QlfNode& other) const {
  return kind_ == other.kind_ && choice_id_ == other.choice_id_ &&
         name_ == other.name_ && kids_ == other.kids_;
}

std::strong_ordering QlfNode::operator<=>(const QlfNode& other) const {
  if (auto c = kind_ <=> other.kind_; c != 0) return c;
  if (auto c = name_ <=> other.name_; c != 0) return c;
  if (auto c = choice_id_ <=> other.choice_id_; c != 0) return c;
  if (auto c = kids_.size() <=> other.kids_.size(); c != 0) return c;
  for (std::size_t i = 0; i < kids_.size(); ++i)
    if (auto c = kids_[i] <=> other.kids_[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  Ident,    // lowercase-initial
  Var,      // uppercase-initial
  Integer,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Caret,
  Hash,
  At,
  Arrow,    // =>
  Dot,
  Colon,
  End,
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "atom";
    case Tok::Var: return "object variable";
    case Tok::Integer: return "integer";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Caret: return "'^'";
    case Tok::Hash: return "'#'";
    case Tok::At: return "'@'";
    case Tok::Arrow: return "'=>'";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Lexer {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  Tok tok = Tok::End;
  std::string value;
  int tok_line = 1;
  int tok_col = 1;

  explicit Lexer(std::string_view t) : text(t) { advance(); }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "syntax error at line " << tok_line << ", column " << tok_col
       << ": " << what;
    throw Error(ErrorCode::Syntax, os.str());
  }

  void bump(char c) {
    ++pos;
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }

  void skip_space_and_comments() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '%') {
        while (pos < text.size() && text[pos] != '\n') bump(text[pos]);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump(c);
      } else {
        break;
      }
    }
  }

  void advance() {
    skip_space_and_comments();
    tok_line = line;
    tok_col = col;
    value.clear();
    if (pos >= text.size()) {
      tok = Tok::End;
      return;
    }
    char c = text[pos];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) ||
              text[pos] == '_')) {
        value.push_back(text[pos]);
        bump(text[pos]);
      }
      tok = std::isupper(static_cast<unsigned char>(c)) ? Tok::Var : Tok::Ident;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[pos]))) {
        value.push_back(text[pos]);
        bump(text[pos]);
      }
      tok = Tok::Integer;
      return;
    }
    bump(c);
    switch (c) {
      case '(': tok = Tok::LParen; return;
      case ')': tok = Tok::RParen; return;
      case '[': tok = Tok::LBracket; return;
      case ']': tok = Tok::RBracket; return;
      case ',': tok = Tok::Comma; return;
      case '^': tok = Tok::Caret; return;
      case '#': tok = Tok::Hash; return;
      case '@': tok = Tok::At; return;
      case '.': tok = Tok::Dot; return;
      case ':': tok = Tok::Colon; return;
      case '=':
        if (pos < text.size() && text[pos] == '>') {
          bump('>');
          tok = Tok::Arrow;
          return;
        }
        fail("unexpected '='");
      default: {
        std::ostringstream os;
        os << "unexpected character '" << c << "'";
        fail(os.str());
      }
    }
  }

  void expect(Tok t) {
    if (tok != t) {
      std::ostringstream os;
      os << "expected " << tok_name(t) << ", got " << tok_name(tok);
      if (!value.empty()) os << " '" << value << "'";
      fail(os.str());
    }
    advance();
  }
};

// Recursive-descent parser over the expression grammar. Pattern mode adds
// `@name`; target mode additionally turns `tr(@name)` into a TransferCall.
struct Parser {
  Lexer lex;
  bool patterns = false;
  bool target_side = false;

  explicit Parser(std::string_view text) : lex(text) {}

  QlfNode parse_expr() {
    switch (lex.tok) {
      case Tok::Ident: {
        std::string name = lex.value;
        lex.advance();
        if (lex.tok == Tok::LParen) {
          lex.advance();
          std::vector<QlfNode> args = parse_expr_list(Tok::RParen);
          if (target_side && name == "tr" && args.size() == 1 &&
              args[0].kind() == NodeKind::MetaVar)
            return QlfNode::transfer_call(args[0].name());
          return QlfNode::apply(std::move(name), std::move(args));
        }
        return QlfNode::atom(std::move(name));
      }
      case Tok::Var: {
        std::string name = lex.value;
        lex.advance();
        if (lex.tok == Tok::Caret) {
          lex.advance();
          QlfNode body = parse_expr();
          return QlfNode::abs(std::move(name), std::move(body));
        }
        return QlfNode::objvar(std::move(name));
      }
      case Tok::LBracket: {
        lex.advance();
        std::vector<QlfNode> items = parse_expr_list(Tok::RBracket);
        return QlfNode::list(std::move(items));
      }
      case Tok::Hash: {
        lex.advance();
        lex.expect(Tok::LParen);
        if (lex.tok != Tok::Integer) lex.fail("expected choice id integer");
        int id = std::stoi(lex.value);
        lex.advance();
        lex.expect(Tok::Comma);
        lex.expect(Tok::LBracket);
        std::vector<QlfNode> alts = parse_expr_list(Tok::RBracket);
        lex.expect(Tok::RParen);
        return QlfNode::choice(id, std::move(alts));
      }
      case Tok::At: {
        if (!patterns) lex.fail("meta-variables are not allowed in plain QLFs");
        lex.advance();
        if (lex.tok != Tok::Ident) lex.fail("expected meta-variable name");
        std::string name = lex.value;
        lex.advance();
        return QlfNode::meta(std::move(name));
      }
      default: {
        std::ostringstream os;
        os << "expected expression, got " << tok_name(lex.tok);
        lex.fail(os.str());
      }
    }
  }

  std::vector<QlfNode> parse_expr_list(Tok close) {
    std::vector<QlfNode> items;
    items.push_back(parse_expr());
    while (lex.tok == Tok::Comma) {
      lex.advance();
      items.push_back(parse_expr());
    }
    lex.expect(close);
    return items;
  }

  QlfNode parse_whole() {
    QlfNode n = parse_expr();
    if (lex.tok != Tok::End) {
      std::ostringstream os;
      os << "trailing input after expression: " << tok_name(lex.tok);
      lex.fail(os.str());
    }
    return n;
  }
};

}  // namespace

QlfNode parse_qlf(std::string_view text) {
  Parser p(text);
  return p.parse_whole();
}

QlfNode parse_pattern(std::string_view text, bool target_side) {
  Parser p(text);
  p.patterns = true;
  p.target_side = target_side;
  return p.parse_whole();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void print_node(const QlfNode& n, std::string& out) {
  switch (n.kind()) {
    case NodeKind::Atom:
    case NodeKind::ObjVar:
      out += n.name();
      return;
    case NodeKind::Apply: {
      out += n.name();
      out += '(';
      for (std::size_t i = 0; i < n.kids().size(); ++i) {
        if (i) out += ',';
        print_node(n.kids()[i], out);
      }
      out += ')';
      return;
    }
    case NodeKind::Abs:
      out += n.name();
      out += '^';
      print_node(n.body(), out);
      return;
    case NodeKind::List: {
      out += '[';
      for (std::size_t i = 0; i < n.kids().size(); ++i) {
        if (i) out += ',';
        print_node(n.kids()[i], out);
      }
      out += ']';
      return;
    }
    case NodeKind::Choice: {
      out += "#(";
      out += std::to_string(n.choice_id());
      out += ",[";
      for (std::size_t i = 0; i < n.kids().size(); ++i) {
        if (i) out += ',';
        print_node(n.kids()[i], out);
      }
      out += "])";
      return;
    }
    case NodeKind::MetaVar:
      out += '@';
      out += n.name();
      return;
    case NodeKind::TransferCall:
      out += "tr(@";
      out += n.name();
      out += ')';
      return;
  }
}

void pretty_node(const QlfNode& n, int indent, int width, std::string& out) {
  std::string flat;
  print_node(n, flat);
  if (static_cast<int>(flat.size()) + indent <= width || n.kids().empty()) {
    out += flat;
    return;
  }
  if (n.kids().size() == 1 && n.kind() == NodeKind::Apply) {
    out += n.name();
    out += '(';
    pretty_node(n.kids()[0], indent + 2, width, out);
    out += ')';
    return;
  }
  auto open_multi = [&](const std::string& head, char open, char close,
                        const std::vector<QlfNode>& kids) {
    out += head;
    out += open;
    std::string pad(indent + 2, ' ');
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (i) out += ',';
      out += '\n';
      out += pad;
      pretty_node(kids[i], indent + 2, width, out);
    }
    out += close;
  };
  switch (n.kind()) {
    case NodeKind::Apply:
      open_multi(n.name(), '(', ')', n.kids());
      return;
    case NodeKind::List:
      open_multi("", '[', ']', n.kids());
      return;
    case NodeKind::Choice:
      open_multi("#(" + std::to_string(n.choice_id()) + ",", '[', ']',
                 n.kids());
      out += ')';
      return;
    case NodeKind::Abs:
      out += n.name();
      out += '^';
      pretty_node(n.body(), indent + 2, width, out);
      return;
    default:
      out += flat;
      return;
  }
}

}  // namespace

std::string print_qlf(const QlfNode& node) {
  std::string out;
  print_node(node, out);
  return out;
}

std::string pretty_qlf(const QlfNode& node, int width) {
  std::string out;
  pretty_node(node, 0, width, out);
  return out;
}

// ---------------------------------------------------------------------------
// File IO

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write file: " + path);
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

std::vector<QlfNode> load_qlf_file(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<QlfNode> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto cut = line.find('%'); cut != std::string::npos)
      line.erase(cut);
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;
    out.push_back(parse_qlf(line));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Choices and assignments

namespace {

void collect_choices_rec(const QlfNode& n, std::vector<std::pair<int, int>>& out,
                         std::set<int>& seen) {
  if (n.kind() == NodeKind::Choice) {
    if (!seen.insert(n.choice_id()).second)
      throw Error(ErrorCode::DuplicateChoiceId,
                  "duplicate choice id " + std::to_string(n.choice_id()));
    out.emplace_back(n.choice_id(), static_cast<int>(n.kids().size()));
  }
  for (const QlfNode& k : n.kids()) collect_choices_rec(k, out, seen);
}

}  // namespace

std::vector<std::pair<int, int>> collect_choices(const QlfNode& node) {
  std::vector<std::pair<int, int>> out;
  std::set<int> seen;
  collect_choices_rec(node, out, seen);
  return out;
}

QlfNode apply_assignment(const QlfNode& node, const Assignment& a) {
  switch (node.kind()) {
    case NodeKind::Choice: {
      auto it = a.find(node.choice_id());
      if (it == a.end())
        throw Error(ErrorCode::MissingChoice,
                    "assignment is missing choice " +
                        std::to_string(node.choice_id()));
      if (it->second < 0 ||
          it->second >= static_cast<int>(node.kids().size()))
        throw Error(ErrorCode::IndexOutOfRange,
                    "alternative index " + std::to_string(it->second) +
                        " out of range for choice " +
                        std::to_string(node.choice_id()));
      return apply_assignment(node.kids()[it->second], a);
    }
    case NodeKind::Atom:
    case NodeKind::ObjVar:
    case NodeKind::MetaVar:
    case NodeKind::TransferCall:
      return node;
    case NodeKind::Apply:
    case NodeKind::List:
    case NodeKind::Abs: {
      std::vector<QlfNode> kids;
      kids.reserve(node.kids().size());
      for (const QlfNode& k : node.kids())
        kids.push_back(apply_assignment(k, a));
      if (node.kind() == NodeKind::Apply)
        return QlfNode::apply(node.name(), std::move(kids));
      if (node.kind() == NodeKind::List) return QlfNode::list(std::move(kids));
      return QlfNode::abs(node.name(), std::move(kids.front()));
    }
  }
  throw Error(ErrorCode::Syntax, "corrupt node");
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > UINT64_MAX / b) return UINT64_MAX;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return (a > UINT64_MAX - b) ? UINT64_MAX : a + b;
}

using Unpacking = std::pair<Assignment, QlfNode>;

// Cross product of per-kid unpackings; choice ids are unique per tree so
// the assignment merge never conflicts.
std::vector<Unpacking> enumerate_rec(const QlfNode& n) {
  if (n.kind() == NodeKind::Choice) {
    std::vector<Unpacking> out;
    for (std::size_t k = 0; k < n.kids().size(); ++k) {
      for (auto& [a, t] : enumerate_rec(n.kids()[k])) {
        Assignment merged = a;
        merged[n.choice_id()] = static_cast<int>(k);
        out.emplace_back(std::move(merged), std::move(t));
      }
    }
    return out;
  }
  if (n.kids().empty()) return {{Assignment{}, n}};
  std::vector<Unpacking> acc = {{Assignment{}, n}};
  std::vector<std::vector<Unpacking>> per_kid;
  per_kid.reserve(n.kids().size());
  for (const QlfNode& k : n.kids()) per_kid.push_back(enumerate_rec(k));
  std::vector<std::pair<Assignment, std::vector<QlfNode>>> combos = {
      {Assignment{}, {}}};
  for (auto& options : per_kid) {
    std::vector<std::pair<Assignment, std::vector<QlfNode>>> next;
    next.reserve(combos.size() * options.size());
    for (auto& [a, kids] : combos) {
      for (auto& [oa, on] : options) {
        Assignment merged = a;
        merged.insert(oa.begin(), oa.end());
        std::vector<QlfNode> nk = kids;
        nk.push_back(on);
        next.emplace_back(std::move(merged), std::move(nk));
      }
    }
    combos = std::move(next);
  }
  std::vector<Unpacking> out;
  out.reserve(combos.size());
  for (auto& [a, kids] : combos) {
    switch (n.kind()) {
      case NodeKind::Apply:
        out.emplace_back(std::move(a), QlfNode::apply(n.name(), std::move(kids)));
        break;
      case NodeKind::List:
        out.emplace_back(std::move(a), QlfNode::list(std::move(kids)));
        break;
      case NodeKind::Abs:
        out.emplace_back(std::move(a),
                         QlfNode::abs(n.name(), std::move(kids.front())));
        break;
      default:
        throw Error(ErrorCode::Syntax, "corrupt node");
    }
  }
  return out;
}

}  // namespace

std::uint64_t count_unpackings(const QlfNode& node) {
  if (node.kind() == NodeKind::Choice) {
    std::uint64_t total = 0;
    for (const QlfNode& alt : node.kids())
      total = sat_add(total, count_unpackings(alt));
    return total;
  }
  std::uint64_t total = 1;
  for (const QlfNode& k : node.kids())
    total = sat_mul(total, count_unpackings(k));
  return total;
}

std::vector<std::pair<Assignment, QlfNode>> enumerate_unpackings(
    const QlfNode& node, std::uint64_t limit) {
  std::uint64_t count = count_unpackings(node);
  if (count > limit)
    throw Error(ErrorCode::LimitExceeded,
                "tree has " + std::to_string(count) +
                    " unpackings, limit is " + std::to_string(limit),
                count);
  std::vector<Unpacking> out = enumerate_rec(node);
  std::sort(out.begin(), out.end(),
            [](const Unpacking& x, const Unpacking& y) {
              return x.first < y.first;
            });
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void validate_rec(const QlfNode& n, std::set<int>& choice_ids,
                  std::set<std::string>& bound,
                  std::vector<Diagnostic>& out) {
  switch (n.kind()) {
    case NodeKind::MetaVar:
    case NodeKind::TransferCall:
      out.push_back({"PatternNodeInPlainQlf",
                     "pattern construct in plain QLF: " + print_qlf(n)});
      return;
    case NodeKind::Choice:
      if (!choice_ids.insert(n.choice_id()).second)
        out.push_back({"DuplicateChoiceId",
                       "choice id " + std::to_string(n.choice_id()) +
                           " occurs more than once"});
      if (n.kids().size() < 2)
        out.push_back({"ChoiceTooFewAlternatives",
                       "choice " + std::to_string(n.choice_id()) + " has " +
                           std::to_string(n.kids().size()) +
                           " alternative(s)"});
      for (const QlfNode& k : n.kids())
        validate_rec(k, choice_ids, bound, out);
      return;
    case NodeKind::Abs: {
      bool shadowed = bound.count(n.name()) > 0;
      if (shadowed)
        out.push_back({"ShadowedVariable",
                       "variable " + n.name() + " bound twice on one path"});
      bool inserted = bound.insert(n.name()).second;
      validate_rec(n.body(), choice_ids, bound, out);
      if (inserted) bound.erase(n.name());
      return;
    }
    default:
      for (const QlfNode& k : n.kids())
        validate_rec(k, choice_ids, bound, out);
      return;
  }
}

void free_vars_rec(const QlfNode& n, std::set<std::string>& bound,
                   std::set<std::string>& out) {
  switch (n.kind()) {
    case NodeKind::ObjVar:
      if (!bound.count(n.name())) out.insert(n.name());
      return;
    case NodeKind::Abs: {
      bool inserted = bound.insert(n.name()).second;
      free_vars_rec(n.body(), bound, out);
      if (inserted) bound.erase(n.name());
      return;
    }
    default:
      for (const QlfNode& k : n.kids()) free_vars_rec(k, bound, out);
      return;
  }
}

}  // namespace

std::vector<Diagnostic> validate_qlf(const QlfNode& node) {
  std::vector<Diagnostic> out;
  std::set<int> choice_ids;
  std::set<std::string> bound;
  validate_rec(node, choice_ids, bound, out);
  return out;
}

std::set<std::string> free_vars(const QlfNode& node) {
  std::set<std::string> bound, out;
  free_vars_rec(node, bound, out);
  return out;
}

// ---------------------------------------------------------------------------
// Alpha equivalence

namespace {

bool alpha_rec(const QlfNode& a, const QlfNode& b,
               std::map<std::string, std::string>& fwd,
               std::map<std::string, std::string>& rev) {
  if (a.kind() != b.kind()) return false;
  if (a.kind() == NodeKind::ObjVar || a.kind() == NodeKind::Abs) {
    auto f = fwd.find(a.name());
    auto r = rev.find(b.name());
    if (f == fwd.end() && r == rev.end()) {
      fwd[a.name()] = b.name();
      rev[b.name()] = a.name();
    } else if (f == fwd.end() || r == rev.end() || f->second != b.name() ||
               r->second != a.name()) {
      return false;
    }
  } else {
    if (a.name() != b.name() || a.choice_id() != b.choice_id()) return false;
  }
  if (a.kids().size() != b.kids().size()) return false;
  for (std::size_t i = 0; i < a.kids().size(); ++i)
    if (!alpha_rec(a.kids()[i], b.kids()[i], fwd, rev)) return false;
  return true;
}

QlfNode alpha_canon_rec(const QlfNode& n,
                        std::map<std::string, std::string>& names) {
  auto canon_name = [&](const std::string& name) {
    auto it = names.find(name);
    if (it != names.end()) return it->second;
    std::string fresh = "V" + std::to_string(names.size() + 1);
    names[name] = fresh;
    return fresh;
  };
  switch (n.kind()) {
    case NodeKind::ObjVar:
      return QlfNode::objvar(canon_name(n.name()));
    case NodeKind::Abs: {
      std::string var = canon_name(n.name());
      return QlfNode::abs(std::move(var), alpha_canon_rec(n.body(), names));
    }
    default: {
      if (n.kids().empty()) return n;
      std::vector<QlfNode> kids;
      kids.reserve(n.kids().size());
      for (const QlfNode& k : n.kids())
        kids.push_back(alpha_canon_rec(k, names));
      switch (n.kind()) {
        case NodeKind::Apply:
          return QlfNode::apply(n.name(), std::move(kids));
        case NodeKind::List:
          return QlfNode::list(std::move(kids));
        case NodeKind::Choice:
          return QlfNode::choice(n.choice_id(), std::move(kids));
        default:
          return n;
      }
    }
  }
}

}  // namespace

bool alpha_equal(const QlfNode& a, const QlfNode& b) {
  std::map<std::string, std::string> fwd, rev;
  return alpha_rec(a, b, fwd, rev);
}

QlfNode alpha_canonical(const QlfNode& node) {
  std::map<std::string, std::string> names;
  return alpha_canon_rec(node, names);
}

}  // namespace xfer
