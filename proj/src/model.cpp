// Discriminant scores, pair training, packed scoring, and k-best selection.

#include "xfer/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace xfer {

double discriminant(Counts c) {
  const double g = static_cast<double>(c.good);
  const double b = static_cast<double>(c.bad);
  if (c.good < c.bad) return std::log2(2.0 * (g + 1.0) / (g + b + 2.0));
  if (c.good == c.bad) return 0.0;
  return -std::log2(2.0 * (b + 1.0) / (g + b + 2.0));
}

// ---------------------------------------------------------------------------
// Model table

void PreferenceModel::add_rule_counts(const std::string& id, bool good,
                                      std::uint64_t n) {
  Counts& c = rules_[id];
  (good ? c.good : c.bad) += n;
}

void PreferenceModel::add_triple_counts(const Triple& t, bool good,
                                        std::uint64_t n) {
  Counts& c = triples_[t];
  (good ? c.good : c.bad) += n;
}

void PreferenceModel::set_rule_counts(const std::string& id, Counts c) {
  rules_[id] = c;
}

void PreferenceModel::set_triple_counts(const Triple& t, Counts c) {
  triples_[t] = c;
}

double PreferenceModel::rule_score(const std::string& id) const {
  auto it = rules_.find(id);
  return it == rules_.end() ? 0.0 : discriminant(it->second);
}

double PreferenceModel::triple_score(const Triple& t) const {
  auto it = triples_.find(t);
  return it == triples_.end() ? 0.0 : discriminant(it->second);
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::string PreferenceModel::format() const {
  std::string out = "weights " + format_double(weights_.rule) + " " +
                    format_double(weights_.lm) + "\n";
  for (const auto& [id, c] : rules_)
    out += "rule " + id + " " + std::to_string(c.good) + " " +
           std::to_string(c.bad) + "\n";
  for (const auto& [t, c] : triples_)
    out += "triple " + print_triple(t) + " " + std::to_string(c.good) + " " +
           std::to_string(c.bad) + "\n";
  return out;
}

PreferenceModel PreferenceModel::parse(std::string_view text) {
  PreferenceModel m;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool have_weights = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto cut = line.find('%'); cut != std::string::npos) line.erase(cut);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    auto fail = [&](const std::string& what) -> void {
      throw Error(ErrorCode::Syntax,
                  "model line " + std::to_string(lineno) + ": " + what);
    };
    if (kw == "weights") {
      double wr = 0, wl = 0;
      if (!(ls >> wr >> wl)) fail("expected 'weights <w_rule> <w_lm>'");
      m.set_weights({wr, wl});
      have_weights = true;
    } else if (kw == "rule") {
      std::string id;
      std::uint64_t g = 0, b = 0;
      if (!(ls >> id >> g >> b)) fail("expected 'rule <id> <g> <b>'");
      m.set_rule_counts(id, {g, b});
    } else if (kw == "triple") {
      std::string triple_text;
      std::uint64_t g = 0, b = 0;
      if (!(ls >> triple_text >> g >> b))
        fail("expected 'triple (<l>,<rel>,<r>) <g> <b>'");
      m.set_triple_counts(parse_triple(triple_text), {g, b});
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  if (!have_weights)
    throw Error(ErrorCode::Syntax, "model file has no weights line");
  return m;
}

PreferenceModel PreferenceModel::load_file(const std::string& path) {
  return parse(read_text_file(path));
}

void PreferenceModel::save_file(const std::string& path) const {
  write_text_file(path, format());
}

// ---------------------------------------------------------------------------
// Training

PreferenceModel train(const AnnotatedCorpus& corpus, const RoleTable& roles,
                      Weights weights, bool strict) {
  if (corpus.empty())
    throw Error(ErrorCode::EmptyCorpus, "training corpus is empty");
  PreferenceModel m(weights);

  for (const AnnotatedUtterance& u : corpus.utterances) {
    // Feature presence sets per judged candidate.
    struct Feats {
      bool acceptable = false;
      std::set<std::string> rules;
      std::set<Triple> triples;
    };
    std::vector<Feats> judged;
    for (const CorpusCandidate& c : u.candidates) {
      if (c.judgment == Judgment::Unjudged) {
        if (strict)
          throw Error(ErrorCode::UnannotatedCandidate,
                      "utterance " + u.id + " has an unjudged candidate");
        continue;
      }
      Feats f;
      f.acceptable = c.judgment == Judgment::Acceptable;
      f.rules.insert(c.rules.begin(), c.rules.end());
      for (const auto& [t, n] : extract_triples(c.qlf, roles))
        f.triples.insert(t);
      judged.push_back(std::move(f));
    }

    for (std::size_t i = 0; i < judged.size(); ++i) {
      for (std::size_t j = i + 1; j < judged.size(); ++j) {
        if (judged[i].acceptable == judged[j].acceptable) continue;
        const Feats& good = judged[i].acceptable ? judged[i] : judged[j];
        const Feats& bad = judged[i].acceptable ? judged[j] : judged[i];
        for (const auto& r : good.rules)
          if (!bad.rules.count(r)) m.add_rule_counts(r, true);
        for (const auto& r : bad.rules)
          if (!good.rules.count(r)) m.add_rule_counts(r, false);
        for (const auto& t : good.triples)
          if (!bad.triples.count(t)) m.add_triple_counts(t, true);
        for (const auto& t : bad.triples)
          if (!good.triples.count(t)) m.add_triple_counts(t, false);
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Scoring

double score_candidate(const Candidate& c, const PreferenceModel& m) {
  double rule_sum = 0.0;
  for (const std::string& r : c.rules) rule_sum += m.rule_score(r);
  double lm_sum = 0.0;
  for (const auto& [t, n] : c.triples) lm_sum += n * m.triple_score(t);
  return m.weights().rule * rule_sum + m.weights().lm * lm_sum;
}

double score_assignment(const TransferResult& r, const Assignment& a,
                        const std::vector<ConditionalTriple>& cts,
                        const PreferenceModel& m) {
  check_full_assignment(r.packed, a);
  double rule_sum = 0.0;
  for (const RuleEvent& e : r.events)
    if (conditions_satisfied(e.conditions, a)) rule_sum += m.rule_score(e.rule_id);
  double lm_sum = 0.0;
  for (const ConditionalTriple& ct : cts)
    if (conditions_satisfied(ct.conditions, a)) lm_sum += m.triple_score(ct.triple);
  return m.weights().rule * rule_sum + m.weights().lm * lm_sum;
}

// ---------------------------------------------------------------------------
// k-best selection

namespace {

Candidate materialize(const TransferResult& r,
                      const std::vector<ConditionalTriple>& cts,
                      const Assignment& a, double score,
                      const PostPhase& post) {
  QlfNode tree = apply_assignment(r.packed, a);
  if (post.rewrites || post.ppclass) {
    static const RewriteRules no_rewrites;
    static const PpClassTable no_classes;
    tree = post_transfer(tree,
                         post.rewrites ? *post.rewrites : no_rewrites,
                         post.ppclass ? *post.ppclass : no_classes);
  }
  Candidate c{std::move(tree), rule_bag_for_assignment(r, a),
              satisfied_triples(cts, a), score};
  return c;
}

// Restricts a beam assignment (which pins every choice id) to the choices
// actually reachable under its own selections.
Assignment restrict_to_reachable(const QlfNode& packed, const Assignment& a) {
  Assignment out;
  struct Walker {
    const Assignment& a;
    Assignment& out;
    void walk(const QlfNode& n) {
      if (n.kind() == NodeKind::Choice) {
        int idx = a.at(n.choice_id());
        out[n.choice_id()] = idx;
        walk(n.kids()[idx]);
        return;
      }
      for (const QlfNode& k : n.kids()) walk(k);
    }
  } w{a, out};
  w.walk(packed);
  return out;
}

// Partial-assignment score over features whose conditions are fully
// decided; not admissible, used only for beam pruning.
double partial_score(const TransferResult& r,
                     const std::vector<ConditionalTriple>& cts,
                     const PreferenceModel& m, const Assignment& partial) {
  auto decided = [&](const std::map<int, int>& conds) {
    for (const auto& [id, idx] : conds)
      if (!partial.count(id)) return false;
    return true;
  };
  double rule_sum = 0.0;
  for (const RuleEvent& e : r.events)
    if (decided(e.conditions) && conditions_satisfied(e.conditions, partial))
      rule_sum += m.rule_score(e.rule_id);
  double lm_sum = 0.0;
  for (const ConditionalTriple& ct : cts)
    if (decided(ct.conditions) && conditions_satisfied(ct.conditions, partial))
      lm_sum += m.triple_score(ct.triple);
  return m.weights().rule * rule_sum + m.weights().lm * lm_sum;
}

}  // namespace

KBestResult kbest_select(const TransferResult& r, const RoleTable& roles,
                         const PreferenceModel& m, std::size_t k,
                         const BeamConfig& cfg, const PostPhase& post) {
  std::vector<ConditionalTriple> cts =
      extract_conditional_triples(r.packed, roles);
  KBestResult result;

  std::uint64_t total = count_unpackings(r.packed);
  if (total <= cfg.exhaustive_limit) {
    auto all = enumerate_unpackings(r.packed, cfg.exhaustive_limit);
    std::vector<std::pair<double, const Assignment*>> scored;
    scored.reserve(all.size());
    for (auto& [a, tree] : all)
      scored.emplace_back(score_assignment(r, a, cts, m), &a);
    // Enumeration order is lexicographic, so a stable sort by descending
    // score breaks ties lexicographically.
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& x, const auto& y) {
                       return x.first > y.first;
                     });
    std::size_t n = std::min(k, scored.size());
    for (std::size_t i = 0; i < n; ++i) {
      Candidate c =
          materialize(r, cts, *scored[i].second, scored[i].first, post);
      result.items.push_back({std::move(c), scored[i].first});
    }
    return result;
  }

  // Beam search: decide choices in ascending id order; every id is pinned,
  // then assignments are restricted to their reachable choices.
  result.exact = false;
  std::vector<std::pair<int, int>> choices = collect_choices(r.packed);
  std::sort(choices.begin(), choices.end());
  std::vector<Assignment> beam = {{}};
  for (const auto& [id, size] : choices) {
    std::vector<std::pair<double, Assignment>> expanded;
    expanded.reserve(beam.size() * static_cast<std::size_t>(size));
    for (const Assignment& a : beam) {
      for (int idx = 0; idx < size; ++idx) {
        Assignment next = a;
        next[id] = idx;
        double s = partial_score(r, cts, m, next);
        expanded.emplace_back(s, std::move(next));
      }
    }
    std::stable_sort(expanded.begin(), expanded.end(),
                     [](const auto& x, const auto& y) {
                       if (x.first != y.first) return x.first > y.first;
                       return x.second < y.second;
                     });
    if (expanded.size() > cfg.beam_width) expanded.resize(cfg.beam_width);
    beam.clear();
    for (auto& [s, a] : expanded) beam.push_back(std::move(a));
  }

  std::vector<std::pair<double, Assignment>> finals;
  std::set<Assignment> seen;
  for (const Assignment& full : beam) {
    Assignment a = restrict_to_reachable(r.packed, full);
    if (!seen.insert(a).second) continue;
    finals.emplace_back(score_assignment(r, a, cts, m), std::move(a));
  }
  std::stable_sort(finals.begin(), finals.end(),
                   [](const auto& x, const auto& y) {
                     if (x.first != y.first) return x.first > y.first;
                     return x.second < y.second;
                   });
  std::size_t n = std::min(k, finals.size());
  for (std::size_t i = 0; i < n; ++i) {
    Candidate c = materialize(r, cts, finals[i].second, finals[i].first, post);
    result.items.push_back({std::move(c), finals[i].first});
  }
  return result;
}

}  // namespace xfer
