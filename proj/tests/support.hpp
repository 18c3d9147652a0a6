// Shared test helpers: deterministic RNG, random tree generators, fixtures.

#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "xfer/qlf.hpp"

namespace testsupport {

// splitmix64; deterministic across platforms, unlike <random> distributions.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  int range(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }
};

inline std::string fixture_path(const std::string& name) {
  return std::string(XFER_FIXTURE_DIR) + "/" + name;
}

// Random packed-tree generator. Places choice nodes at arbitrary positions
// (determiners, form labels, predication heads, whole terms, list items) so
// the packed/plain equivalence properties get exercised at every shape.
struct TreeGen {
  Rng& rng;
  int max_choices;
  int choices_made = 0;
  int next_choice_id = 1;
  int var_counter = 0;

  TreeGen(Rng& r, int max_c) : rng(r), max_choices(max_c) {}

  std::string fresh_var() { return "X" + std::to_string(++var_counter); }

  xfer::QlfNode atom_from(const std::vector<std::string>& pool) {
    return xfer::QlfNode::atom(pool[rng.below(pool.size())]);
  }

  // Wraps `make()` results in a choice node with probability `p`.
  template <typename F>
  xfer::QlfNode maybe_choice(double p, F make) {
    if (choices_made < max_choices && rng.chance(p)) {
      ++choices_made;
      int id = next_choice_id++;
      int n = rng.range(2, 3);
      std::vector<xfer::QlfNode> alts;
      alts.reserve(n);
      for (int i = 0; i < n; ++i) alts.push_back(make());
      return xfer::QlfNode::choice(id, std::move(alts));
    }
    return make();
  }

  xfer::QlfNode gen_det() {
    static const std::vector<std::string> dets = {
        "def_plur", "indef_plur", "bare_plur", "def_sing", "bare_sing",
        "part_sing", "a"};
    return maybe_choice(0.5, [&] { return atom_from(dets); });
  }

  xfer::QlfNode gen_noun() {
    static const std::vector<std::string> nouns = {"vol1", "escale1", "lundi1",
                                                   "repas1", "transport1"};
    return atom_from(nouns);
  }

  xfer::QlfNode gen_label() {
    static const std::vector<std::string> preps = {"sur", "avec", "pour",
                                                   "sans", "a_bord_de"};
    auto make = [&]() -> xfer::QlfNode {
      if (rng.chance(0.3)) return xfer::QlfNode::atom("temporal_np");
      return xfer::QlfNode::apply("prep", {atom_from(preps)});
    };
    return maybe_choice(0.4, make);
  }

  xfer::QlfNode gen_term(int depth) {
    std::string var = fresh_var();
    // Head predication, possibly with a packed head symbol.
    xfer::QlfNode head = maybe_choice(0.3, [&] { return gen_noun(); });
    std::vector<xfer::QlfNode> conjuncts;
    conjuncts.push_back(xfer::QlfNode::atom("and"));
    conjuncts.push_back(
        xfer::QlfNode::list({std::move(head), xfer::QlfNode::objvar(var)}));
    int mods = depth > 0 ? rng.range(0, 2) : 0;
    for (int i = 0; i < mods; ++i) conjuncts.push_back(gen_form(depth - 1));
    xfer::QlfNode body = conjuncts.size() == 2
                             ? conjuncts[1]
                             : xfer::QlfNode::list(std::move(conjuncts));
    return xfer::QlfNode::apply(
        "term", {gen_det(), xfer::QlfNode::abs(var, std::move(body))});
  }

  xfer::QlfNode gen_form(int depth) {
    auto make = [&] {
      return xfer::QlfNode::apply("form", {gen_label(), gen_term(depth)});
    };
    return maybe_choice(0.2, make);
  }

  xfer::QlfNode gen_clause(int depth) {
    static const std::vector<std::string> verbs = {"aller1", "partir1",
                                                   "indiquer1"};
    std::vector<xfer::QlfNode> conjuncts;
    conjuncts.push_back(xfer::QlfNode::atom("and"));
    xfer::QlfNode verb = maybe_choice(0.3, [&] { return atom_from(verbs); });
    conjuncts.push_back(
        xfer::QlfNode::list({std::move(verb), xfer::QlfNode::objvar("E")}));
    if (rng.chance(0.6)) {
      std::vector<xfer::QlfNode> pred;
      pred.push_back(atom_from(verbs));
      pred.push_back(xfer::QlfNode::objvar("E"));
      pred.push_back(gen_term(depth));
      conjuncts.push_back(xfer::QlfNode::list(std::move(pred)));
    }
    int mods = rng.range(0, 2);
    for (int i = 0; i < mods; ++i) conjuncts.push_back(gen_form(depth));
    return xfer::QlfNode::list(std::move(conjuncts));
  }

  xfer::QlfNode gen(int depth = 2) {
    if (rng.chance(0.3)) return gen_term(depth);
    return gen_clause(depth);
  }
};

inline xfer::QlfNode random_packed_tree(Rng& rng, int max_choices) {
  TreeGen g(rng, max_choices);
  return g.gen();
}

}  // namespace testsupport

#include "xfer/transfer.hpp"

namespace testsupport {

struct TransferFixture {
  xfer::QlfNode source;
  xfer::RuleSet rules;
};

// Random plain source plus a random rule set mixing unambiguous and
// ambiguous lexical rules with optional structural rules (which exercise
// tr(...) recursion and nested choices).
inline TransferFixture random_transfer_fixture(Rng& rng) {
  TreeGen gen(rng, 0);  // choice-free source
  xfer::QlfNode source = gen.gen(2);

  std::ostringstream rules_text;
  int serial = 0;
  auto emit = [&](const std::string& lhs, const std::string& rhs) {
    rules_text << "rule r" << serial++ << ": " << lhs << " => " << rhs
               << ".\n";
  };

  const std::vector<std::string> dets = {"def_plur", "indef_plur", "bare_plur",
                                         "def_sing", "bare_sing", "part_sing",
                                         "a"};
  const std::vector<std::string> nouns = {"vol1", "escale1", "lundi1",
                                          "repas1", "transport1"};
  const std::vector<std::string> verbs = {"aller1", "partir1", "indiquer1"};
  const std::vector<std::string> preps = {"sur", "avec", "pour", "sans",
                                          "a_bord_de"};
  const std::vector<std::string> out_dets = {"da", "db", "dc", "dd"};
  const std::vector<std::string> out_words = {"wa", "wb", "wc", "wd", "we"};
  const std::vector<std::string> out_preps = {"pa", "pb", "pc"};

  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[rng.below(pool.size())];
  };

  for (const auto& d : dets)
    if (rng.chance(0.7)) {
      int n = rng.range(1, 3);
      for (int i = 0; i < n; ++i) emit(d, pick(out_dets));
    }
  for (const auto& w : nouns)
    if (rng.chance(0.7)) {
      int n = rng.range(1, 2);
      for (int i = 0; i < n; ++i) emit(w, pick(out_words));
    }
  for (const auto& v : verbs)
    if (rng.chance(0.5)) emit(v, pick(out_words));
  for (const auto& p : preps)
    if (rng.chance(0.7)) {
      int n = rng.range(1, 3);
      for (int i = 0; i < n; ++i) {
        std::string rhs = rng.chance(0.25)
                              ? std::string("temporal_np")
                              : "prep(" + pick(out_preps) + ")";
        emit("prep(" + p + ")", rhs);
      }
    }
  if (rng.chance(0.4)) emit("form(@l,@t)", "form(tr(@l),tr(@t))");
  if (rng.chance(0.25)) emit("form(@l,@t)", "wrap(tr(@t),tr(@l))");

  return {std::move(source), xfer::load_rules(rules_text.str())};
}

}  // namespace testsupport

#include "xfer/model.hpp"

namespace testsupport {

// A preference model over (a random subset of) the features a transfer
// result can produce, with random counts.
inline xfer::PreferenceModel random_model_for(
    const xfer::TransferResult& r,
    const std::vector<xfer::ConditionalTriple>& cts, Rng& rng,
    xfer::Weights weights = {1.0, 1.0}) {
  xfer::PreferenceModel m(weights);
  for (const xfer::RuleEvent& e : r.events)
    if (rng.chance(0.8))
      m.set_rule_counts(e.rule_id, {rng.below(12), rng.below(12)});
  for (const xfer::ConditionalTriple& ct : cts)
    if (rng.chance(0.8))
      m.set_triple_counts(ct.triple, {rng.below(12), rng.below(12)});
  return m;
}

}  // namespace testsupport
