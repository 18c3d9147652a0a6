// Unit tests for rule loading, pattern matching, and packing transfer.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "reference_oracles.hpp"
#include "support.hpp"
#include "xfer/transfer.hpp"

using namespace xfer;
using testsupport::Rng;

namespace {

QlfNode fixture_qlf(const std::string& name) {
  auto qlfs = load_qlf_file(testsupport::fixture_path(name));
  REQUIRE(qlfs.size() == 1);
  return qlfs.front();
}

RuleSet demo_rules() {
  return load_rules_file(testsupport::fixture_path("demo.rules"));
}

// Label of a choice alternative: bare atom, or the argument of prep(...).
std::string alt_label(const QlfNode& alt) {
  if (alt.kind() == NodeKind::Atom) return alt.name();
  if (alt.is_apply("prep", 1) && alt.kids()[0].kind() == NodeKind::Atom)
    return alt.kids()[0].name();
  return print_qlf(alt);
}

const QlfNode* find_choice(const QlfNode& n, int id) {
  if (n.kind() == NodeKind::Choice && n.choice_id() == id) return &n;
  for (const QlfNode& k : n.kids())
    if (const QlfNode* hit = find_choice(k, id)) return hit;
  return nullptr;
}

}  // namespace

TEST_CASE("load_rules: single preposition rule") {
  RuleSet rs = load_rules("rule on_avec: prep(on) => prep(avec).");
  REQUIRE(rs.size() == 1);
  CHECK(rs.rules()[0].id == "on_avec");
  CHECK(rs.rules()[0].source == parse_pattern("prep(on)", false));
  CHECK(rs.rules()[0].target == parse_pattern("prep(avec)", true));
}

TEST_CASE("load_rules: empty file and comments") {
  CHECK(load_rules("").empty());
  CHECK(load_rules("% nothing here\n  \n").empty());
}

TEST_CASE("load_rules: duplicate rule id rejected") {
  try {
    load_rules(
        "rule on_avec: prep(on) => prep(avec).\n"
        "rule on_avec: prep(on) => prep(sur).\n");
    FAIL("expected DuplicateRuleId");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateRuleId);
  }
}

TEST_CASE("load_rules: target meta-variables must be bound") {
  try {
    load_rules("rule bad: prep(on) => prep(@p).");
    FAIL("expected UnboundTargetMeta");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundTargetMeta);
  }
  // tr() is target-side only.
  CHECK_THROWS_AS(load_rules("rule bad: tr(@x) => a."), Error);
  // Missing final period.
  CHECK_THROWS_AS(load_rules("rule a: x => y"), Error);
}

TEST_CASE("match_pattern: bare meta-variable binds anything") {
  auto b = match_pattern(parse_pattern("@d", false), parse_qlf("bare_plur"));
  REQUIRE(b.has_value());
  CHECK(b->meta.at("d") == QlfNode::atom("bare_plur"));
}

TEST_CASE("match_pattern: structured match binds each position") {
  QlfNode pat = parse_pattern("form(prep(@p),@t)", false);
  QlfNode node =
      parse_qlf("form(prep(on),term(bare_sing,E^[monday1,E]))");
  auto b = match_pattern(pat, node);
  REQUIRE(b.has_value());
  CHECK(b->meta.at("p") == QlfNode::atom("on"));
  CHECK(b->meta.at("t") == parse_qlf("term(bare_sing,E^[monday1,E])"));
}

TEST_CASE("match_pattern: atoms match only themselves") {
  CHECK(!match_pattern(parse_pattern("prep(sur)", false),
                       parse_qlf("prep(avec)")));
}

TEST_CASE("match_pattern: repeated meta-variables need equal bindings") {
  QlfNode pat = parse_pattern("f(@x,@x)", false);
  CHECK(match_pattern(pat, parse_qlf("f(g(a),g(a))")).has_value());
  CHECK(!match_pattern(pat, parse_qlf("f(g(a),g(b))")).has_value());
}

TEST_CASE("match_pattern: object variables rename injectively") {
  CHECK(match_pattern(parse_pattern("f(X,X)", false), parse_qlf("f(C,C)"))
            .has_value());
  CHECK(!match_pattern(parse_pattern("f(X,X)", false), parse_qlf("f(C,D)"))
             .has_value());
  CHECK(!match_pattern(parse_pattern("f(X,Y)", false), parse_qlf("f(C,C)"))
             .has_value());
}

TEST_CASE("transfer: empty rule set copies congruently") {
  QlfNode src = fixture_qlf("flights_on_monday.qlf");
  TransferResult r = transfer(RuleSet(), src);
  CHECK(r.events.empty());
  CHECK(alpha_equal(r.packed, src));
  CHECK(collect_choices(r.packed).empty());
}

TEST_CASE("transfer: single lexical rule, fresh variable") {
  RuleSet rs = load_rules("rule flight_vol: flight1 => vol1.");
  TransferResult r = transfer(rs, parse_qlf("[flight1,C]"));
  CHECK(print_qlf(r.packed) == "[vol1,C_1]");
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].rule_id == "flight_vol");
  CHECK(r.events[0].conditions.empty());
}

TEST_CASE("transfer: flights-on-Monday packs as (3,5,2) in file order") {
  TransferResult r = transfer(demo_rules(), fixture_qlf("flights_on_monday.qlf"));

  auto choices = collect_choices(r.packed);
  std::vector<std::pair<int, int>> expected = {{1, 3}, {2, 5}, {3, 2}};
  CHECK(choices == expected);
  CHECK(count_unpackings(r.packed) == 30);

  // Alternative order mirrors the rule file.
  const QlfNode* det1 = find_choice(r.packed, 1);
  const QlfNode* prep = find_choice(r.packed, 2);
  const QlfNode* det2 = find_choice(r.packed, 3);
  REQUIRE(det1);
  REQUIRE(prep);
  REQUIRE(det2);
  std::vector<std::string> det1_labels, prep_labels, det2_labels;
  for (const auto& alt : det1->kids()) det1_labels.push_back(alt_label(alt));
  for (const auto& alt : prep->kids()) prep_labels.push_back(alt_label(alt));
  for (const auto& alt : det2->kids()) det2_labels.push_back(alt_label(alt));
  CHECK(det1_labels ==
        std::vector<std::string>{"def_plur", "indef_plur", "bare_plur"});
  CHECK(prep_labels == std::vector<std::string>{"a_bord_de", "temporal_np",
                                                "sur", "pour", "avec"});
  CHECK(det2_labels == std::vector<std::string>{"def_sing", "bare_sing"});

  // Structurally identical to the hand-written packed reference.
  CHECK(alpha_equal(r.packed, fixture_qlf("packed_ref.qlf")));
  CHECK(print_qlf(r.packed) ==
        "elliptical_np(term(#(1,[def_plur,indef_plur,bare_plur]),C_1^[and,"
        "[vol1,C_1],form(#(2,[prep(a_bord_de),temporal_np,prep(sur),"
        "prep(pour),prep(avec)]),term(#(3,[def_sing,bare_sing]),"
        "E_1^[lundi1,E_1]))]))");

  // The preferred assignment materializes the preferred QLF.
  QlfNode preferred = apply_assignment(r.packed, {{1, 0}, {2, 1}, {3, 0}});
  CHECK(alpha_equal(preferred, fixture_qlf("preferred.qlf")));
}

TEST_CASE("transfer: deterministic, including choice ids and events") {
  RuleSet rs = demo_rules();
  QlfNode src = fixture_qlf("flights_on_monday.qlf");
  TransferResult a = transfer(rs, src);
  TransferResult b = transfer(rs, src);
  CHECK(a.packed == b.packed);
  CHECK(a.events == b.events);
}

TEST_CASE("transfer: source must be choice-free") {
  CHECK_THROWS_AS(transfer(RuleSet(), parse_qlf("f(#(1,[a,b]))")), Error);
}

TEST_CASE("transfer: recursion guard") {
  RuleSet rs = load_rules("rule loop: @x => f(tr(@x)).");
  try {
    transfer(rs, parse_qlf("a"));
    FAIL("expected RecursionDepthExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RecursionDepthExceeded);
  }
}

TEST_CASE("rule_bag_for_assignment: fixture bags") {
  TransferResult r = transfer(demo_rules(), fixture_qlf("flights_on_monday.qlf"));

  auto bag = rule_bag_for_assignment(r, {{1, 0}, {2, 1}, {3, 0}});
  std::vector<std::string> expected = {"bare_plur_def", "bare_sing_def",
                                       "flight_vol", "monday_lundi",
                                       "on_temporal"};
  CHECK(bag == expected);

  // Changing only the preposition choice swaps exactly one member.
  auto bag2 = rule_bag_for_assignment(r, {{1, 0}, {2, 4}, {3, 0}});
  std::vector<std::string> expected2 = {"bare_plur_def", "bare_sing_def",
                                        "flight_vol", "monday_lundi",
                                        "on_avec"};
  CHECK(bag2 == expected2);

  try {
    rule_bag_for_assignment(r, {{1, 0}, {2, 1}});
    FAIL("expected MissingChoice");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingChoice);
  }
}

TEST_CASE("rule_bag_for_assignment: unconditional events are constant") {
  RuleSet rs = load_rules("rule only: flight1 => vol1.");
  TransferResult r = transfer(rs, parse_qlf("[flight1,C]"));
  auto bag = rule_bag_for_assignment(r, {});
  CHECK(bag == std::vector<std::string>{"only"});
}

TEST_CASE("packing soundness against the unpacked reference transfer") {
  Rng rng(7151995);
  int exercised = 0;
  for (int iter = 0; iter < 200; ++iter) {
    auto fx = testsupport::random_transfer_fixture(rng);
    TransferResult r = transfer(fx.rules, fx.source);
    if (collect_choices(r.packed).size() > 10) continue;
    std::uint64_t n = count_unpackings(r.packed);
    if (n > 512) continue;
    ++exercised;

    // Packed side: every assignment's tree plus its rule bag.
    std::vector<testsupport::UnpackedCandidate> packed_side;
    for (auto& [a, tree] : enumerate_unpackings(r.packed, 512))
      packed_side.push_back({tree, rule_bag_for_assignment(r, a)});

    auto reference = testsupport::unpacked_transfer(fx.rules, fx.source);
    CHECK(testsupport::candidate_multiset(packed_side) ==
          testsupport::candidate_multiset(reference));

    // No degenerate choice nodes.
    for (auto& [id, size] : collect_choices(r.packed)) CHECK(size >= 2);
  }
  // The generator must actually produce ambiguous fixtures.
  CHECK(exercised > 100);
}
