// Semantic-triple extraction: (head, relation, head-or-determiner) features
// from plain QLFs, and condition-annotated triples from packed QLFs.
//
// Emission rules, mirrored exactly by the plain and packed paths:
//   * every term(Det, V^Body) contributes (Det, det, Head) once, where Head
//     is the predicate of the first one-place predication [P,V] over the
//     bound variable (and-lists searched left to right);
//   * a relation instance with governor head G, label L and dependent term
//     signature (D, N) contributes (G, L, N) and (G, L, D). Instances come
//     from predication arguments [P, ..., term, ...] (label via RoleTable),
//     and from form(prep(P), term) / form(temporal_np, term) modifiers
//     (governor = signature head of the enclosing term, or the first
//     predication head of the enclosing conjunction).
//
// Role table file: lines `role <pred>/<arity> <position> <label>`;
// unlisted positions label as `arg<position>`.

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "xfer/qlf.hpp"

namespace xfer {

struct Triple {
  std::string left;
  std::string relation;
  std::string right;

  bool operator==(const Triple&) const = default;
  auto operator<=>(const Triple&) const = default;
};

std::string print_triple(const Triple& t);          // (left,relation,right)
Triple parse_triple(std::string_view text);

// Multiset of triples as a counted map.
using TripleBag = std::map<Triple, int>;

struct ConditionalTriple {
  Triple triple;
  std::map<int, int> conditions;

  bool operator==(const ConditionalTriple&) const = default;
};

class RoleTable {
 public:
  void set(const std::string& pred, int arity, int position,
           const std::string& label);
  std::string label_for(const std::string& pred, int arity,
                        int position) const;
  static RoleTable load(std::string_view text);
  static RoleTable load_file(const std::string& path);

 private:
  std::map<std::tuple<std::string, int, int>, std::string> labels_;
};

// (determiner, head) of a term(Det, V^Body); throws NoHeadPredicate.
std::pair<std::string, std::string> term_signature(const QlfNode& t);

// Plain extraction; q must be choice-free. Nodes without a head predicate
// are skipped and reported through `diagnostics` when given.
TripleBag extract_triples(const QlfNode& q, const RoleTable& roles,
                          std::vector<Diagnostic>* diagnostics = nullptr);

// Packed extraction: for every full assignment a, the satisfied triples
// equal extract_triples(apply_assignment(packed, a)) as a multiset. The
// local choice cross-product per relation instance is bounded by
// `expansion_limit` (throws ExpansionLimitExceeded).
std::vector<ConditionalTriple> extract_conditional_triples(
    const QlfNode& packed, const RoleTable& roles,
    std::uint64_t expansion_limit = 1024,
    std::vector<Diagnostic>* diagnostics = nullptr);

// Satisfied conditional triples as a bag.
TripleBag satisfied_triples(const std::vector<ConditionalTriple>& cts,
                            const Assignment& a);

}  // namespace xfer
