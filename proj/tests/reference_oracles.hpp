// Test-only reference implementations used as independent oracles.
//
// `unpacked_transfer` runs the transfer algorithm without packing: every
// multi-rule match multiplies out into explicit candidates, each carrying
// its own rule bag. Results are compared against the packed engine after
// alpha-canonicalization (the two paths allocate fresh variables in
// different orders).

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "xfer/qlf.hpp"
#include "xfer/transfer.hpp"

namespace testsupport {

struct UnpackedCandidate {
  xfer::QlfNode tree;
  std::vector<std::string> bag;  // sorted rule ids, with multiplicity
};

namespace detail {

using xfer::Bindings;
using xfer::NodeKind;
using xfer::QlfNode;
using xfer::RuleSet;

struct PartialResult {
  QlfNode tree;
  std::vector<std::string> bag;
};

inline std::vector<PartialResult> unpacked_rec(const RuleSet& rules,
                                               const QlfNode& n, int depth);

inline std::vector<PartialResult> cross_children(
    const RuleSet& rules, const std::vector<QlfNode>& kids, int depth) {
  std::vector<std::pair<std::vector<QlfNode>, std::vector<std::string>>>
      combos = {{{}, {}}};
  for (const QlfNode& k : kids) {
    auto options = unpacked_rec(rules, k, depth);
    decltype(combos) next;
    for (auto& [ks, bag] : combos) {
      for (auto& opt : options) {
        auto nk = ks;
        nk.push_back(opt.tree);
        auto nb = bag;
        nb.insert(nb.end(), opt.bag.begin(), opt.bag.end());
        next.push_back({std::move(nk), std::move(nb)});
      }
    }
    combos = std::move(next);
  }
  std::vector<PartialResult> out;
  for (auto& [ks, bag] : combos)
    out.push_back({QlfNode::list(std::move(ks)), std::move(bag)});
  return out;
}

// Instantiates a target pattern; tr(@x) positions multiply out recursively.
inline std::vector<PartialResult> instantiate_unpacked(const RuleSet& rules,
                                                       const QlfNode& t,
                                                       const Bindings& b,
                                                       int depth) {
  switch (t.kind()) {
    case NodeKind::MetaVar:
      return {{b.meta.at(t.name()), {}}};
    case NodeKind::TransferCall:
      return unpacked_rec(rules, b.meta.at(t.name()), depth);
    case NodeKind::Atom:
      return {{t, {}}};
    case NodeKind::ObjVar: {
      auto it = b.vars.find(t.name());
      return {{QlfNode::objvar(it != b.vars.end() ? it->second : t.name()),
               {}}};
    }
    case NodeKind::Abs: {
      auto it = b.vars.find(t.name());
      std::string var = it != b.vars.end() ? it->second : t.name();
      std::vector<PartialResult> out;
      for (auto& body : instantiate_unpacked(rules, t.body(), b, depth))
        out.push_back({QlfNode::abs(var, std::move(body.tree)),
                       std::move(body.bag)});
      return out;
    }
    default: {  // Apply / List
      auto parts = [&] {
        std::vector<std::vector<PartialResult>> per_kid;
        for (const QlfNode& k : t.kids())
          per_kid.push_back(instantiate_unpacked(rules, k, b, depth));
        return per_kid;
      }();
      std::vector<std::pair<std::vector<QlfNode>, std::vector<std::string>>>
          combos = {{{}, {}}};
      for (auto& options : parts) {
        decltype(combos) next;
        for (auto& [ks, bag] : combos)
          for (auto& opt : options) {
            auto nk = ks;
            nk.push_back(opt.tree);
            auto nb = bag;
            nb.insert(nb.end(), opt.bag.begin(), opt.bag.end());
            next.push_back({std::move(nk), std::move(nb)});
          }
        combos = std::move(next);
      }
      std::vector<PartialResult> out;
      for (auto& [ks, bag] : combos) {
        QlfNode rebuilt = t.kind() == NodeKind::Apply
                              ? QlfNode::apply(t.name(), std::move(ks))
                              : QlfNode::list(std::move(ks));
        out.push_back({std::move(rebuilt), std::move(bag)});
      }
      return out;
    }
  }
}

inline std::vector<PartialResult> unpacked_rec(const RuleSet& rules,
                                               const QlfNode& n, int depth) {
  if (depth > 256)
    throw xfer::Error(xfer::ErrorCode::RecursionDepthExceeded,
                      "reference transfer exceeded depth");
  std::vector<std::pair<const xfer::TransferRule*, Bindings>> matches;
  for (const auto& r : rules.rules())
    if (auto b = xfer::match_pattern(r.source, n))
      matches.emplace_back(&r, std::move(*b));

  if (!matches.empty()) {
    std::vector<PartialResult> out;
    for (auto& [rule, b] : matches) {
      for (auto& res :
           instantiate_unpacked(rules, rule->target, b, depth + 1)) {
        res.bag.push_back(rule->id);
        out.push_back(std::move(res));
      }
    }
    return out;
  }

  switch (n.kind()) {
    case NodeKind::Atom:
    case NodeKind::ObjVar:
      return {{n, {}}};
    case NodeKind::Abs: {
      std::vector<PartialResult> out;
      for (auto& body : unpacked_rec(rules, n.body(), depth + 1))
        out.push_back(
            {QlfNode::abs(n.name(), std::move(body.tree)), std::move(body.bag)});
      return out;
    }
    case NodeKind::Apply: {
      auto lists = cross_children(rules, n.kids(), depth + 1);
      for (auto& r : lists) {
        std::vector<QlfNode> kids = r.tree.kids();
        r.tree = QlfNode::apply(n.name(), std::move(kids));
      }
      return lists;
    }
    case NodeKind::List:
      return cross_children(rules, n.kids(), depth + 1);
    default:
      throw xfer::Error(xfer::ErrorCode::Syntax, "unexpected choice node");
  }
}

}  // namespace detail

inline std::vector<UnpackedCandidate> unpacked_transfer(
    const xfer::RuleSet& rules, const xfer::QlfNode& source) {
  std::vector<UnpackedCandidate> out;
  for (auto& r : detail::unpacked_rec(rules, source, 0)) {
    std::sort(r.bag.begin(), r.bag.end());
    out.push_back({std::move(r.tree), std::move(r.bag)});
  }
  return out;
}

// Canonical comparison key: alpha-canonical print plus the sorted bag.
inline std::vector<std::pair<std::string, std::vector<std::string>>>
candidate_multiset(const std::vector<UnpackedCandidate>& cands) {
  std::vector<std::pair<std::string, std::vector<std::string>>> keys;
  keys.reserve(cands.size());
  for (const auto& c : cands)
    keys.emplace_back(xfer::print_qlf(xfer::alpha_canonical(c.tree)), c.bag);
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace testsupport
