// The transfer preference model: discriminant scores over transfer-rule
// and semantic-triple features, trained from judged candidate pairs, and
// candidate selection over packed transfer results.
//
// Model file (`.model`):
//   weights <w_rule> <w_lm>
//   rule <id> <g> <b>
//   triple (<l>,<rel>,<r>) <g> <b>
// Scores are recomputed from the counts on load, never stored.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "xfer/corpus.hpp"
#include "xfer/qlf.hpp"
#include "xfer/rewrite.hpp"
#include "xfer/transfer.hpp"
#include "xfer/triples.hpp"

namespace xfer {

struct Counts {
  std::uint64_t good = 0;
  std::uint64_t bad = 0;

  bool operator==(const Counts&) const = default;
};

// Signed log-scale reliability of a feature:
//   log2(2(g+1)/(g+b+2))   if g < b
//   0                      if g = b
//   -log2(2(b+1)/(g+b+2))  if g > b
double discriminant(Counts c);

struct Weights {
  double rule = 1.0;
  double lm = 1.0;
};

class PreferenceModel {
 public:
  PreferenceModel() = default;
  explicit PreferenceModel(Weights w) : weights_(w) {}

  const Weights& weights() const { return weights_; }
  void set_weights(Weights w) { weights_ = w; }

  void add_rule_counts(const std::string& id, bool good, std::uint64_t n = 1);
  void add_triple_counts(const Triple& t, bool good, std::uint64_t n = 1);
  void set_rule_counts(const std::string& id, Counts c);
  void set_triple_counts(const Triple& t, Counts c);

  // Unknown features score 0.
  double rule_score(const std::string& id) const;
  double triple_score(const Triple& t) const;

  const std::map<std::string, Counts>& rule_table() const { return rules_; }
  const std::map<Triple, Counts>& triple_table() const { return triples_; }

  std::string format() const;
  static PreferenceModel parse(std::string_view text);
  static PreferenceModel load_file(const std::string& path);
  void save_file(const std::string& path) const;

 private:
  std::map<std::string, Counts> rules_;
  std::map<Triple, Counts> triples_;
  Weights weights_;
};

// Trains discriminant counts from all candidate pairs with exactly one
// acceptable member; features are counted by presence ("used in exactly one
// of the pair"), not multiplicity. Candidates judged `?` are excluded; in
// strict mode their presence is an error.
PreferenceModel train(const AnnotatedCorpus& corpus, const RoleTable& roles,
                      Weights weights, bool strict = false);

// A materialized (unpacked) transfer candidate with its features.
struct Candidate {
  QlfNode qlf;
  std::vector<std::string> rules;  // sorted bag
  TripleBag triples;
  double score = 0.0;
};

// w_rule * sum of rule scores + w_lm * sum of triple scores, both with bag
// multiplicity.
double score_candidate(const Candidate& c, const PreferenceModel& m);

// Same value computed on the packed form, without materializing the tree.
double score_assignment(const TransferResult& r, const Assignment& a,
                        const std::vector<ConditionalTriple>& cts,
                        const PreferenceModel& m);

struct BeamConfig {
  std::uint64_t exhaustive_limit = 10000;
  std::size_t beam_width = 32;
};

// Post-transfer pass applied to materialized candidates (optional).
struct PostPhase {
  const RewriteRules* rewrites = nullptr;
  const PpClassTable* ppclass = nullptr;
};

struct ScoredCandidate {
  Candidate candidate;
  double score = 0.0;
};

struct KBestResult {
  std::vector<ScoredCandidate> items;  // score-descending
  bool exact = true;                   // false when found by beam search
};

// Top-k candidates of a packed transfer result. Exhaustive (exact) when the
// unpacking count is within cfg.exhaustive_limit, otherwise beam search over
// choice ids in ascending order, scoring partial assignments by their
// satisfied-so-far features. Ties break lexicographically by assignment.
KBestResult kbest_select(const TransferResult& r, const RoleTable& roles,
                         const PreferenceModel& m, std::size_t k,
                         const BeamConfig& cfg = {},
                         const PostPhase& post = {});

}  // namespace xfer
