// End-to-end harness: candidate generation, interactive annotation,
// cross-validated evaluation, and synthetic-corpus construction.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "xfer/corpus.hpp"
#include "xfer/model.hpp"

namespace xfer {

struct Pipeline {
  const RuleSet* rules = nullptr;
  const RewriteRules* rewrites = nullptr;
  const CodeTable* codes = nullptr;
  const PpClassTable* ppclass = nullptr;
  const RoleTable* roles = nullptr;
};

// pre_transfer -> transfer -> k-best under the seed model -> post_transfer.
// Returned candidates are score-descending and carry their rule bags.
std::vector<Candidate> generate_candidates(const QlfNode& source,
                                           const Pipeline& pipeline,
                                           const PreferenceModel& seed_model,
                                           std::size_t k,
                                           const BeamConfig& cfg = {});

// Prompts for every unjudged candidate: y (acceptable), n (unacceptable),
// s (skip), q (stop). `checkpoint` runs after each recorded judgment so an
// interrupted session keeps its work.
AnnotatedCorpus annotate_interactive(
    AnnotatedCorpus corpus, std::istream& in, std::ostream& out,
    const std::function<void(const AnnotatedCorpus&)>& checkpoint = {});

struct FoldReport {
  int index = 0;        // 1-based
  int n_analyzed = 0;   // held-out utterances
  int n_eligible = 0;   // with >= 1 acceptable stored candidate
  int n_correct = 0;    // model argmax acceptable
  double accuracy = 0.0;
  double baseline = 0.0;  // expected accuracy of uniform random choice
};

struct EvalReport {
  int n_analyzed = 0;
  int n_with_acceptable_in_topk = 0;
  int n_model_correct = 0;
  double accuracy = 0.0;
  double baseline_expected = 0.0;
  std::vector<FoldReport> per_fold;
};

// Shuffles by rng_seed, splits into `folds` near-equal parts, trains on the
// complement of each fold and scores its held-out utterances.
EvalReport evaluate(const AnnotatedCorpus& corpus, const RoleTable& roles,
                    Weights weights, int folds, std::uint64_t rng_seed);

// One `fold i: correct/eligible baseline b` line per fold plus an
// aggregate line; fixed 4-decimal formatting.
std::string format_eval_report(const EvalReport& report);

struct SynthConfig {
  std::uint64_t seed = 42;
  int n_utterances = 500;
  int n_verbs = 3;
  int n_nouns = 4;
  int n_preps = 2;
  // Planted (preposition, noun) collocation preferences; capped at the
  // vocabulary grid.
  int n_planted_preferences = 8;
  double noise_rate = 0.05;  // must stay below 0.5
  int k = 5;
};

struct SynthOutput {
  AnnotatedCorpus corpus;
  PreferenceModel planted;
  RuleSet rules;
};

// Deterministic toy corpus: sources over a small vocabulary, an ambiguous
// rule set, candidates from a uniform seed model, and annotations from the
// planted model's argmax with label noise.
SynthOutput synth_corpus(const SynthConfig& cfg);

}  // namespace xfer
