// Candidate generation, annotation, evaluation, synthetic corpora.

#include "xfer/harness.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <sstream>

namespace xfer {

// ---------------------------------------------------------------------------
// Candidate generation

std::vector<Candidate> generate_candidates(const QlfNode& source,
                                           const Pipeline& pipeline,
                                           const PreferenceModel& seed_model,
                                           std::size_t k,
                                           const BeamConfig& cfg) {
  static const RuleSet no_rules;
  static const RewriteRules no_rewrites;
  static const CodeTable no_codes;
  static const RoleTable no_roles;

  const RuleSet& rules = pipeline.rules ? *pipeline.rules : no_rules;
  const RewriteRules& rewrites =
      pipeline.rewrites ? *pipeline.rewrites : no_rewrites;
  const CodeTable& codes = pipeline.codes ? *pipeline.codes : no_codes;
  const RoleTable& roles = pipeline.roles ? *pipeline.roles : no_roles;

  QlfNode prepared = pre_transfer(source, rewrites, codes);
  TransferResult result = transfer(rules, prepared);
  PostPhase post{pipeline.rewrites, pipeline.ppclass};
  KBestResult best = kbest_select(result, roles, seed_model, k, cfg, post);

  std::vector<Candidate> out;
  out.reserve(best.items.size());
  for (auto& item : best.items) {
    item.candidate.score = item.score;
    out.push_back(std::move(item.candidate));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interactive annotation

AnnotatedCorpus annotate_interactive(
    AnnotatedCorpus corpus, std::istream& in, std::ostream& out,
    const std::function<void(const AnnotatedCorpus&)>& checkpoint) {
  for (AnnotatedUtterance& u : corpus.utterances) {
    for (std::size_t i = 0; i < u.candidates.size(); ++i) {
      CorpusCandidate& c = u.candidates[i];
      if (c.judgment != Judgment::Unjudged) continue;
      out << "utt " << u.id << "  candidate " << (i + 1) << "/"
          << u.candidates.size() << "\n";
      out << "source:\n  " << pretty_qlf(u.source) << "\n";
      out << "candidate:\n  " << pretty_qlf(c.qlf) << "\n";
      for (;;) {
        out << "judge [y=acceptable n=unacceptable s=skip q=quit]? "
            << std::flush;
        std::string reply;
        if (!(in >> reply)) return corpus;  // end of input saves and stops
        if (reply == "y" || reply == "n") {
          c.judgment =
              reply == "y" ? Judgment::Acceptable : Judgment::Unacceptable;
          if (checkpoint) checkpoint(corpus);
          break;
        }
        if (reply == "s") break;
        if (reply == "q") return corpus;
        out << "unrecognized input '" << reply << "'\n";
      }
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64); <random> distributions are not
// reproducible across standard libraries.

namespace {

struct Rng {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation

namespace {

// Highest-scoring stored candidate (ties keep the earliest).
std::size_t model_argmax(const AnnotatedUtterance& u, const RoleTable& roles,
                         const PreferenceModel& m) {
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < u.candidates.size(); ++i) {
    const CorpusCandidate& c = u.candidates[i];
    Candidate cand{c.qlf, c.rules, extract_triples(c.qlf, roles), 0.0};
    double s = score_candidate(cand, m);
    if (i == 0 || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

EvalReport evaluate(const AnnotatedCorpus& corpus, const RoleTable& roles,
                    Weights weights, int folds, std::uint64_t rng_seed) {
  if (folds < 2)
    throw Error(ErrorCode::TooFewUtterances, "need at least 2 folds");
  if (corpus.size() < static_cast<std::size_t>(folds))
    throw Error(ErrorCode::TooFewUtterances,
                "corpus has " + std::to_string(corpus.size()) +
                    " utterances, need at least " + std::to_string(folds));

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng{rng_seed};
  rng.shuffle(order);

  EvalReport report;
  report.n_analyzed = static_cast<int>(corpus.size());
  double baseline_sum = 0.0;

  for (int f = 0; f < folds; ++f) {
    std::size_t lo = corpus.size() * static_cast<std::size_t>(f) /
                     static_cast<std::size_t>(folds);
    std::size_t hi = corpus.size() * static_cast<std::size_t>(f + 1) /
                     static_cast<std::size_t>(folds);

    AnnotatedCorpus training;
    for (std::size_t i = 0; i < corpus.size(); ++i)
      if (i < lo || i >= hi)
        training.utterances.push_back(corpus.utterances[order[i]]);
    PreferenceModel m = train(training, roles, weights);

    FoldReport fold;
    fold.index = f + 1;
    fold.n_analyzed = static_cast<int>(hi - lo);
    double fold_baseline_sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const AnnotatedUtterance& u = corpus.utterances[order[i]];
      int acceptable = 0;
      for (const CorpusCandidate& c : u.candidates)
        if (c.judgment == Judgment::Acceptable) ++acceptable;
      if (acceptable == 0) continue;
      fold.n_eligible += 1;
      fold_baseline_sum += static_cast<double>(acceptable) /
                           static_cast<double>(u.candidates.size());
      std::size_t pick = model_argmax(u, roles, m);
      if (u.candidates[pick].judgment == Judgment::Acceptable)
        fold.n_correct += 1;
    }
    fold.accuracy = fold.n_eligible
                        ? static_cast<double>(fold.n_correct) / fold.n_eligible
                        : 0.0;
    fold.baseline = fold.n_eligible ? fold_baseline_sum / fold.n_eligible : 0.0;
    report.n_with_acceptable_in_topk += fold.n_eligible;
    report.n_model_correct += fold.n_correct;
    baseline_sum += fold_baseline_sum;
    report.per_fold.push_back(fold);
  }

  report.accuracy = report.n_with_acceptable_in_topk
                        ? static_cast<double>(report.n_model_correct) /
                              report.n_with_acceptable_in_topk
                        : 0.0;
  report.baseline_expected = report.n_with_acceptable_in_topk
                                 ? baseline_sum /
                                       report.n_with_acceptable_in_topk
                                 : 0.0;
  return report;
}

std::string format_eval_report(const EvalReport& report) {
  std::ostringstream os;
  auto fixed4 = [&](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const FoldReport& f : report.per_fold)
    os << "fold " << f.index << ": " << f.n_correct << "/" << f.n_eligible
       << " baseline " << fixed4(f.baseline) << "\n";
  os << "aggregate: " << report.n_model_correct << "/"
     << report.n_with_acceptable_in_topk << " accuracy "
     << fixed4(report.accuracy) << " baseline "
     << fixed4(report.baseline_expected) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

std::string num_name(const std::string& stem, int i) {
  return stem + std::to_string(i);
}

}  // namespace

SynthOutput synth_corpus(const SynthConfig& cfg) {
  if (cfg.noise_rate >= 0.5)
    throw Error(ErrorCode::Syntax,
                "noise_rate must stay below 0.5 for the planted signal "
                "to dominate");
  Rng rng{cfg.seed};

  // Vocabulary and the ambiguous rule set. Every English preposition gets
  // 2-3 French alternatives; the sole English determiner gets 2.
  std::ostringstream rules_text;
  std::vector<int> prep_alts(cfg.n_preps);
  for (int p = 0; p < cfg.n_preps; ++p) {
    prep_alts[p] = 2 + static_cast<int>(rng.below(2));
    for (int a = 0; a < prep_alts[p]; ++a)
      rules_text << "rule p" << p << "_" << a << ": prep(" << num_name("ep", p)
                 << ") => prep(" << num_name("fp", p) << "_" << a << ").\n";
  }
  rules_text << "rule det_0: ed => fd0.\n";
  rules_text << "rule det_1: ed => fd1.\n";
  for (int v = 0; v < cfg.n_verbs; ++v)
    rules_text << "rule v" << v << ": " << num_name("ev", v) << " => "
               << num_name("fv", v) << ".\n";
  for (int n = 0; n < cfg.n_nouns; ++n)
    rules_text << "rule n" << n << ": " << num_name("en", n) << " => "
               << num_name("fn", n) << ".\n";
  RuleSet rules = load_rules(rules_text.str());

  // Planted preferences. Determiner choice is keyed by noun; preposition
  // choice by (preposition, dependent noun), with every possible governor
  // entered so the preference shows up whatever the clause head is.
  PreferenceModel planted({1.0, 1.0});
  std::vector<std::string> governors;
  for (int v = 0; v < cfg.n_verbs; ++v) governors.push_back(num_name("fv", v));
  for (int n = 0; n < cfg.n_nouns; ++n) governors.push_back(num_name("fn", n));

  std::vector<int> det_pref(cfg.n_nouns);
  for (int n = 0; n < cfg.n_nouns; ++n) {
    det_pref[n] = static_cast<int>(rng.below(2));
    planted.set_triple_counts(
        {"fd" + std::to_string(det_pref[n]), "det", num_name("fn", n)},
        {15, 1});
    planted.set_triple_counts(
        {"fd" + std::to_string(1 - det_pref[n]), "det", num_name("fn", n)},
        {1, 15});
  }

  std::vector<std::pair<int, int>> grid;
  for (int p = 0; p < cfg.n_preps; ++p)
    for (int n = 0; n < cfg.n_nouns; ++n) grid.emplace_back(p, n);
  rng.shuffle(grid);
  int planted_count =
      std::min<int>(cfg.n_planted_preferences, static_cast<int>(grid.size()));
  for (int i = 0; i < planted_count; ++i) {
    auto [p, n] = grid[i];
    int correct = static_cast<int>(rng.below(prep_alts[p]));
    for (int a = 0; a < prep_alts[p]; ++a) {
      std::string label = num_name("fp", p) + "_" + std::to_string(a);
      Counts counts = a == correct ? Counts{15, 1} : Counts{1, 15};
      for (const std::string& gov : governors)
        planted.set_triple_counts({gov, label, num_name("fn", n)}, counts);
    }
  }

  // Sources, candidates, annotations.
  PreferenceModel uniform_seed({1.0, 1.0});
  Pipeline pipeline;
  pipeline.rules = &rules;
  RoleTable roles;

  SynthOutput out;
  out.rules = rules;
  for (int i = 0; i < cfg.n_utterances; ++i) {
    int verb = static_cast<int>(rng.below(cfg.n_verbs));
    int noun = static_cast<int>(rng.below(cfg.n_nouns));
    int prep = static_cast<int>(rng.below(cfg.n_preps));
    int noun2 = static_cast<int>(rng.below(cfg.n_nouns));
    std::string source_text;
    if (rng.unit() < 0.6) {
      source_text = "[and,[" + num_name("ev", verb) + ",E],form(prep(" +
                    num_name("ep", prep) + "),term(ed,X^[" +
                    num_name("en", noun) + ",X]))]";
    } else {
      source_text = "term(ed,C^[and,[" + num_name("en", noun2) +
                    ",C],form(prep(" + num_name("ep", prep) + "),term(ed,X^[" +
                    num_name("en", noun) + ",X]))])";
    }
    QlfNode source = parse_qlf(source_text);
    std::vector<Candidate> cands = generate_candidates(
        source, pipeline, uniform_seed, static_cast<std::size_t>(cfg.k));

    // Argmax under the planted model decides acceptability.
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      double s = score_candidate(cands[c], planted);
      if (c == 0 || s > best_score) {
        best = c;
        best_score = s;
      }
    }

    AnnotatedUtterance u{num_name("u", i + 1), source, {}};
    for (std::size_t c = 0; c < cands.size(); ++c) {
      bool acceptable = c == best;
      if (rng.unit() < cfg.noise_rate) acceptable = !acceptable;
      u.candidates.push_back({cands[c].qlf,
                              acceptable ? Judgment::Acceptable
                                         : Judgment::Unacceptable,
                              cands[c].rules});
    }
    out.corpus.utterances.push_back(std::move(u));
  }
  out.planted = std::move(planted);
  return out;
}

}  // namespace xfer
