// xfer: hybrid rule/statistical transfer at the logical-form level.
//
// Subcommands: transfer (alias nbest), train, evaluate, annotate, synth.
// Exit codes: 0 success, 1 usage, 2 input error, 3 pipeline error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xfer/harness.hpp"

namespace {

using namespace xfer;

Weights parse_weights(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos)
    throw Error(ErrorCode::Syntax,
                "weights must be written <w_rule>,<w_lm>: " + text);
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::Syntax, "bad weights value: " + text);
  }
}

struct TransferArgs {
  std::string rules_path;
  std::string codes_path;    // --pre
  std::string rewrites_path; // --rw
  std::string ppclass_path;
  std::string roles_path;
  std::string model_path;
  std::size_t k = 5;
  std::string input_path;
};

int run_transfer(const TransferArgs& args) {
  RuleSet rules;
  if (!args.rules_path.empty()) rules = load_rules_file(args.rules_path);
  RewriteRules rewrites;
  if (!args.rewrites_path.empty())
    rewrites = load_rewrites_file(args.rewrites_path);
  CodeTable codes;
  if (!args.codes_path.empty()) codes = CodeTable::load_file(args.codes_path);
  PpClassTable ppclass;
  if (!args.ppclass_path.empty())
    ppclass = PpClassTable::load_file(args.ppclass_path);
  RoleTable roles;
  if (!args.roles_path.empty()) roles = RoleTable::load_file(args.roles_path);
  PreferenceModel model;
  if (!args.model_path.empty())
    model = PreferenceModel::load_file(args.model_path);

  Pipeline pipeline{&rules, &rewrites, &codes, &ppclass, &roles};
  for (const QlfNode& source : load_qlf_file(args.input_path)) {
    std::cout << "% source: " << print_qlf(source) << "\n";
    for (const Candidate& c :
         generate_candidates(source, pipeline, model, args.k)) {
      char score[32];
      std::snprintf(score, sizeof score, "%.6f", c.score);
      std::cout << score << "\t" << print_qlf(c.qlf) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unification-based transfer with trainable preferences"};
  app.require_subcommand(1);

  // transfer / nbest
  TransferArgs targs;
  auto add_transfer = [&](CLI::App* cmd) {
    cmd->add_option("--rules", targs.rules_path, "transfer rule file");
    cmd->add_option("--pre", targs.codes_path,
                    "code-shape table for pre-transfer coercion");
    cmd->add_option("--rw", targs.rewrites_path, "pre/post rewrite file");
    cmd->add_option("--ppclass", targs.ppclass_path, "PP class table");
    cmd->add_option("--roles", targs.roles_path, "role table");
    cmd->add_option("--model", targs.model_path, "preference model");
    cmd->add_option("-k", targs.k, "number of candidates");
    cmd->add_option("input", targs.input_path, "source QLF file")->required();
  };
  CLI::App* cmd_transfer =
      app.add_subcommand("transfer", "transfer source QLFs, print k best");
  add_transfer(cmd_transfer);
  CLI::App* cmd_nbest =
      app.add_subcommand("nbest", "alias of transfer");
  add_transfer(cmd_nbest);

  // train
  std::string corpus_path, roles_path, out_path, weights_text = "1,1";
  CLI::App* cmd_train =
      app.add_subcommand("train", "train preferences from a judged corpus");
  cmd_train->add_option("--corpus", corpus_path, "annotated corpus")
      ->required();
  cmd_train->add_option("--roles", roles_path, "role table");
  cmd_train->add_option("--weights", weights_text, "w_rule,w_lm");
  cmd_train->add_option("-o", out_path, "output model file")->required();

  // evaluate
  int folds = 5;
  std::uint64_t eval_seed = 42;
  CLI::App* cmd_eval =
      app.add_subcommand("evaluate", "cross-validated accuracy report");
  cmd_eval->add_option("--corpus", corpus_path, "annotated corpus")
      ->required();
  cmd_eval->add_option("--roles", roles_path, "role table");
  cmd_eval->add_option("--weights", weights_text, "w_rule,w_lm");
  cmd_eval->add_option("--folds", folds, "cross-validation folds");
  cmd_eval->add_option("--seed", eval_seed, "shuffle seed");

  // annotate
  CLI::App* cmd_annotate =
      app.add_subcommand("annotate", "judge candidates interactively");
  cmd_annotate->add_option("--corpus", corpus_path, "corpus to annotate")
      ->required();

  // synth
  SynthConfig synth_cfg;
  std::string planted_out;
  CLI::App* cmd_synth =
      app.add_subcommand("synth", "generate a synthetic judged corpus");
  cmd_synth->add_option("--seed", synth_cfg.seed, "generator seed");
  cmd_synth->add_option("--n", synth_cfg.n_utterances, "utterance count");
  cmd_synth->add_option("--noise", synth_cfg.noise_rate, "label noise rate");
  cmd_synth->add_option("--planted", synth_cfg.n_planted_preferences,
                        "planted collocation preferences");
  cmd_synth->add_option("--k", synth_cfg.k, "candidates per utterance");
  cmd_synth->add_option("--verbs", synth_cfg.n_verbs, "verb vocabulary");
  cmd_synth->add_option("--nouns", synth_cfg.n_nouns, "noun vocabulary");
  cmd_synth->add_option("--preps", synth_cfg.n_preps,
                        "preposition vocabulary");
  cmd_synth->add_option("-o", out_path, "output corpus file")->required();
  cmd_synth->add_option("--planted-model", planted_out,
                        "also write the planted model here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (cmd_transfer->parsed() || cmd_nbest->parsed()) return run_transfer(targs);

    if (cmd_train->parsed()) {
      AnnotatedCorpus corpus = load_corpus_file(corpus_path);
      RoleTable roles;
      if (!roles_path.empty()) roles = RoleTable::load_file(roles_path);
      PreferenceModel m = train(corpus, roles, parse_weights(weights_text));
      m.save_file(out_path);
      std::cout << "trained " << m.rule_table().size() << " rule and "
                << m.triple_table().size() << " triple features -> "
                << out_path << "\n";
      return 0;
    }

    if (cmd_eval->parsed()) {
      AnnotatedCorpus corpus = load_corpus_file(corpus_path);
      RoleTable roles;
      if (!roles_path.empty()) roles = RoleTable::load_file(roles_path);
      EvalReport report = evaluate(corpus, roles, parse_weights(weights_text),
                                   folds, eval_seed);
      std::cout << format_eval_report(report);
      return 0;
    }

    if (cmd_annotate->parsed()) {
      AnnotatedCorpus corpus = load_corpus_file(corpus_path);
      AnnotatedCorpus judged = annotate_interactive(
          corpus, std::cin, std::cout,
          [&](const AnnotatedCorpus& c) { save_corpus_file(c, corpus_path); });
      save_corpus_file(judged, corpus_path);
      return 0;
    }

    if (cmd_synth->parsed()) {
      SynthOutput out = synth_corpus(synth_cfg);
      save_corpus_file(out.corpus, out_path);
      std::cout << "wrote " << out.corpus.size() << " utterances -> "
                << out_path << "\n";
      if (!planted_out.empty()) {
        out.planted.save_file(planted_out);
        std::cout << "planted model -> " << planted_out << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "xfer: " << e.what() << "\n";
    return e.is_input_error() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "xfer: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
