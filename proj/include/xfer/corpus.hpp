// Annotated N-best corpora: source QLF plus judged candidate QLFs.
//
// Corpus file (`.corpus`), one block per utterance, blank-line separated:
//   utt <id>
//   source <qlf>
//   cand <+|-|?> <qlf>
//   rules <rule-id>...        (optional, records the candidate's rule bag)
// `%` starts a comment.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xfer/qlf.hpp"

namespace xfer {

enum class Judgment { Acceptable, Unacceptable, Unjudged };

char judgment_mark(Judgment j);
Judgment judgment_from_mark(char mark);

struct CorpusCandidate {
  QlfNode qlf;
  Judgment judgment = Judgment::Unjudged;
  // Transfer-rule bag (sorted, with multiplicity); empty when unknown.
  std::vector<std::string> rules;
};

struct AnnotatedUtterance {
  std::string id;
  QlfNode source;
  std::vector<CorpusCandidate> candidates;
};

struct AnnotatedCorpus {
  std::vector<AnnotatedUtterance> utterances;

  bool empty() const { return utterances.empty(); }
  std::size_t size() const { return utterances.size(); }
};

AnnotatedCorpus load_corpus(std::string_view text);
AnnotatedCorpus load_corpus_file(const std::string& path);
std::string format_corpus(const AnnotatedCorpus& corpus);
void save_corpus_file(const AnnotatedCorpus& corpus, const std::string& path);

}  // namespace xfer
