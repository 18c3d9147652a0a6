// Corpus file parsing and canonical formatting.

#include "xfer/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace xfer {

char judgment_mark(Judgment j) {
  switch (j) {
    case Judgment::Acceptable: return '+';
    case Judgment::Unacceptable: return '-';
    case Judgment::Unjudged: return '?';
  }
  return '?';
}

Judgment judgment_from_mark(char mark) {
  switch (mark) {
    case '+': return Judgment::Acceptable;
    case '-': return Judgment::Unacceptable;
    case '?': return Judgment::Unjudged;
  }
  throw Error(ErrorCode::Syntax,
              std::string("unknown judgment mark '") + mark + "'");
}

AnnotatedCorpus load_corpus(std::string_view text) {
  AnnotatedCorpus corpus;
  std::set<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;

  AnnotatedUtterance* current = nullptr;
  bool have_source = false;
  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::Syntax,
                "corpus line " + std::to_string(lineno) + ": " + what);
  };
  auto finish = [&]() {
    if (!current) return;
    if (!have_source) fail("utterance " + current->id + " has no source");
    if (current->candidates.empty())
      fail("utterance " + current->id + " has no candidates");
    current = nullptr;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto cut = line.find('%'); cut != std::string::npos) line.erase(cut);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) {
      finish();
      continue;
    }
    if (kw == "utt") {
      finish();
      std::string id;
      if (!(ls >> id)) fail("expected 'utt <id>'");
      if (!ids.insert(id).second)
        throw Error(ErrorCode::DuplicateUtteranceId,
                    "duplicate utterance id: " + id);
      corpus.utterances.push_back({id, QlfNode::atom("missing_source"), {}});
      current = &corpus.utterances.back();
      have_source = false;
      continue;
    }
    if (!current) fail("'" + kw + "' outside an utterance block");
    std::string rest;
    std::getline(ls, rest);
    if (kw == "source") {
      current->source = parse_qlf(rest);
      have_source = true;
    } else if (kw == "cand") {
      std::istringstream cs(rest);
      std::string mark;
      cs >> mark;
      if (mark.size() != 1) fail("expected 'cand <+|-|?> <qlf>'");
      std::string qlf_text;
      std::getline(cs, qlf_text);
      current->candidates.push_back(
          {parse_qlf(qlf_text), judgment_from_mark(mark[0]), {}});
    } else if (kw == "rules") {
      if (current->candidates.empty())
        fail("'rules' line before any candidate");
      std::istringstream rs(rest);
      std::string id;
      auto& bag = current->candidates.back().rules;
      while (rs >> id) bag.push_back(id);
      std::sort(bag.begin(), bag.end());
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  finish();
  return corpus;
}

AnnotatedCorpus load_corpus_file(const std::string& path) {
  return load_corpus(read_text_file(path));
}

std::string format_corpus(const AnnotatedCorpus& corpus) {
  std::string out;
  bool first = true;
  for (const AnnotatedUtterance& u : corpus.utterances) {
    if (!first) out += "\n";
    first = false;
    out += "utt " + u.id + "\n";
    out += "source " + print_qlf(u.source) + "\n";
    for (const CorpusCandidate& c : u.candidates) {
      out += "cand ";
      out += judgment_mark(c.judgment);
      out += ' ';
      out += print_qlf(c.qlf);
      out += '\n';
      if (!c.rules.empty()) {
        out += "rules";
        std::vector<std::string> sorted = c.rules;
        std::sort(sorted.begin(), sorted.end());
        for (const std::string& r : sorted) out += " " + r;
        out += '\n';
      }
    }
  }
  return out;
}

void save_corpus_file(const AnnotatedCorpus& corpus, const std::string& path) {
  write_text_file(path, format_corpus(corpus));
}

}  // namespace xfer
