#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "semcap/tokenize.hpp"

namespace semcap {

/// Words ignored while culling. Membership is exact token equality.
class StopwordList {
 public:
  StopwordList() = default;
  /// Each word is tokenized; anything that is not exactly one token throws.
  StopwordList(std::initializer_list<std::string_view> words);

  /// One token per line, '#' comment lines and blank lines skipped.
  /// A line yielding other than one token is a ParseError.
  static StopwordList parse(std::istream& in);
  static StopwordList load(const std::string& path);

  /// Compiled-in 100-word common-English list.
  static const StopwordList& bundled();

  bool contains(std::string_view token) const;
  void insert(std::string_view word);
  std::size_t size() const noexcept { return words_.size(); }
  const std::set<Token, std::less<>>& words() const noexcept { return words_; }

  friend bool operator==(const StopwordList&, const StopwordList&) = default;

 private:
  std::set<Token, std::less<>> words_;
};

/// Raw text of the bundled list, in the stopword file format.
std::string_view bundled_stopwords_text() noexcept;

struct Sentence {
  std::string text;
  std::vector<Token> tokens;
};

/// Ordered bag of candidate captions. Duplicates are kept.
class CandidateCorpus {
 public:
  CandidateCorpus() = default;
  CandidateCorpus(std::initializer_list<std::string_view> texts);

  /// Throws Error when the text has no tokens.
  void add(std::string text);

  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }

 private:
  std::vector<Sentence> sentences_;
};

struct FrequencyEntry {
  Token word;
  std::size_t count = 0;
  bool stop = false;
};

/// Unigram counts over a corpus, repeated tokens within a sentence counted
/// each time. Built once and read-only afterwards.
class FrequencyTable {
 public:
  std::size_t count(std::string_view word) const;
  bool is_stop(std::string_view word) const;
  std::size_t total() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return entries_.size(); }

  /// All entries, descending count then ascending word.
  std::vector<FrequencyEntry> ranked() const;
  /// ranked() without the stop-flagged entries: the culling word order.
  std::vector<FrequencyEntry> culling_order() const;

 private:
  friend FrequencyTable build_frequency_table(const CandidateCorpus&, const StopwordList&);

  struct Slot {
    std::size_t count = 0;
    bool stop = false;
  };
  std::map<Token, Slot, std::less<>> entries_;
  std::size_t total_ = 0;
};

FrequencyTable build_frequency_table(const CandidateCorpus& corpus, const StopwordList& stopwords);

/// One iteration of the culling loop. `count` is the word's table count at
/// the time it was applied.
struct CullStep {
  Token word;
  std::size_t count = 0;
  std::size_t before = 0;
  std::size_t after = 0;
  bool skipped = false;
};

enum class Termination {
  /// Loop stopped because exactly one sentence remained (includes a
  /// single-sentence corpus).
  SingleSurvivor,
  /// Words ran out with several survivors; the tie-break picked one.
  TieBreak,
};

struct CullTrace {
  std::vector<CullStep> steps;
  Termination termination = Termination::SingleSurvivor;
  /// Survivors the tie-break chose among (1 when it was not needed).
  std::size_t final_candidates = 1;
};

std::string_view termination_name(Termination t) noexcept;

struct Selection {
  std::string caption;
  std::size_t sentence = 0;  // index into the corpus
  CullTrace trace;
};

/// Walks the non-stop words from most to least frequent. A word no remaining
/// sentence contains is skipped; otherwise every sentence lacking it is
/// dropped. Stops at one survivor. If the words run out first, the survivor
/// with the largest summed count over its distinct non-stop tokens wins,
/// earliest in corpus order on a tie.
Selection cull(const CandidateCorpus& corpus, const FrequencyTable& table);

/// build_frequency_table followed by cull.
Selection select_caption(const CandidateCorpus& corpus, const StopwordList& stopwords);

}  // namespace semcap
