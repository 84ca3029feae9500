#include "semcap/selector.hpp"

#include <algorithm>
#include <unordered_set>

#include "semcap/error.hpp"

namespace semcap {

CandidateCorpus::CandidateCorpus(std::initializer_list<std::string_view> texts) {
  for (auto t : texts) add(std::string(t));
}

void CandidateCorpus::add(std::string text) {
  auto tokens = tokenize(text);
  if (tokens.empty()) throw Error("candidate sentence has no words: \"" + text + "\"");
  sentences_.push_back(Sentence{std::move(text), std::move(tokens)});
}

std::size_t FrequencyTable::count(std::string_view word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? 0 : it->second.count;
}

bool FrequencyTable::is_stop(std::string_view word) const {
  auto it = entries_.find(word);
  return it != entries_.end() && it->second.stop;
}

std::vector<FrequencyEntry> FrequencyTable::ranked() const {
  std::vector<FrequencyEntry> out;
  out.reserve(entries_.size());
  for (const auto& [word, slot] : entries_) out.push_back({word, slot.count, slot.stop});
  // entries_ is already in ascending word order, so a stable sort on count
  // alone yields (count desc, word asc).
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

std::vector<FrequencyEntry> FrequencyTable::culling_order() const {
  auto out = ranked();
  std::erase_if(out, [](const auto& e) { return e.stop; });
  return out;
}

FrequencyTable build_frequency_table(const CandidateCorpus& corpus, const StopwordList& stopwords) {
  FrequencyTable table;
  for (const auto& sentence : corpus.sentences()) {
    for (const auto& token : sentence.tokens) {
      auto [it, inserted] = table.entries_.try_emplace(token);
      if (inserted) it->second.stop = stopwords.contains(token);
      ++it->second.count;
      ++table.total_;
    }
  }
  return table;
}

std::string_view termination_name(Termination t) noexcept {
  switch (t) {
    case Termination::SingleSurvivor: return "single_survivor";
    case Termination::TieBreak: return "tie_break";
  }
  return "?";
}

Selection cull(const CandidateCorpus& corpus, const FrequencyTable& table) {
  if (corpus.empty()) throw Error("cannot select a caption from an empty corpus");

  const auto& sentences = corpus.sentences();
  std::vector<std::unordered_set<std::string_view>> vocab;
  vocab.reserve(sentences.size());
  std::size_t total = 0;
  for (const auto& s : sentences) {
    vocab.emplace_back(s.tokens.begin(), s.tokens.end());
    total += s.tokens.size();
  }
  if (total != table.total()) throw Error("frequency table was not built from this corpus");

  std::vector<std::size_t> remaining(sentences.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  Selection result;
  auto& trace = result.trace;

  for (const auto& entry : table.culling_order()) {
    if (remaining.size() == 1) break;
    CullStep step{entry.word, entry.count, remaining.size(), remaining.size(), false};
    std::vector<std::size_t> kept;
    for (std::size_t i : remaining) {
      if (vocab[i].contains(entry.word)) kept.push_back(i);
    }
    if (kept.empty()) {
      step.skipped = true;
    } else {
      remaining = std::move(kept);
      step.after = remaining.size();
    }
    trace.steps.push_back(std::move(step));
  }

  std::size_t chosen = remaining.front();
  if (remaining.size() > 1) {
    trace.termination = Termination::TieBreak;
    trace.final_candidates = remaining.size();
    std::size_t best_score = 0;
    bool first = true;
    for (std::size_t i : remaining) {
      std::size_t score = 0;
      for (auto word : vocab[i]) {
        if (!table.is_stop(word)) score += table.count(word);
      }
      // Strictly greater keeps the earliest sentence on a tie.
      if (first || score > best_score) {
        best_score = score;
        chosen = i;
        first = false;
      }
    }
  }

  result.sentence = chosen;
  result.caption = sentences[chosen].text;
  return result;
}

Selection select_caption(const CandidateCorpus& corpus, const StopwordList& stopwords) {
  if (corpus.empty()) throw Error("cannot select a caption from an empty corpus");
  return cull(corpus, build_frequency_table(corpus, stopwords));
}

}  // namespace semcap
