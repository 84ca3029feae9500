#include "semcap/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "semcap/error.hpp"

namespace semcap {

CaptionResult caption(const SearchIndex& index, const Dataset& dataset,
                      std::span<const float> query, const QueryParams& params) {
  if (params.k == 0) throw Error("k must be at least 1");
  if (index.size() != dataset.size() || index.dim() != dataset.embeddings.dim()) {
    throw Error("index and dataset do not match: " + std::to_string(index.size()) + " x " +
                std::to_string(index.dim()) + " vs " + std::to_string(dataset.size()) + " x " +
                std::to_string(dataset.embeddings.dim()));
  }

  KnnOptions options;
  if (params.exclude_id) options.exclude_row = index.find(*params.exclude_id);

  CaptionResult result;
  result.neighbors = index.knn(query, params.k, params.metric, options);
  result.shortfall = result.neighbors.size() < params.k;
  if (result.neighbors.empty()) throw Error("no eligible database rows for this query");

  // Captions are bagged in neighbor order; selection itself ignores rank.
  CandidateCorpus corpus;
  for (const auto& n : result.neighbors) {
    const auto& record = dataset.records[n.row];
    if (record.id != index.ids()[n.row]) {
      throw Error("index and dataset disagree on the id of row " + std::to_string(n.row));
    }
    for (const auto& c : record.captions) corpus.add(c);
  }
  result.corpus_size = corpus.size();

  auto selection = select_caption(corpus, params.stopwords);
  result.caption = std::move(selection.caption);
  result.trace = std::move(selection.trace);
  return result;
}

std::vector<CaptionResult> batch_caption(const SearchIndex& index, const Dataset& dataset,
                                         std::span<const BatchQuery> queries,
                                         const QueryParams& params, bool exclude_matching_ids,
                                         unsigned threads) {
  std::vector<CaptionResult> results(queries.size());
  std::vector<std::exception_ptr> errors(queries.size());

  auto run_one = [&](std::size_t i) {
    try {
      const auto& q = queries[i];
      if (exclude_matching_ids && index.find(q.id)) {
        QueryParams own = params;
        own.exclude_id = q.id;
        results[i] = caption(index, dataset, q.embedding, own);
      } else {
        results[i] = caption(index, dataset, q.embedding, params);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, queries.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < queries.size(); i = next++) run_one(i);
      });
    }
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw Error("query " + std::to_string(i) + " (" + queries[i].id + "): " + e.what());
    }
  }
  return results;
}

double eval_unigram_f1(std::string_view hypothesis, std::span<const std::string> references,
                       const StopwordList& stopwords) {
  if (references.empty()) throw Error("eval_unigram_f1 needs at least one reference");

  auto content_words = [&](std::string_view text, std::set<Token>& into) {
    for (auto& t : tokenize(text)) {
      if (!stopwords.contains(t)) into.insert(std::move(t));
    }
  };
  std::set<Token> hyp;
  std::set<Token> ref;
  content_words(hypothesis, hyp);
  for (const auto& r : references) content_words(r, ref);
  if (hyp.empty() || ref.empty()) return 0.0;

  std::size_t overlap = 0;
  for (const auto& t : hyp) overlap += ref.contains(t) ? 1 : 0;
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(hyp.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace semcap
