#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semcap/corpus.hpp"
#include "semcap/index.hpp"
#include "semcap/selector.hpp"

namespace semcap {

struct QueryParams {
  std::size_t k = 10;
  Metric metric = Metric::Cosine;
  StopwordList stopwords = StopwordList::bundled();
  /// Database image left out of the neighbor set, for leave-one-out runs.
  std::optional<std::string> exclude_id;
};

struct CaptionResult {
  std::string caption;
  NeighborList neighbors;
  std::size_t corpus_size = 0;
  CullTrace trace;
  /// Fewer than k neighbors were available.
  bool shortfall = false;
};

/// Retrieve neighbors, bag their captions (neighbor order, then caption
/// order), and select one. Throws Error when the index and dataset are not
/// row-aligned or the query is rejected by knn.
CaptionResult caption(const SearchIndex& index, const Dataset& dataset,
                      std::span<const float> query, const QueryParams& params);

struct BatchQuery {
  std::string id;
  std::vector<float> embedding;
};

/// Element-wise equal to calling caption() in order. Queries run on up to
/// `threads` workers (0 = hardware concurrency). With `exclude_matching_ids`,
/// a query whose id is also a database id leaves that row out. The first
/// failing query, by position, aborts the batch with its position in the
/// message.
std::vector<CaptionResult> batch_caption(const SearchIndex& index, const Dataset& dataset,
                                         std::span<const BatchQuery> queries,
                                         const QueryParams& params, bool exclude_matching_ids = false,
                                         unsigned threads = 0);

/// F1 between the distinct non-stop tokens of `hypothesis` and the union of
/// the references' distinct non-stop tokens. 0 when either side is empty.
double eval_unigram_f1(std::string_view hypothesis, std::span<const std::string> references,
                       const StopwordList& stopwords);

}  // namespace semcap
