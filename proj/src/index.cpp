#include "semcap/index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

#include "semcap/error.hpp"

namespace semcap {

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::Cosine;
  if (name == "l1") return Metric::L1;
  if (name == "l2") return Metric::L2;
  if (name == "linf") return Metric::Linf;
  throw Error("unknown metric \"" + std::string(name) + "\" (expected cosine, l1, l2 or linf)");
}

std::string_view metric_name(Metric metric) noexcept {
  switch (metric) {
    case Metric::Cosine: return "cosine";
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
    case Metric::Linf: return "linf";
  }
  return "?";
}

namespace {

void check_dims(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(got));
  }
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

// Dot product with a query already widened and scaled to unit length.
double dot(std::span<const double> q, std::span<const float> row) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += q[i] * static_cast<double>(row[i]);
  return sum;
}

double l1(std::span<const float> a, std::span<const float> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  }
  return sum;
}

double l2(std::span<const float> a, std::span<const float> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double linf(std::span<const float> a, std::span<const float> b) noexcept {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return worst;
}

double cosine_from_similarity(double similarity) noexcept {
  return std::max(0.0, 1.0 - similarity);
}

}  // namespace

double distance(Metric metric, std::span<const float> a, std::span<const float> b) {
  check_dims(a.size(), b.size());
  switch (metric) {
    case Metric::Cosine: {
      const double na = l2_norm(a);
      const double nb = l2_norm(b);
      if (na == 0.0 || nb == 0.0) throw Error("cosine distance is undefined for a zero-norm vector");
      return cosine_from_similarity(dot(a, b) / (na * nb));
    }
    case Metric::L1: return l1(a, b);
    case Metric::L2: return l2(a, b);
    case Metric::Linf: return linf(a, b);
  }
  throw Error("unknown metric");
}

NeighborList knn(const EmbeddingMatrix& matrix, std::span<const float> query, std::size_t k,
                 Metric metric, const KnnOptions& options) {
  if (k == 0) throw Error("k must be at least 1");
  if (matrix.empty()) throw Error("empty matrix");
  check_dims(matrix.dim(), query.size());

  std::vector<double> unit_query;
  if (metric == Metric::Cosine) {
    const double qn = l2_norm(query);
    if (qn == 0.0) throw Error("query has zero norm; cosine distance is undefined");
    unit_query.reserve(query.size());
    for (float x : query) unit_query.push_back(static_cast<double>(x) / qn);
  }

  // Max-heap on (distance, row): the top is the current worst of the best k.
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> heap;
  NeighborList result;

  for (std::size_t r = 0; r < matrix.count(); ++r) {
    if (options.exclude_row && *options.exclude_row == r) continue;
    const auto row = matrix.row(r);
    double d = 0.0;
    switch (metric) {
      case Metric::Cosine: {
        const double rn = matrix.norm(r);
        if (rn == 0.0) {
          ++result.skipped_zero_norm;
          continue;
        }
        d = cosine_from_similarity(dot(unit_query, row) / rn);
        break;
      }
      case Metric::L1: d = l1(query, row); break;
      case Metric::L2: d = l2(query, row); break;
      case Metric::Linf: d = linf(query, row); break;
    }
    const Entry entry{d, r};
    if (heap.size() < k) {
      heap.push(entry);
    } else if (entry < heap.top()) {
      heap.pop();
      heap.push(entry);
    }
  }

  result.items.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    result.items[i] = Neighbor{heap.top().second, heap.top().first};
    heap.pop();
  }
  return result;
}

SearchIndex::SearchIndex(EmbeddingMatrix matrix, std::vector<std::string> ids)
    : matrix_(std::move(matrix)), ids_(std::move(ids)) {
  if (ids_.size() != matrix_.count()) {
    throw Error(std::to_string(ids_.size()) + " ids for " + std::to_string(matrix_.count()) +
                " rows");
  }
}

std::optional<std::size_t> SearchIndex::find(std::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] == id) return i;
  }
  return std::nullopt;
}

SearchIndex build_index(const Dataset& dataset) {
  std::vector<std::string> ids;
  ids.reserve(dataset.size());
  for (const auto& record : dataset.records) ids.push_back(record.id);
  return SearchIndex(dataset.embeddings, std::move(ids));
}

}  // namespace semcap
