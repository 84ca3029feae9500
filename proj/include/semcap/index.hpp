#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semcap/corpus.hpp"

namespace semcap {

enum class Metric { Cosine, L1, L2, Linf };

/// "cosine", "l1", "l2", "linf". Throws Error on anything else.
Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric) noexcept;

struct Neighbor {
  std::size_t row = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ascending by distance, ties by ascending row. `skipped_zero_norm` counts
/// rows dropped because they cannot be compared under Cosine.
struct NeighborList {
  std::vector<Neighbor> items;
  std::size_t skipped_zero_norm = 0;

  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }
  const Neighbor& operator[](std::size_t i) const noexcept { return items[i]; }
  auto begin() const noexcept { return items.begin(); }
  auto end() const noexcept { return items.end(); }

  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

/// Pairwise distance, accumulated in float64.
///   Cosine: 1 - a.b / (|a||b|), clamped at 0
///   L1: sum |a_i - b_i|;  L2: sqrt(sum (a_i - b_i)^2);  Linf: max |a_i - b_i|
/// Throws Error on dimension mismatch or a zero-norm operand under Cosine.
double distance(Metric metric, std::span<const float> a, std::span<const float> b);

struct KnnOptions {
  /// Row left out of the candidate set (leave-one-out queries).
  std::optional<std::size_t> exclude_row;
};

/// Exact top-k by a single scan with a bounded max-heap. Returns
/// min(k, eligible rows) neighbors. Throws Error on k == 0, an empty matrix,
/// dimension mismatch, or a zero-norm query under Cosine.
NeighborList knn(const EmbeddingMatrix& matrix, std::span<const float> query, std::size_t k,
                 Metric metric, const KnnOptions& options = {});

/// Immutable search structure: the embedding matrix (with its norms) and the
/// row ids. Safe to query from many threads at once.
class SearchIndex {
 public:
  SearchIndex() = default;
  SearchIndex(EmbeddingMatrix matrix, std::vector<std::string> ids);

  const EmbeddingMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return matrix_.count(); }
  std::size_t dim() const noexcept { return matrix_.dim(); }

  /// Row of `id`, if present.
  std::optional<std::size_t> find(std::string_view id) const;

  NeighborList knn(std::span<const float> query, std::size_t k, Metric metric,
                   const KnnOptions& options = {}) const {
    return semcap::knn(matrix_, query, k, metric, options);
  }

 private:
  EmbeddingMatrix matrix_;
  std::vector<std::string> ids_;
};

SearchIndex build_index(const Dataset& dataset);

/// Persistence: the binary matrix format followed by "NRMS" and `count`
/// float64 LE norms.
inline constexpr char kNormsMagic[4] = {'N', 'R', 'M', 'S'};

void write_index(std::ostream& out, const SearchIndex& index);
SearchIndex read_index(std::istream& in);

}  // namespace semcap
