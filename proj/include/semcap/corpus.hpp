#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace semcap {

inline constexpr std::size_t kDefaultEmbeddingDim = 4096;

/// One database image: its id and reference captions.
struct ImageRecord {
  std::string id;
  std::vector<std::string> captions;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Dense row-major float32 store with per-row L2 norms computed at
/// construction. Immutable once built.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Takes ownership of `values` (count * dim floats). Throws ParseError on a
  /// non-finite value or a size that is not a multiple of `dim`.
  EmbeddingMatrix(std::size_t dim, std::vector<float> values);

  /// As above, but adopts persisted norms after checking each one against
  /// the recomputed norm (relative tolerance 1e-6).
  EmbeddingMatrix(std::size_t dim, std::vector<float> values, std::vector<double> norms);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  double norm(std::size_t i) const noexcept { return norms_[i]; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<const double> norms() const noexcept { return norms_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<float> values_;
  std::vector<double> norms_;
};

/// L2 norm with float64 accumulation.
double l2_norm(std::span<const float> v) noexcept;

/// Records row-aligned with an embedding matrix: row i belongs to records[i].
struct Dataset {
  std::vector<ImageRecord> records;
  EmbeddingMatrix embeddings;

  std::size_t size() const noexcept { return records.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Checks the Dataset invariants (alignment, unique non-empty ids, at least
/// one caption per record, every caption tokenizes to something) and returns
/// the assembled dataset. Throws ParseError.
Dataset make_dataset(std::vector<ImageRecord> records, EmbeddingMatrix embeddings);

/// One JSON object per line: {"id": str, "embedding": [num...], "captions": [str...]}.
/// Blank lines are ignored. Errors carry the 1-based line number.
Dataset parse_jsonl(std::istream& in);
void write_jsonl(std::ostream& out, const Dataset& dataset);

/// Joins COCO-style caption annotations ({"images":[{"id"}], "annotations":
/// [{"image_id","caption"}]}) to a binary embedding matrix by image id. Rows
/// follow the matrix manifest; captions keep annotation order per image.
Dataset parse_coco_annotations(std::istream& annotations, std::istream& embeddings);

/// A matrix together with its row ids, as stored in the binary format.
struct LabeledMatrix {
  EmbeddingMatrix matrix;
  std::vector<std::string> ids;
};

/// Binary layout (all little-endian):
///   "SEMC" | u16 version=1 | u32 dim | u64 count | count*dim f32 | manifest
/// where the manifest is `count` lines, each an id followed by '\n'.
inline constexpr char kMatrixMagic[4] = {'S', 'E', 'M', 'C'};
inline constexpr std::uint16_t kMatrixVersion = 1;

void write_binary_matrix(std::ostream& out, const EmbeddingMatrix& matrix,
                         std::span<const std::string> ids);
LabeledMatrix read_binary_matrix(std::istream& in);

}  // namespace semcap
