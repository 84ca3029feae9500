#include <bit>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "semcap/corpus.hpp"
#include "semcap/error.hpp"
#include "semcap/index.hpp"

namespace semcap {

namespace {

template <typename U>
void put_le(std::ostream& out, U value) {
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(buf, sizeof(U));
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U))) {
    throw ParseError(std::string("truncated matrix file while reading ") + what);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(buf[i]) << (8 * i);
  return value;
}

void expect_magic(std::istream& in, const char (&magic)[4]) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw ParseError("bad magic: expected \"" + std::string(magic, 4) + "\"");
  }
}

}  // namespace

void write_binary_matrix(std::ostream& out, const EmbeddingMatrix& matrix,
                         std::span<const std::string> ids) {
  if (ids.size() != matrix.count()) {
    throw Error(std::to_string(ids.size()) + " ids for " + std::to_string(matrix.count()) +
                " rows");
  }
  for (const auto& id : ids) {
    if (id.find('\n') != std::string::npos) {
      throw Error("id contains a newline: manifest is line-delimited");
    }
  }
  if (matrix.dim() > std::numeric_limits<std::uint32_t>::max()) throw Error("dim exceeds u32");

  out.write(kMatrixMagic, 4);
  put_le<std::uint16_t>(out, kMatrixVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  put_le<std::uint64_t>(out, matrix.count());
  for (float x : matrix.values()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  for (const auto& id : ids) out << id << '\n';
  if (!out) throw Error("write failed");
}

LabeledMatrix read_binary_matrix(std::istream& in) {
  expect_magic(in, kMatrixMagic);
  const auto version = get_le<std::uint16_t>(in, "version");
  if (version != kMatrixVersion) {
    throw ParseError("unsupported matrix format version " + std::to_string(version));
  }
  const std::size_t dim = get_le<std::uint32_t>(in, "dim");
  const std::uint64_t count = get_le<std::uint64_t>(in, "count");
  if (count > 0 && dim == 0) throw ParseError("matrix has rows but dim 0");

  std::vector<float> values;
  // Grow as bytes arrive so a corrupt count cannot trigger a huge allocation.
  for (std::uint64_t i = 0; i < count * dim; ++i) {
    values.push_back(std::bit_cast<float>(get_le<std::uint32_t>(in, "payload")));
  }

  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id;
    if (!std::getline(in, id) || in.eof()) {
      throw ParseError("manifest ended after " + std::to_string(i) + " of " +
                       std::to_string(count) + " ids");
    }
    ids.push_back(std::move(id));
  }
  return LabeledMatrix{EmbeddingMatrix(dim, std::move(values)), std::move(ids)};
}

void write_index(std::ostream& out, const SearchIndex& index) {
  write_binary_matrix(out, index.matrix(), index.ids());
  out.write(kNormsMagic, 4);
  for (double n : index.matrix().norms()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(n));
  if (!out) throw Error("write failed");
}

SearchIndex read_index(std::istream& in) {
  LabeledMatrix labeled = read_binary_matrix(in);
  expect_magic(in, kNormsMagic);
  std::vector<double> norms;
  norms.reserve(labeled.matrix.count());
  for (std::size_t i = 0; i < labeled.matrix.count(); ++i) {
    norms.push_back(std::bit_cast<double>(get_le<std::uint64_t>(in, "norms")));
  }
  const std::size_t dim = labeled.matrix.dim();
  std::vector<float> values(labeled.matrix.values().begin(), labeled.matrix.values().end());
  return SearchIndex(EmbeddingMatrix(dim, std::move(values), std::move(norms)),
                     std::move(labeled.ids));
}

}  // namespace semcap
