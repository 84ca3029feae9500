#include "semcap/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "semcap/error.hpp"
#include "semcap/tokenize.hpp"

namespace semcap {

using nlohmann::json;

double l2_norm(std::span<const float> v) noexcept {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

namespace {

void check_shape(std::size_t dim, const std::vector<float>& values) {
  if (dim == 0 && !values.empty()) throw ParseError("embedding dimension must be positive");
  if (dim != 0 && values.size() % dim != 0) {
    throw ParseError("embedding payload of " + std::to_string(values.size()) +
                     " floats is not a multiple of dim " + std::to_string(dim));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ParseError("non-finite value in row " + std::to_string(i / dim) + ", column " +
                       std::to_string(i % dim));
    }
  }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<float> values)
    : dim_(dim), values_(std::move(values)) {
  check_shape(dim_, values_);
  count_ = dim_ == 0 ? 0 : values_.size() / dim_;
  norms_.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) norms_.push_back(l2_norm(row(i)));
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<float> values,
                                 std::vector<double> norms)
    : dim_(dim), values_(std::move(values)), norms_(std::move(norms)) {
  check_shape(dim_, values_);
  count_ = dim_ == 0 ? 0 : values_.size() / dim_;
  if (norms_.size() != count_) {
    throw ParseError("expected " + std::to_string(count_) + " norms, got " +
                     std::to_string(norms_.size()));
  }
  for (std::size_t i = 0; i < count_; ++i) {
    const double expected = l2_norm(row(i));
    if (std::abs(norms_[i] - expected) > 1e-6 * expected) {
      throw ParseError("stored norm of row " + std::to_string(i) + " does not match its values");
    }
  }
}

Dataset make_dataset(std::vector<ImageRecord> records, EmbeddingMatrix embeddings) {
  if (records.size() != embeddings.count()) {
    throw ParseError(std::to_string(records.size()) + " records but " +
                     std::to_string(embeddings.count()) + " embedding rows");
  }
  std::unordered_set<std::string> seen;
  for (const auto& record : records) {
    if (record.id.empty()) throw ParseError("empty image id");
    if (!seen.insert(record.id).second) throw ParseError("duplicate id \"" + record.id + "\"");
    if (record.captions.empty()) throw ParseError("image \"" + record.id + "\" has no captions");
    for (const auto& c : record.captions) {
      if (tokenize(c).empty()) {
        throw ParseError("image \"" + record.id + "\" has a caption with no words: \"" + c + "\"");
      }
    }
  }
  return Dataset{std::move(records), std::move(embeddings)};
}

namespace {

std::vector<std::string> read_captions(const json& value, std::size_t line) {
  if (!value.is_array()) throw ParseError("\"captions\" must be an array of strings", line);
  if (value.empty()) throw ParseError("empty captions array", line);
  std::vector<std::string> captions;
  captions.reserve(value.size());
  for (const auto& c : value) {
    if (!c.is_string()) throw ParseError("\"captions\" must be an array of strings", line);
    captions.push_back(c.get<std::string>());
  }
  return captions;
}

}  // namespace

Dataset parse_jsonl(std::istream& in) {
  std::vector<ImageRecord> records;
  std::vector<float> values;
  std::size_t dim = 0;
  std::unordered_set<std::string> seen;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;

    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line);

    auto id = obj.find("id");
    if (id == obj.end() || !id->is_string()) throw ParseError("missing string field \"id\"", line);
    auto emb = obj.find("embedding");
    if (emb == obj.end() || !emb->is_array()) {
      throw ParseError("missing array field \"embedding\"", line);
    }
    auto caps = obj.find("captions");
    if (caps == obj.end()) throw ParseError("missing array field \"captions\"", line);

    ImageRecord record;
    record.id = id->get<std::string>();
    if (record.id.empty()) throw ParseError("empty image id", line);
    if (!seen.insert(record.id).second) {
      throw ParseError("duplicate id \"" + record.id + "\"", line);
    }
    record.captions = read_captions(*caps, line);
    for (const auto& c : record.captions) {
      if (tokenize(c).empty()) throw ParseError("caption with no words: \"" + c + "\"", line);
    }

    if (emb->empty()) throw ParseError("empty embedding", line);
    if (records.empty()) {
      dim = emb->size();
    } else if (emb->size() != dim) {
      throw ParseError("inconsistent embedding length: expected " + std::to_string(dim) +
                           ", got " + std::to_string(emb->size()),
                       line);
    }
    for (const auto& x : *emb) {
      if (!x.is_number()) throw ParseError("embedding values must be numbers", line);
      const double wide = x.get<double>();
      const auto narrow = static_cast<float>(wide);
      if (!std::isfinite(wide) || !std::isfinite(narrow)) {
        throw ParseError("non-finite embedding value", line);
      }
      values.push_back(narrow);
    }
    records.push_back(std::move(record));
  }
  if (in.bad()) throw ParseError("read error");

  return Dataset{std::move(records), EmbeddingMatrix(dim, std::move(values))};
}

void write_jsonl(std::ostream& out, const Dataset& dataset) {
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& record = dataset.records[i];
    json obj;
    obj["id"] = record.id;
    auto row = dataset.embeddings.row(i);
    // Widened floats print with enough digits to narrow back bit-exactly.
    json emb = json::array();
    for (float x : row) emb.push_back(static_cast<double>(x));
    obj["embedding"] = std::move(emb);
    obj["captions"] = record.captions;
    out << obj.dump() << '\n';
  }
}

Dataset parse_coco_annotations(std::istream& annotations, std::istream& embeddings) {
  json doc;
  try {
    doc = json::parse(annotations);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed annotations JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array() ||
      !doc.contains("annotations") || !doc["annotations"].is_array()) {
    throw ParseError("annotations must have \"images\" and \"annotations\" arrays");
  }

  // COCO ids are integers; manifests hold them as text.
  auto id_text = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw ParseError("image ids must be integers or strings");
  };

  // Per-image captions are ordered by annotation id (entries without one go
  // last, by text) so the result does not depend on annotation file order.
  struct Caption {
    bool missing_id;
    std::int64_t ann_id;
    std::string text;
    auto operator<=>(const Caption&) const = default;
  };
  std::map<std::string, std::vector<Caption>> captions;
  for (const auto& image : doc["images"]) {
    if (!image.is_object() || !image.contains("id")) throw ParseError("image entry without \"id\"");
    auto [it, inserted] = captions.try_emplace(id_text(image["id"]));
    if (!inserted) throw ParseError("duplicate image id " + it->first + " in annotations");
  }
  for (const auto& ann : doc["annotations"]) {
    if (!ann.is_object() || !ann.contains("image_id") || !ann.contains("caption") ||
        !ann["caption"].is_string()) {
      throw ParseError("annotation entries need \"image_id\" and string \"caption\"");
    }
    const auto id = id_text(ann["image_id"]);
    auto it = captions.find(id);
    if (it == captions.end()) throw ParseError("annotation refers to unknown image id " + id);
    const bool has_id = ann.contains("id") && ann["id"].is_number_integer();
    it->second.push_back(Caption{!has_id, has_id ? ann["id"].get<std::int64_t>() : 0,
                                 ann["caption"].get<std::string>()});
  }

  LabeledMatrix labeled = read_binary_matrix(embeddings);
  std::unordered_set<std::string> in_manifest(labeled.ids.begin(), labeled.ids.end());
  for (const auto& [id, caps] : captions) {
    if (!in_manifest.contains(id)) {
      throw ParseError("image id " + id + " is in the annotations but not in the embedding manifest");
    }
  }

  std::vector<ImageRecord> records;
  records.reserve(labeled.ids.size());
  for (const auto& id : labeled.ids) {
    auto it = captions.find(id);
    if (it == captions.end()) {
      throw ParseError("image id " + id + " is in the embedding manifest but not in the annotations");
    }
    if (it->second.empty()) throw ParseError("image id " + id + " has no captions");
    std::sort(it->second.begin(), it->second.end());
    ImageRecord record{id, {}};
    for (auto& c : it->second) record.captions.push_back(std::move(c.text));
    records.push_back(std::move(record));
  }
  return make_dataset(std::move(records), std::move(labeled.matrix));
}

}  // namespace semcap
