#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <random>
#include <sstream>

#include <json.hpp>

#include "semcap/corpus.hpp"
#include "semcap/error.hpp"
#include "test_support.hpp"

using namespace semcap;
using nlohmann::json;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_jsonl(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

Dataset random_dataset(std::mt19937_64& rng, std::size_t count, std::size_t dim) {
  std::vector<ImageRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    records.push_back({"img-" + std::to_string(i), {"caption " + std::to_string(i), "a second one"}});
  }
  return make_dataset(std::move(records), testing::random_matrix(rng, count, dim));
}

}  // namespace

TEST_CASE("parse_jsonl accepts a minimal line") {
  auto ds = parse(R"({"id":"a","embedding":[1,0],"captions":["a cat sits"]})");
  CHECK(ds.size() == 1);
  CHECK(ds.embeddings.dim() == 2);
  CHECK(ds.embeddings.count() == 1);
  CHECK(ds.records[0] == ImageRecord{"a", {"a cat sits"}});
  CHECK(ds.embeddings.norm(0) == 1.0);
}

TEST_CASE("parse_jsonl rejects bad input with the line number") {
  const std::string good = R"({"id":"a","embedding":[1,0],"captions":["x"]})";
  CHECK(error_of(good + "\n" + R"({"id":"b","embedding":[1,0,3],"captions":["y"]})")
            .find("line 2: inconsistent embedding length") != std::string::npos);
  CHECK(error_of(good + "\n\n{oops").find("line 3: malformed JSON") != std::string::npos);
  CHECK(error_of(good + "\n" + good).find("duplicate id") != std::string::npos);
  CHECK(error_of(R"({"id":"a","embedding":[1],"captions":[]})").find("empty captions") !=
        std::string::npos);
  CHECK(error_of(R"({"id":"a","embedding":[1e300],"captions":["x"]})").find("non-finite") !=
        std::string::npos);
  CHECK(error_of(R"({"id":"a","embedding":[1],"captions":["..."]})").find("no words") !=
        std::string::npos);
  CHECK(error_of(R"({"id":"","embedding":[1],"captions":["x"]})").find("empty image id") !=
        std::string::npos);
  CHECK(error_of(R"({"id":"a","embedding":["1"],"captions":["x"]})").find("numbers") !=
        std::string::npos);
  CHECK(error_of(R"({"id":"a","embedding":[],"captions":["x"]})").find("empty embedding") !=
        std::string::npos);
}

TEST_CASE("parse_jsonl on an empty stream yields an empty dataset") {
  auto ds = parse("");
  CHECK(ds.size() == 0);
  CHECK(ds.embeddings.empty());
}

TEST_CASE("JSONL round trip of a 50 x 4096 dataset is exact") {
  std::mt19937_64 rng(50);
  const Dataset original = random_dataset(rng, 50, kDefaultEmbeddingDim);

  // Written independently of write_jsonl so the parser is checked on its own.
  std::ostringstream text;
  for (std::size_t i = 0; i < original.size(); ++i) {
    auto row = original.embeddings.row(i);
    json obj{{"id", original.records[i].id},
             {"embedding", std::vector<double>(row.begin(), row.end())},
             {"captions", original.records[i].captions}};
    text << obj.dump() << "\n";
  }
  const Dataset parsed = parse(text.str());
  CHECK(parsed.size() == 50);
  CHECK(parsed.embeddings.dim() == 4096);
  CHECK(parsed == original);

  std::ostringstream again;
  write_jsonl(again, parsed);
  CHECK(again.str() == text.str());
}

TEST_CASE("norms match the rows") {
  std::mt19937_64 rng(3);
  auto m = testing::random_matrix(rng, 20, 64);
  for (std::size_t i = 0; i < m.count(); ++i) {
    long double s = 0;
    for (float x : m.row(i)) s += static_cast<long double>(x) * x;
    CHECK(m.norm(i) == doctest::Approx(static_cast<double>(std::sqrt(s))).epsilon(1e-12));
  }
}

TEST_CASE("make_dataset enforces alignment and id uniqueness") {
  EmbeddingMatrix m(2, {1, 0, 0, 1});
  CHECK_THROWS_AS(make_dataset({{"a", {"x"}}}, m), ParseError);
  CHECK_THROWS_AS(make_dataset({{"a", {"x"}}, {"a", {"y"}}}, m), ParseError);
  CHECK_THROWS_AS(make_dataset({{"a", {"x"}}, {"b", {}}}, m), ParseError);
  CHECK_NOTHROW(make_dataset({{"a", {"x"}}, {"b", {"y"}}}, m));
  CHECK_THROWS_AS(EmbeddingMatrix(2, {1, 2, 3}), ParseError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, {std::numeric_limits<float>::quiet_NaN()}), ParseError);
}

TEST_CASE("binary matrix layout") {
  EmbeddingMatrix m(2, {1.0f, 2.0f});
  std::vector<std::string> ids{"x"};
  std::ostringstream out;
  write_binary_matrix(out, m, ids);
  const std::string bytes = out.str();
  // magic + version + dim + count + payload + "x\n"
  REQUIRE(bytes.size() == 4 + 2 + 4 + 8 + 8 + 2);
  CHECK(bytes.substr(0, 4) == "SEMC");
  CHECK(bytes.substr(4, 2) == std::string("\x01\x00", 2));
  CHECK(bytes.substr(6, 4) == std::string("\x02\x00\x00\x00", 4));
  CHECK(bytes.substr(10, 8) == std::string("\x01\0\0\0\0\0\0\0", 8));
  CHECK(bytes.substr(18, 4) == std::string("\x00\x00\x80\x3f", 4));  // 1.0f LE
  CHECK(bytes.substr(22, 4) == std::string("\x00\x00\x00\x40", 4));  // 2.0f LE
  CHECK(bytes.substr(26) == "x\n");
}

TEST_CASE("binary matrix round trip is bitwise") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = testing::random_matrix(rng, 10, 16);
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("id " + std::to_string(trial) + "/" + std::to_string(i));
    std::stringstream buf;
    write_binary_matrix(buf, m, ids);
    auto back = read_binary_matrix(buf);
    CHECK(back.ids == ids);
    REQUIRE(back.matrix.values().size() == m.values().size());
    CHECK(std::memcmp(back.matrix.values().data(), m.values().data(), m.values().size_bytes()) == 0);
    CHECK(back.matrix == m);
  }
}

TEST_CASE("empty matrix round trips") {
  std::stringstream buf;
  write_binary_matrix(buf, EmbeddingMatrix(8, {}), {});
  auto back = read_binary_matrix(buf);
  CHECK(back.matrix.count() == 0);
  CHECK(back.matrix.dim() == 8);
  CHECK(back.ids.empty());
}

TEST_CASE("binary matrix errors") {
  EmbeddingMatrix m(1, {1.0f});
  std::ostringstream out;
  std::vector<std::string> bad{"a\nb"};
  CHECK_THROWS_AS(write_binary_matrix(out, m, bad), Error);
  CHECK_THROWS_AS(write_binary_matrix(out, m, {}), Error);

  std::istringstream wrong_magic("XXXX");
  CHECK_THROWS_AS(read_binary_matrix(wrong_magic), ParseError);

  std::stringstream good;
  std::vector<std::string> ids{"a"};
  write_binary_matrix(good, m, ids);
  const std::string bytes = good.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_binary_matrix(truncated), ParseError);
  std::istringstream unterminated(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_binary_matrix(unterminated), ParseError);

  std::string v2 = bytes;
  v2[4] = 2;
  std::istringstream future(v2);
  CHECK_THROWS_WITH_AS(read_binary_matrix(future), doctest::Contains("version"), ParseError);
}

namespace {

std::string matrix_bytes(const EmbeddingMatrix& m, const std::vector<std::string>& ids) {
  std::ostringstream out;
  write_binary_matrix(out, m, ids);
  return out.str();
}

Dataset coco(const json& annotations, const std::string& matrix) {
  std::istringstream a(annotations.dump());
  std::istringstream e(matrix);
  return parse_coco_annotations(a, e);
}

json two_images() {
  return json{{"images", {{{"id", 1}}, {{"id", 2}}}},
              {"annotations",
               {{{"id", 10}, {"image_id", 1}, {"caption", "a dog runs"}},
                {{"id", 11}, {"image_id", 2}, {"caption", "a red bus"}},
                {{"id", 12}, {"image_id", 1}, {"caption", "dog on grass"}},
                {{"id", 13}, {"image_id", 2}, {"caption", "bus in a street"}}}}};
}

}  // namespace

TEST_CASE("parse_coco_annotations joins captions to the manifest") {
  const auto matrix = matrix_bytes(EmbeddingMatrix(2, {0, 1, 1, 0}), {"2", "1"});
  auto ds = coco(two_images(), matrix);
  REQUIRE(ds.size() == 2);
  CHECK(ds.records[0] == ImageRecord{"2", {"a red bus", "bus in a street"}});
  CHECK(ds.records[1] == ImageRecord{"1", {"a dog runs", "dog on grass"}});
  CHECK(ds.embeddings.row(0)[1] == 1.0f);
}

TEST_CASE("parse_coco_annotations is independent of annotation order") {
  const auto matrix = matrix_bytes(EmbeddingMatrix(2, {0, 1, 1, 0}), {"1", "2"});
  const auto reference = coco(two_images(), matrix);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    auto doc = two_images();
    auto& anns = doc["annotations"];
    std::vector<json> items(anns.begin(), anns.end());
    std::shuffle(items.begin(), items.end(), rng);
    anns = items;
    auto& images = doc["images"];
    std::vector<json> imgs(images.begin(), images.end());
    std::shuffle(imgs.begin(), imgs.end(), rng);
    images = imgs;
    CHECK(coco(doc, matrix) == reference);
  }
}

TEST_CASE("parse_coco_annotations reports mismatched ids") {
  const auto three = matrix_bytes(EmbeddingMatrix(1, {1, 2, 3}), {"1", "2", "3"});
  CHECK_THROWS_WITH_AS(coco(two_images(), three), doctest::Contains("3"), ParseError);

  const auto one = matrix_bytes(EmbeddingMatrix(1, {1}), {"1"});
  CHECK_THROWS_WITH_AS(coco(two_images(), one), doctest::Contains("image id 2"), ParseError);

  auto no_caps = two_images();
  no_caps["images"].push_back({{"id", 3}});
  CHECK_THROWS_WITH_AS(coco(no_caps, three), doctest::Contains("no captions"), ParseError);

  auto stray = two_images();
  stray["annotations"].push_back({{"image_id", 9}, {"caption", "ghost"}});
  CHECK_THROWS_AS(coco(stray, matrix_bytes(EmbeddingMatrix(1, {1, 2}), {"1", "2"})), ParseError);
}
