#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing here
// calls into the search or selection code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semcap/corpus.hpp"
#include "semcap/index.hpp"
#include "semcap/selector.hpp"

namespace semcap::testing {

inline std::string data_path(const std::string& name) {
  return std::string(SEMCAP_TEST_DATA_DIR) + "/" + name;
}

/// The 50 candidate captions of the worked example, in bagging order
/// (10 images x 5 captions).
inline std::vector<std::string> worked_example_sentences() {
  std::ifstream in(data_path("worked_example_captions.txt"));
  if (!in) throw std::runtime_error("missing worked_example_captions.txt");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

inline CandidateCorpus worked_example_corpus() {
  CandidateCorpus corpus;
  for (auto& s : worked_example_sentences()) corpus.add(s);
  return corpus;
}

inline constexpr const char* kWorkedExampleSelected = "A train traveling down a train track next to trees.";

/// The worked example as a dataset: ten images carrying its captions, close
/// to worked_example_query(), plus five unrelated images pointing elsewhere.
inline constexpr std::size_t kWorkedExampleDim = 8;

inline std::vector<float> worked_example_query() { return {1, 1, 1, 1, 0, 0, 0, 0}; }

inline Dataset worked_example_dataset() {
  const auto sentences = worked_example_sentences();
  std::vector<ImageRecord> records;
  std::vector<float> values;
  for (std::size_t i = 0; i < 10; ++i) {
    records.push_back({"train-" + std::to_string(i),
                       {sentences.begin() + 5 * i, sentences.begin() + 5 * i + 5}});
    std::vector<float> v{1, 1, 1, 1, 0, 0, 0, 0};
    v[i % 4] += 0.05f * static_cast<float>(i + 1);
    v[4 + i % 4] = 0.01f * static_cast<float>(i);
    values.insert(values.end(), v.begin(), v.end());
  }
  const char* other[] = {"A plate of food on a wooden table.", "Two cats sleeping on a couch.",
                         "A man riding a surfboard on a wave.", "A bowl of fruit next to a vase.",
                         "A kite flying over a sandy beach."};
  for (std::size_t i = 0; i < 5; ++i) {
    records.push_back({"other-" + std::to_string(i), {other[i]}});
    std::vector<float> v{0, 0, 0, 0, 1, 1, 1, 1};
    v[i % 4] = 0.1f;
    values.insert(values.end(), v.begin(), v.end());
  }
  return make_dataset(std::move(records), EmbeddingMatrix(kWorkedExampleDim, std::move(values)));
}

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim, bool non_negative = false) {
  std::uniform_real_distribution<float> u(non_negative ? 0.0f : -1.0f, 1.0f);
  std::vector<float> v(dim);
  for (auto& x : v) x = u(rng);
  return v;
}

/// Straight-line distance definitions, evaluated in long double.
inline double oracle_distance(Metric metric, std::span<const float> a, std::span<const float> b) {
  long double acc = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double x = a[i], y = b[i];
    switch (metric) {
      case Metric::Cosine:
        acc += x * y;
        aa += x * x;
        bb += y * y;
        break;
      case Metric::L1: acc += std::fabs(x - y); break;
      case Metric::L2: acc += (x - y) * (x - y); break;
      case Metric::Linf: acc = std::max(acc, std::fabs(x - y)); break;
    }
  }
  switch (metric) {
    case Metric::Cosine: return static_cast<double>(1.0L - acc / (std::sqrt(aa) * std::sqrt(bb)));
    case Metric::L2: return static_cast<double>(std::sqrt(acc));
    default: return static_cast<double>(acc);
  }
}

/// Computes every distance, sorts (distance, row), keeps the first k.
inline std::vector<std::pair<double, std::size_t>> oracle_knn(const EmbeddingMatrix& m,
                                                              std::span<const float> q,
                                                              std::size_t k, Metric metric) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t r = 0; r < m.count(); ++r) {
    bool zero = true;
    for (float x : m.row(r)) zero = zero && x == 0.0f;
    if (metric == Metric::Cosine && zero) continue;
    all.emplace_back(oracle_distance(metric, q, m.row(r)), r);
  }
  std::sort(all.begin(), all.end());
  if (all.size() > k) all.resize(k);
  return all;
}

inline EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t count, std::size_t dim,
                                     bool non_negative = false) {
  std::vector<float> values;
  values.reserve(count * dim);
  for (std::size_t r = 0; r < count; ++r) {
    auto v = random_vector(rng, dim, non_negative);
    values.insert(values.end(), v.begin(), v.end());
  }
  return EmbeddingMatrix(dim, std::move(values));
}

}  // namespace semcap::testing
