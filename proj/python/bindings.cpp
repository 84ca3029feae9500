#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <fstream>

#include "semcap/corpus.hpp"
#include "semcap/engine.hpp"
#include "semcap/error.hpp"
#include "semcap/index.hpp"
#include "semcap/selector.hpp"

namespace py = pybind11;
using namespace semcap;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

std::vector<float> to_vector(const FloatArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Metric metric_from(const std::string& name) { return parse_metric(name); }

py::dict trace_dict(const CullTrace& trace) {
  py::list steps;
  for (const auto& s : trace.steps) {
    py::dict d;
    d["word"] = s.word;
    d["count"] = s.count;
    d["before"] = s.before;
    d["after"] = s.after;
    d["skipped"] = s.skipped;
    steps.append(d);
  }
  py::dict out;
  out["termination"] = std::string(termination_name(trace.termination));
  out["final_candidates"] = trace.final_candidates;
  out["steps"] = steps;
  return out;
}

py::list neighbors_list(const NeighborList& list) {
  py::list out;
  for (const auto& n : list) out.append(py::make_tuple(n.row, n.distance));
  return out;
}

StopwordList stopwords_from(const std::optional<std::vector<std::string>>& words) {
  if (!words) return StopwordList::bundled();
  StopwordList list;
  for (const auto& w : *words) list.insert(w);
  return list;
}

QueryParams params_from(std::size_t k, const std::string& metric,
                        const std::optional<std::vector<std::string>>& stopwords,
                        std::optional<std::string> exclude_id) {
  QueryParams p;
  p.k = k;
  p.metric = metric_from(metric);
  p.stopwords = stopwords_from(stopwords);
  p.exclude_id = std::move(exclude_id);
  return p;
}

py::dict result_dict(const SearchIndex& index, const CaptionResult& r) {
  py::dict d;
  d["caption"] = r.caption;
  py::list neighbors;
  for (const auto& n : r.neighbors) neighbors.append(py::make_tuple(index.ids()[n.row], n.distance));
  d["neighbors"] = neighbors;
  d["corpus_size"] = r.corpus_size;
  d["shortfall"] = r.shortfall;
  d["trace"] = trace_dict(r.trace);
  return d;
}

}  // namespace

PYBIND11_MODULE(_semcap, m) {
  m.doc() = "Nearest-neighbor consensus captioning over image embeddings";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("bundled_stopwords", [] {
    const auto& w = StopwordList::bundled().words();
    return std::vector<std::string>(w.begin(), w.end());
  });

  m.def(
      "distance",
      [](const std::string& metric, const FloatArray& a, const FloatArray& b) {
        return distance(metric_from(metric), to_vector(a), to_vector(b));
      },
      py::arg("metric"), py::arg("a"), py::arg("b"));

  m.def(
      "frequency_table",
      [](const std::vector<std::string>& sentences,
         const std::optional<std::vector<std::string>>& stopwords) {
        CandidateCorpus corpus;
        for (const auto& s : sentences) corpus.add(s);
        const auto table = build_frequency_table(corpus, stopwords_from(stopwords));
        py::list out;
        for (const auto& e : table.ranked()) out.append(py::make_tuple(e.word, e.count, e.stop));
        return out;
      },
      py::arg("sentences"), py::arg("stopwords") = py::none(),
      "(word, count, stop) tuples, most frequent first.");

  m.def(
      "select_caption",
      [](const std::vector<std::string>& sentences,
         const std::optional<std::vector<std::string>>& stopwords) {
        CandidateCorpus corpus;
        for (const auto& s : sentences) corpus.add(s);
        auto sel = select_caption(corpus, stopwords_from(stopwords));
        return py::make_tuple(sel.caption, trace_dict(sel.trace));
      },
      py::arg("sentences"), py::arg("stopwords") = py::none());

  m.def("eval_unigram_f1",
        [](const std::string& hypothesis, const std::vector<std::string>& references,
           const std::optional<std::vector<std::string>>& stopwords) {
          return eval_unigram_f1(hypothesis, references, stopwords_from(stopwords));
        },
        py::arg("hypothesis"), py::arg("references"), py::arg("stopwords") = py::none());

  py::class_<Dataset>(m, "Dataset")
      .def_static(
          "from_jsonl",
          [](const std::string& path) {
            std::ifstream in(path);
            if (!in) throw Error("cannot open " + path);
            return parse_jsonl(in);
          },
          py::arg("path"))
      .def_static(
          "from_records",
          [](std::vector<std::pair<std::string, std::vector<std::string>>> records,
             const py::array_t<float, py::array::c_style | py::array::forcecast>& embeddings) {
            if (embeddings.ndim() != 2) throw py::value_error("embeddings must be 2-D");
            std::vector<ImageRecord> recs;
            for (auto& [id, caps] : records) recs.push_back({std::move(id), std::move(caps)});
            std::vector<float> values(embeddings.data(), embeddings.data() + embeddings.size());
            return make_dataset(std::move(recs),
                                EmbeddingMatrix(static_cast<std::size_t>(embeddings.shape(1)),
                                                std::move(values)));
          },
          py::arg("records"), py::arg("embeddings"))
      .def("__len__", &Dataset::size)
      .def_property_readonly("dim", [](const Dataset& d) { return d.embeddings.dim(); })
      .def_property_readonly("ids", [](const Dataset& d) {
        std::vector<std::string> ids;
        for (const auto& r : d.records) ids.push_back(r.id);
        return ids;
      })
      .def("captions", [](const Dataset& d, std::size_t row) { return d.records.at(row).captions; })
      .def("embedding", [](const Dataset& d, std::size_t row) {
        if (row >= d.size()) throw py::index_error();
        auto r = d.embeddings.row(row);
        py::array_t<float> out(static_cast<py::ssize_t>(r.size()));
        std::copy(r.begin(), r.end(), out.mutable_data());
        return out;
      });

  py::class_<SearchIndex>(m, "SearchIndex")
      .def(py::init([](const Dataset& d) { return build_index(d); }), py::arg("dataset"))
      .def_static(
          "load",
          [](const std::string& path) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw Error("cannot open " + path);
            return read_index(in);
          },
          py::arg("path"))
      .def(
          "save",
          [](const SearchIndex& index, const std::string& path) {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write " + path);
            write_index(out, index);
          },
          py::arg("path"))
      .def("__len__", &SearchIndex::size)
      .def_property_readonly("dim", &SearchIndex::dim)
      .def_property_readonly("ids", &SearchIndex::ids)
      .def(
          "knn",
          [](const SearchIndex& index, const FloatArray& query, std::size_t k,
             const std::string& metric) {
            auto q = to_vector(query);
            NeighborList list;
            {
              py::gil_scoped_release release;
              list = index.knn(q, k, metric_from(metric));
            }
            return neighbors_list(list);
          },
          py::arg("query"), py::arg("k") = 10, py::arg("metric") = "cosine",
          "[(row, distance)] ascending by distance, ties by row.")
      .def(
          "caption",
          [](const SearchIndex& index, const Dataset& dataset, const FloatArray& query,
             std::size_t k, const std::string& metric,
             const std::optional<std::vector<std::string>>& stopwords,
             std::optional<std::string> exclude_id) {
            const auto params = params_from(k, metric, stopwords, std::move(exclude_id));
            auto q = to_vector(query);
            CaptionResult r;
            {
              py::gil_scoped_release release;
              r = caption(index, dataset, q, params);
            }
            return result_dict(index, r);
          },
          py::arg("dataset"), py::arg("query"), py::arg("k") = 10, py::arg("metric") = "cosine",
          py::arg("stopwords") = py::none(), py::arg("exclude_id") = py::none())
      .def(
          "batch_caption",
          [](const SearchIndex& index, const Dataset& dataset,
             const std::vector<std::pair<std::string, std::vector<float>>>& queries, std::size_t k,
             const std::string& metric, const std::optional<std::vector<std::string>>& stopwords,
             bool exclude_matching_ids) {
            const auto params = params_from(k, metric, stopwords, std::nullopt);
            std::vector<BatchQuery> batch;
            for (const auto& [id, v] : queries) batch.push_back({id, v});
            std::vector<CaptionResult> results;
            {
              py::gil_scoped_release release;
              results = batch_caption(index, dataset, batch, params, exclude_matching_ids);
            }
            py::list out;
            for (const auto& r : results) out.append(result_dict(index, r));
            return out;
          },
          py::arg("dataset"), py::arg("queries"), py::arg("k") = 10, py::arg("metric") = "cosine",
          py::arg("stopwords") = py::none(), py::arg("exclude_matching_ids") = false);
}
