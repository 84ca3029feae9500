#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "semcap/corpus.hpp"
#include "semcap/engine.hpp"
#include "semcap/error.hpp"
#include "semcap/index.hpp"
#include "semcap/selector.hpp"

namespace semcap::cli {

using nlohmann::json;

namespace {

/// Raised for bad user input that is not a library error (missing file etc.).
struct UsageError : Error {
  using Error::Error;
};

struct QueryFlags {
  std::size_t k = 10;
  std::string metric = "cosine";
  std::string stopwords;
  std::string format = "text";
  std::string exclude_id;
  std::string embedding = "-";
  std::string dataset;
};

std::string format_double(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return in;
}

std::string slurp(const std::string& path, std::istream& stdin_stream) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(stdin_stream), std::istreambuf_iterator<char>()};
  }
  auto in = open_input(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A JSON array of numbers (or an object with an "embedding" array), or a
/// one-row binary matrix file.
std::vector<float> read_query_embedding(const std::string& path, std::istream& stdin_stream) {
  const std::string bytes = slurp(path, stdin_stream);
  if (bytes.size() >= 4 && bytes.compare(0, 4, kMatrixMagic, 4) == 0) {
    std::istringstream in(bytes);
    auto labeled = read_binary_matrix(in);
    if (labeled.matrix.count() != 1) {
      throw UsageError("query matrix must have exactly one row, found " +
                       std::to_string(labeled.matrix.count()));
    }
    auto row = labeled.matrix.row(0);
    return {row.begin(), row.end()};
  }
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("query embedding is not valid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("embedding")) doc = doc["embedding"];
  if (!doc.is_array() || doc.empty()) throw ParseError("query embedding must be a non-empty array");
  std::vector<float> v;
  v.reserve(doc.size());
  for (const auto& x : doc) {
    if (!x.is_number()) throw ParseError("query embedding values must be numbers");
    const auto f = static_cast<float>(x.get<double>());
    if (!std::isfinite(f)) throw ParseError("query embedding has a non-finite value");
    v.push_back(f);
  }
  return v;
}

StopwordList resolve_stopwords(const std::string& flag, std::ostream& err) {
  std::string path = flag;
  if (path.empty()) {
    if (const char* env = std::getenv("SEMCAP_STOPWORDS"); env && *env) path = env;
  }
  if (path.empty()) {
    err << "stopwords: <bundled>\n";
    return StopwordList::bundled();
  }
  err << "stopwords: " << path << '\n';
  return StopwordList::load(path);
}

QueryParams make_params(const QueryFlags& flags, std::ostream& err, bool need_stopwords) {
  QueryParams params;
  if (flags.k == 0) throw UsageError("--k must be at least 1");
  params.k = flags.k;
  params.metric = parse_metric(flags.metric);
  if (need_stopwords) params.stopwords = resolve_stopwords(flags.stopwords, err);
  if (!flags.exclude_id.empty()) params.exclude_id = flags.exclude_id;
  return params;
}

SearchIndex load_index(const std::string& path) {
  auto in = open_input(path);
  return read_index(in);
}

void require_same_ids(const SearchIndex& index, const Dataset& dataset, const std::string& what) {
  if (dataset.size() != index.size()) {
    throw UsageError(what + " has " + std::to_string(dataset.size()) + " rows but the index has " +
                     std::to_string(index.size()));
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.records[i].id != index.ids()[i]) {
      throw UsageError(what + " row " + std::to_string(i) + " is \"" + dataset.records[i].id +
                       "\" but the index has \"" + index.ids()[i] + "\"");
    }
  }
}

/// Captions for an index come from --dataset when given, else from the
/// captions file written by `build`.
Dataset load_captions(const SearchIndex& index, const std::string& index_path,
                      const std::string& dataset_path) {
  if (!dataset_path.empty()) {
    auto in = open_input(dataset_path);
    Dataset dataset = parse_jsonl(in);
    require_same_ids(index, dataset, dataset_path);
    return dataset;
  }
  const auto path = captions_path_for(index_path);
  auto in = open_input(path);
  std::vector<ImageRecord> records;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
      records.push_back(ImageRecord{obj.at("id").get<std::string>(),
                                    obj.at("captions").get<std::vector<std::string>>()});
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad captions entry: ") + e.what(), n);
    }
  }
  Dataset dataset = make_dataset(std::move(records), index.matrix());
  require_same_ids(index, dataset, path);
  return dataset;
}

json neighbors_json(const SearchIndex& index, const NeighborList& neighbors) {
  json list = json::array();
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const auto& n = neighbors[i];
    list.push_back({{"rank", i + 1}, {"id", index.ids()[n.row]}, {"row", n.row},
                    {"distance", n.distance}});
  }
  return list;
}

json trace_json(const CullTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    steps.push_back({{"word", s.word}, {"count", s.count}, {"before", s.before},
                     {"after", s.after}, {"skipped", s.skipped}});
  }
  return {{"termination", termination_name(trace.termination)},
          {"final_candidates", trace.final_candidates},
          {"steps", std::move(steps)}};
}

json result_json(const SearchIndex& index, const CaptionResult& r, const QueryParams& params) {
  return {{"caption", r.caption},
          {"k", params.k},
          {"metric", metric_name(params.metric)},
          {"corpus_size", r.corpus_size},
          {"shortfall", r.shortfall},
          {"skipped_zero_norm", r.neighbors.skipped_zero_norm},
          {"neighbors", neighbors_json(index, r.neighbors)},
          {"trace", trace_json(r.trace)}};
}

void check_format(const std::string& format) {
  if (format != "text" && format != "json") {
    throw UsageError("--format must be text or json");
  }
}

void warn_shortfall(const NeighborList& neighbors, std::size_t k, std::ostream& err) {
  if (neighbors.size() < k) {
    err << "warning: only " << neighbors.size() << " of " << k << " neighbors available\n";
  }
  if (neighbors.skipped_zero_norm > 0) {
    err << "warning: skipped " << neighbors.skipped_zero_norm << " zero-norm rows\n";
  }
}

int cmd_build(const std::vector<std::string>& paths, const std::string& annotations,
              const std::string& embeddings, std::ostream& err) {
  Dataset dataset;
  std::string index_path;
  if (!annotations.empty() || !embeddings.empty()) {
    if (annotations.empty() || embeddings.empty()) {
      throw UsageError("--annotations and --embeddings must be given together");
    }
    if (paths.size() != 1) throw UsageError("expected: build --annotations A --embeddings E INDEX");
    auto ann = open_input(annotations);
    auto emb = open_input(embeddings);
    dataset = parse_coco_annotations(ann, emb);
    index_path = paths[0];
  } else {
    if (paths.size() != 2) throw UsageError("expected: build DATASET INDEX");
    auto in = open_input(paths[0]);
    dataset = parse_jsonl(in);
    index_path = paths[1];
  }

  const SearchIndex index = build_index(dataset);
  {
    std::ofstream out(index_path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + index_path);
    write_index(out, index);
  }
  {
    const auto path = captions_path_for(index_path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path);
    for (const auto& r : dataset.records) {
      out << json{{"id", r.id}, {"captions", r.captions}}.dump() << '\n';
    }
  }
  err << dataset.size() << " rows, dim " << dataset.embeddings.dim() << '\n';
  return kExitOk;
}

int cmd_query(const std::string& index_path, const QueryFlags& flags, std::istream& in,
              std::ostream& out, std::ostream& err) {
  check_format(flags.format);
  const auto params = make_params(flags, err, true);
  const auto index = load_index(index_path);
  const auto dataset = load_captions(index, index_path, flags.dataset);
  const auto query = read_query_embedding(flags.embedding, in);

  const auto result = caption(index, dataset, query, params);
  warn_shortfall(result.neighbors, params.k, err);
  if (flags.format == "json") {
    out << result_json(index, result, params).dump(2) << '\n';
  } else {
    out << result.caption << '\n';
  }
  return kExitOk;
}

int cmd_neighbors(const std::string& index_path, const QueryFlags& flags, std::istream& in,
                  std::ostream& out, std::ostream& err) {
  check_format(flags.format);
  const auto params = make_params(flags, err, false);
  const auto index = load_index(index_path);
  const auto query = read_query_embedding(flags.embedding, in);

  KnnOptions options;
  if (params.exclude_id) options.exclude_row = index.find(*params.exclude_id);
  const auto neighbors = index.knn(query, params.k, params.metric, options);
  warn_shortfall(neighbors, params.k, err);
  if (flags.format == "json") {
    out << json{{"k", params.k},
                {"metric", metric_name(params.metric)},
                {"skipped_zero_norm", neighbors.skipped_zero_norm},
                {"neighbors", neighbors_json(index, neighbors)}}
               .dump(2)
        << '\n';
  } else {
    for (const auto& n : neighbors) {
      out << index.ids()[n.row] << '\t' << format_double(n.distance, "%.9g") << '\n';
    }
  }
  return kExitOk;
}

int cmd_eval(const std::string& index_path, const std::string& dataset_path,
             const std::string& heldout_path, const QueryFlags& flags, std::ostream& out,
             std::ostream& err) {
  check_format(flags.format);
  const auto started = std::chrono::steady_clock::now();
  auto params = make_params(flags, err, true);
  const auto index = load_index(index_path);
  const auto dataset = load_captions(index, index_path, dataset_path);

  Dataset heldout;
  {
    auto in = open_input(heldout_path);
    heldout = parse_jsonl(in);
  }
  if (heldout.size() == 0) throw UsageError("held-out set " + heldout_path + " is empty");

  std::vector<BatchQuery> queries;
  queries.reserve(heldout.size());
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    auto row = heldout.embeddings.row(i);
    queries.push_back(BatchQuery{heldout.records[i].id, {row.begin(), row.end()}});
  }
  const auto results = batch_caption(index, dataset, queries, params, true);

  double sum = 0.0;
  json items = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& record = heldout.records[i];
    const double f1 = eval_unigram_f1(results[i].caption, record.captions, params.stopwords);
    sum += f1;
    if (flags.format == "json") {
      items.push_back({{"id", record.id}, {"f1", f1}, {"caption", results[i].caption}});
    } else {
      out << record.id << '\t' << format_double(f1, "%.6f") << '\t' << results[i].caption << '\n';
    }
  }
  const double mean = sum / static_cast<double>(results.size());
  if (flags.format == "json") {
    out << json{{"mean_f1", mean}, {"count", results.size()}, {"items", std::move(items)}}.dump(2)
        << '\n';
  } else {
    out << "mean_f1\t" << format_double(mean, "%.6f") << '\n';
  }

  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
  err << "evaluated " << results.size() << " items in " << format_double(elapsed.count(), "%.3f")
      << " s\n";
  return kExitOk;
}

void add_query_flags(CLI::App* cmd, QueryFlags& flags, bool with_stopwords) {
  cmd->add_option("--k", flags.k, "Number of neighbors")->capture_default_str();
  cmd->add_option("--metric", flags.metric, "cosine, l1, l2 or linf")->capture_default_str();
  cmd->add_option("--format", flags.format, "text or json")->capture_default_str();
  cmd->add_option("--exclude-id", flags.exclude_id, "Database id to leave out of the neighbors");
  if (with_stopwords) {
    cmd->add_option("--stopwords", flags.stopwords,
                    "Stopword file (default: $SEMCAP_STOPWORDS, then the bundled list)");
  }
}

}  // namespace

std::string captions_path_for(const std::string& index_path) { return index_path + ".captions.jsonl"; }

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Caption image embeddings from their nearest captioned neighbors", "semcap"};
  app.require_subcommand(1);

  std::vector<std::string> build_paths;
  std::string annotations;
  std::string embeddings;
  auto* build = app.add_subcommand("build", "Build an index from a JSONL dataset or COCO annotations");
  build->add_option("paths", build_paths, "DATASET INDEX, or INDEX with --annotations/--embeddings")
      ->required();
  build->add_option("--annotations", annotations, "COCO captions JSON");
  build->add_option("--embeddings", embeddings, "Binary embedding matrix for the COCO images");

  std::string index_path;
  QueryFlags query_flags;
  auto* query = app.add_subcommand("query", "Select a caption for one query embedding");
  query->add_option("index", index_path, "Index file")->required();
  query->add_option("--embedding", query_flags.embedding,
                    "JSON array or one-row matrix file ('-' for stdin)")
      ->capture_default_str();
  query->add_option("--dataset", query_flags.dataset, "JSONL dataset supplying the captions");
  add_query_flags(query, query_flags, true);

  QueryFlags neighbor_flags;
  auto* neighbors = app.add_subcommand("neighbors", "List the nearest database images");
  neighbors->add_option("index", index_path, "Index file")->required();
  neighbors->add_option("--embedding", neighbor_flags.embedding,
                        "JSON array or one-row matrix file ('-' for stdin)")
      ->capture_default_str();
  add_query_flags(neighbors, neighbor_flags, false);

  std::string dataset_path;
  std::string heldout_path;
  QueryFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Caption a held-out set and report unigram F1");
  eval->add_option("index", index_path, "Index file")->required();
  eval->add_option("dataset", dataset_path, "JSONL dataset the index was built from")->required();
  eval->add_option("heldout", heldout_path, "JSONL held-out set with reference captions")
      ->required();
  add_query_flags(eval, eval_flags, true);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*build) return cmd_build(build_paths, annotations, embeddings, err);
    if (*query) return cmd_query(index_path, query_flags, in, out, err);
    if (*neighbors) return cmd_neighbors(index_path, neighbor_flags, in, out, err);
    if (*eval) return cmd_eval(index_path, dataset_path, heldout_path, eval_flags, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace semcap::cli
