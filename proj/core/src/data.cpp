#include "amgcn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "amgcn/error.hpp"
#include "amgcn/rng.hpp"

namespace amgcn {
namespace fs = std::filesystem;
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool skippable(const std::string& line) { return line.empty() || line.front() == '#'; }

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  if (sep == ' ') {
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& tok, const fs::path& file, std::size_t line_no) {
  T value{};
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, file.string() + ":" + std::to_string(line_no) +
                                           ": cannot parse '" + tok + "'");
  }
  return value;
}

std::ifstream open_required(const fs::path& file) {
  if (!fs::exists(file)) throw Error(ErrorCode::MissingFile, "missing file " + file.string());
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + file.string());
  return in;
}

DenseMatrix read_features(const fs::path& file) {
  auto in = open_required(file);
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (skippable(line)) continue;
    const auto fields = split_fields(line, ',');
    if (rows == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw Error(ErrorCode::RaggedFeatures,
                  file.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " columns, found " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      const double v = parse_number<double>(f, file, line_no);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::ParseError,
                    file.string() + ":" + std::to_string(line_no) + ": non-finite feature");
      }
      data.push_back(v);
    }
    ++rows;
  }
  require(rows > 0, ErrorCode::ParseError, file.string() + ": no feature rows");
  return DenseMatrix(rows, cols, std::move(data));
}

std::vector<Edge> read_edges(const fs::path& file) {
  auto in = open_required(file);
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (skippable(line)) continue;
    const auto fields = split_fields(line, ' ');
    if (fields.size() != 2) {
      throw Error(ErrorCode::ParseError,
                  file.string() + ":" + std::to_string(line_no) + ": expected two node ids");
    }
    edges.emplace_back(parse_number<std::size_t>(fields[0], file, line_no),
                       parse_number<std::size_t>(fields[1], file, line_no));
  }
  return edges;
}

std::vector<int> read_labels(const fs::path& file, std::size_t n) {
  auto in = open_required(file);
  std::vector<int> labels(n, -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (skippable(line)) continue;
    const auto fields = split_fields(line, ' ');
    if (fields.size() != 2) {
      throw Error(ErrorCode::ParseError,
                  file.string() + ":" + std::to_string(line_no) + ": expected node_id class_id");
    }
    const auto node = parse_number<std::size_t>(fields[0], file, line_no);
    const auto cls = parse_number<int>(fields[1], file, line_no);
    if (node >= n) {
      throw Error(ErrorCode::IndexOutOfRange, file.string() + ":" + std::to_string(line_no) +
                                                  ": node " + std::to_string(node) +
                                                  " outside feature rows");
    }
    if (cls < 0) {
      throw Error(ErrorCode::ParseError,
                  file.string() + ":" + std::to_string(line_no) + ": negative class id");
    }
    if (labels[node] != -1) {
      throw Error(ErrorCode::ParseError, file.string() + ":" + std::to_string(line_no) +
                                             ": duplicate label for node " + std::to_string(node));
    }
    labels[node] = cls;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == -1) {
      throw Error(ErrorCode::ParseError, file.string() + ": node " + std::to_string(i) + " has no label");
    }
  }
  return labels;
}

Split read_split(const fs::path& file, std::size_t n) {
  std::ifstream in(file);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
  Split split;
  try {
    split.train = j.at("train").get<std::vector<std::size_t>>();
    split.test = j.at("test").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
  for (const auto* idx : {&split.train, &split.test}) {
    for (std::size_t i : *idx) {
      require(i < n, ErrorCode::IndexOutOfRange,
              file.string() + ": split index " + std::to_string(i) + " out of range");
    }
  }
  return split;
}

void check_label_coverage(std::span<const int> labels) {
  if (labels.empty()) return;
  const int max_label = *std::max_element(labels.begin(), labels.end());
  std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
  for (int l : labels) seen[static_cast<std::size_t>(l)] = true;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) {
      throw Error(ErrorCode::LabelGap, "class id " + std::to_string(c) + " is unused but " +
                                           std::to_string(max_label) + " is present");
    }
  }
}

std::vector<std::vector<std::size_t>> nodes_by_class(std::span<const int> labels) {
  const int max_label = labels.empty() ? -1 : *std::max_element(labels.begin(), labels.end());
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  return out;
}

}  // namespace

std::size_t LabeledDataset::num_classes() const {
  if (labels.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

void LabeledDataset::validate() const {
  const std::size_t n = num_nodes();
  require(graph.n == n, ErrorCode::DimensionMismatch,
          "dataset: graph has " + std::to_string(graph.n) + " nodes, features " + std::to_string(n));
  require(labels.size() == n, ErrorCode::DimensionMismatch, "dataset: label count differs from n");
  graph.validate();
  for (int l : labels) require(l >= 0, ErrorCode::ParseError, "dataset: negative label");
  check_label_coverage(labels);
  std::vector<std::uint8_t> role(n, 0);
  for (std::size_t i : split.train) {
    require(i < n, ErrorCode::IndexOutOfRange, "dataset: train index out of range");
    require(role[i] == 0, ErrorCode::InvalidInput, "dataset: duplicate train index");
    role[i] = 1;
  }
  for (std::size_t i : split.test) {
    require(i < n, ErrorCode::IndexOutOfRange, "dataset: test index out of range");
    require(role[i] == 0, ErrorCode::InvalidInput,
            "dataset: node " + std::to_string(i) + " is in both train and test");
    role[i] = 2;
  }
}

SyntheticSpec SyntheticSpec::case1(std::uint64_t seed) {
  SyntheticSpec s;
  s.kind = SyntheticCase::GaussianFeatures;
  s.seed = seed;
  return s;
}

SyntheticSpec SyntheticSpec::case2(std::uint64_t seed) {
  SyntheticSpec s;
  s.kind = SyntheticCase::SbmTopology;
  s.seed = seed;
  return s;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
  require(spec.classes >= 1 && spec.n % spec.classes == 0, ErrorCode::InvalidInput,
          "synthetic: n must be divisible by the class count");
  for (double p : {spec.p_uniform, spec.p_intra, spec.p_inter}) {
    require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidInput, "synthetic: probability outside [0,1]");
  }
  const std::size_t n = spec.n;
  const std::size_t block = n / spec.classes;
  const Rng root(spec.seed);
  Rng topo_rng = root.split(0);
  Rng label_rng = root.split(1);
  Rng feat_rng = root.split(2);

  LabeledDataset ds;
  ds.labels.resize(n);
  if (spec.kind == SyntheticCase::GaussianFeatures) {
    for (std::size_t i = 0; i < n; ++i) ds.labels[i] = static_cast<int>(i / block);
    label_rng.shuffle(std::span<int>(ds.labels));
  } else {
    for (std::size_t i = 0; i < n; ++i) ds.labels[i] = static_cast<int>(i / block);
  }

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double p = spec.p_uniform;
      if (spec.kind == SyntheticCase::SbmTopology) {
        p = (i / block == j / block) ? spec.p_intra : spec.p_inter;
      }
      if (topo_rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }
  ds.graph = SparseGraph::from_edges(n, edges);

  ds.features = DenseMatrix(n, spec.d);
  for (double& v : ds.features.data()) v = feat_rng.normal();
  if (spec.kind == SyntheticCase::GaussianFeatures) {
    require(spec.d >= spec.classes, ErrorCode::InvalidInput,
            "synthetic: feature dimension must be at least the class count");
    // Scaled standard basis vectors: every pair of centers is
    // center_separation apart.
    const double offset = spec.center_separation / std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) {
      ds.features(i, static_cast<std::size_t>(ds.labels[i])) += offset;
    }
  }

  ds.split = make_per_class_split(ds.labels, spec.train_per_class, spec.test_per_class,
                                  root.split(3).seed());
  return ds;
}

LabeledDataset generate_case1(std::uint64_t seed) {
  return generate_synthetic(SyntheticSpec::case1(seed));
}

LabeledDataset generate_case2(std::uint64_t seed) {
  return generate_synthetic(SyntheticSpec::case2(seed));
}

Split make_per_class_split(std::span<const int> labels, std::size_t per_class_train,
                           std::size_t per_class_test, std::uint64_t seed) {
  Rng rng(seed);
  auto groups = nodes_by_class(labels);
  Split split;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    auto& nodes = groups[c];
    if (nodes.size() < per_class_train + per_class_test) {
      throw Error(ErrorCode::InsufficientNodes,
                  "split: class " + std::to_string(c) + " has " + std::to_string(nodes.size()) +
                      " nodes, needs " + std::to_string(per_class_train + per_class_test));
    }
    rng.shuffle(std::span<std::size_t>(nodes));
    split.train.insert(split.train.end(), nodes.begin(),
                       nodes.begin() + static_cast<std::ptrdiff_t>(per_class_train));
    split.test.insert(split.test.end(), nodes.begin() + static_cast<std::ptrdiff_t>(per_class_train),
                      nodes.begin() + static_cast<std::ptrdiff_t>(per_class_train + per_class_test));
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Split make_split(std::span<const int> labels, std::size_t labels_per_class, std::size_t test_size,
                 std::uint64_t seed) {
  Rng rng(seed);
  auto groups = nodes_by_class(labels);
  Split split;
  std::vector<std::uint8_t> taken(labels.size(), 0);
  for (std::size_t c = 0; c < groups.size(); ++c) {
    auto& nodes = groups[c];
    if (nodes.size() < labels_per_class) {
      throw Error(ErrorCode::InsufficientNodes,
                  "split: class " + std::to_string(c) + " has " + std::to_string(nodes.size()) +
                      " nodes, fewer than " + std::to_string(labels_per_class) + " labels per class");
    }
    rng.shuffle(std::span<std::size_t>(nodes));
    for (std::size_t p = 0; p < labels_per_class; ++p) {
      split.train.push_back(nodes[p]);
      taken[nodes[p]] = 1;
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (taken[i] == 0) rest.push_back(i);
  }
  if (rest.size() < test_size) {
    throw Error(ErrorCode::InsufficientNodes,
                "split: only " + std::to_string(rest.size()) + " nodes left for a test set of " +
                    std::to_string(test_size));
  }
  rng.shuffle(std::span<std::size_t>(rest));
  split.test.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(test_size));
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

LabeledDataset load_dataset(const fs::path& dir, LoadReport* report) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::MissingFile, "dataset directory not found: " + dir.string());
  }
  LoadReport local;
  LabeledDataset ds;
  ds.features = read_features(dir / "features.csv");
  const std::size_t n = ds.features.rows();
  const auto edges = read_edges(dir / "edges.tsv");
  SparseGraph::BuildStats stats;
  ds.graph = SparseGraph::from_edges(n, edges, &stats);
  local.self_loops_dropped = stats.self_loops_dropped;
  local.duplicate_edges = stats.duplicates_merged;
  ds.labels = read_labels(dir / "labels.tsv", n);
  check_label_coverage(ds.labels);
  if (fs::exists(dir / "split.json")) {
    ds.split = read_split(dir / "split.json", n);
    local.split_present = true;
  }
  ds.validate();
  if (report != nullptr) *report = local;
  return ds;
}

void write_edges(const SparseGraph& g, const fs::path& file) {
  auto out = open_output(file);
  for (const auto& [i, j] : g.undirected_edges()) out << i << '\t' << j << '\n';
}

void save_dataset(const LabeledDataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  write_edges(ds.graph, dir / "edges.tsv");
  {
    auto out = open_output(dir / "features.csv");
    for (std::size_t i = 0; i < ds.features.rows(); ++i) {
      const auto row = ds.features.row(i);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c > 0) out << ',';
        out << format_double(row[c]);
      }
      out << '\n';
    }
  }
  {
    auto out = open_output(dir / "labels.tsv");
    for (std::size_t i = 0; i < ds.labels.size(); ++i) out << i << '\t' << ds.labels[i] << '\n';
  }
  {
    auto out = open_output(dir / "split.json");
    nlohmann::json j;
    j["train"] = ds.split.train;
    j["test"] = ds.split.test;
    out << j.dump() << '\n';
  }
}

}  // namespace amgcn
