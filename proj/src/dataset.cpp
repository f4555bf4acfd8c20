#include "sfzsl/dataset.hpp"

#include "sfzsl/rng.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace sfzsl {

bool all_finite(const Matrix& m) { return m.allFinite(); }

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty())
    throw ParseError("non-numeric cell '" + cell + "'", line_no);
  if (!std::isfinite(value)) throw ParseError("non-finite cell '" + cell + "'", line_no);
  return value;
}

struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvFile read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CsvFile csv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (csv.header.empty()) {
      csv.header = split_csv_line(line);
      continue;
    }
    csv.rows.push_back(split_csv_line(line));
    csv.line_numbers.push_back(line_no);
  }
  if (csv.header.empty()) throw ParseError("empty input: " + path.string(), 0);
  return csv;
}

void check_indexed_header(const std::vector<std::string>& header, std::size_t fixed,
                          char prefix, const std::string& what) {
  for (std::size_t j = fixed; j < header.size(); ++j) {
    const std::string expected = prefix + std::to_string(j - fixed);
    if (header[j] != expected)
      throw ParseError(what + " header column " + std::to_string(j) + " is '" + header[j] +
                           "', expected '" + expected + "'",
                       1);
  }
}

void write_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

FeatureDataset FeatureDataset::subset(const std::vector<std::size_t>& indices) const {
  FeatureDataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    out.sample_ids.push_back(sample_ids.at(i));
    out.labels.push_back(labels.at(i));
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

std::optional<std::size_t> ClassAttributeTable::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < class_names.size(); ++i)
    if (class_names[i] == name) return i;
  return std::nullopt;
}

std::size_t ClassAttributeTable::require_index(const std::string& name) const {
  if (auto idx = index_of(name)) return *idx;
  throw ValidationError("class '" + name + "' is not in the attribute table");
}

Matrix ClassAttributeTable::rows_for(const std::vector<std::string>& names) const {
  Matrix out(static_cast<Eigen::Index>(names.size()), attributes.cols());
  for (std::size_t i = 0; i < names.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        attributes.row(static_cast<Eigen::Index>(require_index(names[i])));
  return out;
}

FeatureDataset load_features(const std::filesystem::path& path) {
  const CsvFile csv = read_csv(path);
  if (csv.header.size() < 3 || csv.header[0] != "id" || csv.header[1] != "label")
    throw ParseError("features header must be id,label,f0,...", 1);
  check_indexed_header(csv.header, 2, 'f', "features");
  if (csv.rows.empty()) throw ParseError("empty input: no feature rows in " + path.string(), 0);

  const std::size_t d = csv.header.size() - 2;
  FeatureDataset data;
  data.features.resize(static_cast<Eigen::Index>(csv.rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& cells = csv.rows[r];
    const std::size_t line_no = csv.line_numbers[r];
    if (cells.size() != d + 2)
      throw ParseError("expected " + std::to_string(d + 2) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no);
    if (cells[0].empty()) throw ParseError("empty sample id", line_no);
    data.sample_ids.push_back(cells[0]);
    data.labels.push_back(cells[1]);
    for (std::size_t j = 0; j < d; ++j)
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          parse_number(cells[j + 2], line_no);
  }
  return data;
}

ClassAttributeTable load_attributes(const std::filesystem::path& path) {
  const CsvFile csv = read_csv(path);
  if (csv.header.size() < 2 || csv.header[0] != "class")
    throw ParseError("attributes header must be class,a0,...", 1);
  check_indexed_header(csv.header, 1, 'a', "attributes");
  if (csv.rows.empty()) throw ParseError("empty input: no class rows in " + path.string(), 0);

  const std::size_t k = csv.header.size() - 1;
  ClassAttributeTable table;
  table.attributes.resize(static_cast<Eigen::Index>(csv.rows.size()), static_cast<Eigen::Index>(k));
  std::unordered_set<std::string> names;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& cells = csv.rows[r];
    const std::size_t line_no = csv.line_numbers[r];
    if (cells.size() != k + 1)
      throw ParseError("expected " + std::to_string(k + 1) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no);
    if (cells[0].empty()) throw ParseError("empty class name", line_no);
    if (!names.insert(cells[0]).second)
      throw ParseError("duplicate class name '" + cells[0] + "'", line_no);
    table.class_names.push_back(cells[0]);
    for (std::size_t j = 0; j < k; ++j)
      table.attributes(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          parse_number(cells[j + 1], line_no);
  }
  return table;
}

SplitSpec load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("split file is not valid JSON: ") + e.what(), 0);
  }
  SplitSpec split;
  for (const char* key : {"seen", "unseen"}) {
    if (!doc.contains(key) || !doc[key].is_array())
      throw ParseError(std::string("split file needs an array '") + key + "'", 0);
    std::set<std::string> seen_names;
    auto& list = std::string(key) == "seen" ? split.seen : split.unseen;
    for (const auto& v : doc[key]) {
      if (!v.is_string()) throw ParseError(std::string("non-string entry in '") + key + "'", 0);
      const auto name = v.get<std::string>();
      if (!seen_names.insert(name).second)
        throw ParseError("duplicate class name '" + name + "' in '" + key + "'", 0);
      list.push_back(name);
    }
  }
  return split;
}

void save_features(const FeatureDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "id,label";
  for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.sample_ids[i] << ',' << data.labels[i];
    for (std::size_t j = 0; j < data.dim(); ++j)
      out << ',' << format_double(data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out << '\n';
  }
  write_checked(out, path);
}

void save_attributes(const ClassAttributeTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "class";
  for (std::size_t j = 0; j < table.dim(); ++j) out << ",a" << j;
  out << '\n';
  for (std::size_t i = 0; i < table.num_classes(); ++i) {
    out << table.class_names[i];
    for (std::size_t j = 0; j < table.dim(); ++j)
      out << ',' << format_double(table.attributes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out << '\n';
  }
  write_checked(out, path);
}

void save_split(const SplitSpec& split, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  nlohmann::json doc{{"seen", split.seen}, {"unseen", split.unseen}};
  out << doc.dump(2) << '\n';
  write_checked(out, path);
}

ClassAttributeTable normalize_attributes(ClassAttributeTable table) {
  for (Eigen::Index i = 0; i < table.attributes.rows(); ++i) {
    const double norm = table.attributes.row(i).norm();
    if (norm == 0.0)
      throw ValidationError("class '" + table.class_names[static_cast<std::size_t>(i)] +
                            "' has an all-zero attribute row; cannot normalize");
    table.attributes.row(i) /= norm;
  }
  return table;
}

std::vector<std::string> validate_bundle(const FeatureDataset& features,
                                         const ClassAttributeTable& table,
                                         const SplitSpec& split,
                                         std::optional<std::size_t> expected_dim) {
  std::vector<std::string> issues;
  if (features.size() == 0) issues.push_back("feature dataset is empty");
  if (features.dim() == 0) issues.push_back("feature dimension is zero");
  if (features.labels.size() != features.size() ||
      static_cast<std::size_t>(features.features.rows()) != features.size())
    issues.push_back("feature dataset has inconsistent row counts");
  if (expected_dim && features.dim() != *expected_dim)
    issues.push_back("dimension mismatch: features have d=" + std::to_string(features.dim()) +
                     ", expected " + std::to_string(*expected_dim));
  if (!features.features.allFinite()) issues.push_back("features contain non-finite values");

  if (table.dim() < 2) issues.push_back("attribute dimension K must be at least 2");
  for (std::size_t a = 0; a < table.num_classes(); ++a)
    for (std::size_t b = a + 1; b < table.num_classes(); ++b)
      if (table.attributes.row(static_cast<Eigen::Index>(a)) ==
          table.attributes.row(static_cast<Eigen::Index>(b)))
        issues.push_back("identical attribute rows: '" + table.class_names[a] + "' and '" +
                         table.class_names[b] + "'");

  if (split.seen.size() < 2) issues.push_back("split needs at least 2 seen classes");
  if (split.unseen.empty()) issues.push_back("split needs at least 1 unseen class");
  const std::set<std::string> seen(split.seen.begin(), split.seen.end());
  const std::set<std::string> unseen(split.unseen.begin(), split.unseen.end());
  for (const auto& name : split.seen)
    if (unseen.count(name)) issues.push_back("seen/unseen overlap: '" + name + "'");
  for (const auto* list : {&split.seen, &split.unseen})
    for (const auto& name : *list)
      if (!table.index_of(name))
        issues.push_back("split class '" + name + "' is not in the attribute table");

  std::set<std::string> reported;
  for (std::size_t i = 0; i < features.labels.size(); ++i) {
    const auto& label = features.labels[i];
    if (label.empty() || reported.count(label)) continue;
    if (!table.index_of(label)) {
      issues.push_back("unknown label '" + label + "'");
      reported.insert(label);
    } else if (!seen.count(label) && !unseen.count(label)) {
      issues.push_back("label '" + label + "' is in neither the seen nor the unseen split");
      reported.insert(label);
    }
  }
  return issues;
}

SyntheticBundle gen_synthetic(const SynthSpec& spec) {
  if (spec.n_seen < 1 || spec.n_unseen < 1 || spec.dim < 1 || spec.attr_dim < 1 ||
      spec.samples_per_class < 1)
    throw ValidationError("synthetic spec counts must all be at least 1");
  if (spec.dim < spec.attr_dim) throw ValidationError("synthetic spec requires d >= K");
  if (!(spec.noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be nonnegative");

  Rng rng(spec.seed);
  const std::size_t n_classes = spec.n_seen + spec.n_unseen;
  const auto C = static_cast<Eigen::Index>(n_classes);
  const auto K = static_cast<Eigen::Index>(spec.attr_dim);
  const auto d = static_cast<Eigen::Index>(spec.dim);

  SyntheticBundle out;
  char name[32];
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::snprintf(name, sizeof name, "c%02zu", c);
    out.table.class_names.emplace_back(name);
    (c < spec.n_seen ? out.split.seen : out.split.unseen).emplace_back(name);
  }

  // Attributes in [0, 1) before normalization, so they stay valid BCE targets.
  out.table.attributes.resize(C, K);
  for (Eigen::Index c = 0; c < C; ++c) {
    do {
      for (Eigen::Index k = 0; k < K; ++k) out.table.attributes(c, k) = rng.uniform();
    } while (out.table.attributes.row(c).norm() == 0.0);
  }
  out.table = normalize_attributes(std::move(out.table));

  Matrix map(d, K);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < K; ++k) map(i, k) = rng.normal();
  const Matrix means = out.table.attributes * map.transpose();  // C x d

  const std::size_t n_total = n_classes * spec.samples_per_class;
  out.features.features.resize(static_cast<Eigen::Index>(n_total), d);
  std::size_t row = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
      std::snprintf(name, sizeof name, "x%05zu", row);
      out.features.sample_ids.emplace_back(name);
      out.features.labels.push_back(out.table.class_names[c]);
      for (Eigen::Index j = 0; j < d; ++j)
        out.features.features(static_cast<Eigen::Index>(row), j) =
            means(static_cast<Eigen::Index>(c), j) + spec.noise_sigma * rng.normal();
    }
  }
  return out;
}

std::vector<std::size_t> rows_with_labels(const FeatureDataset& data,
                                          const std::vector<std::string>& classes) {
  const std::set<std::string> wanted(classes.begin(), classes.end());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (wanted.count(data.labels[i])) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> rows_unlabeled_or(const FeatureDataset& data,
                                           const std::vector<std::string>& classes) {
  const std::set<std::string> wanted(classes.begin(), classes.end());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.labels[i].empty() || wanted.count(data.labels[i])) rows.push_back(i);
  return rows;
}

}  // namespace sfzsl
