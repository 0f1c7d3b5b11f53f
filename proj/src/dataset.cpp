#include "zsml/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "zsml/text_format.hpp"

namespace zsml {

std::string to_string(Split split) {
  return split == Split::source ? "source" : "target";
}

void Dataset::validate() const {
  const Eigen::Index n = features.rows();
  if (static_cast<Eigen::Index>(ids.size()) != n || labels.rows() != n)
    throw validation_error("Dataset: id/feature/label row counts disagree");
  if (labels.cols() != static_cast<Eigen::Index>(vocabulary.size()))
    throw validation_error("Dataset: label columns do not match vocabulary");
  if (!features.allFinite())
    throw validation_error("Dataset: non-finite feature");
  for (Eigen::Index i = 0; i < labels.rows(); ++i)
    for (Eigen::Index j = 0; j < labels.cols(); ++j)
      if (labels(i, j) != 0 && labels(i, j) != 1)
        throw validation_error("Dataset: label entry is not 0/1");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding spaces
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos
                         ? std::string()
                         : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;  // 1-based line numbers, for error messages
};

CsvFile read_csv(std::istream& in, const std::string& source) {
  CsvFile csv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (csv.header.empty()) {
      csv.header = split_csv_line(line);
      continue;
    }
    csv.rows.push_back(split_csv_line(line));
    csv.row_lines.push_back(line_no);
    if (csv.rows.back().size() != csv.header.size())
      throw parse_error(source, line_no,
                        "expected " + std::to_string(csv.header.size()) +
                            " fields, found " +
                            std::to_string(csv.rows.back().size()));
  }
  if (csv.header.empty())
    throw parse_error(source, line_no, "missing header row");
  return csv;
}

double parse_float_field(const std::string& field, const std::string& source,
                         int line_no, const std::string& column) {
  double v;
  if (!parse_double(field, v))
    throw parse_error(source, line_no,
                      "cannot parse '" + field + "' in column " + column);
  if (!std::isfinite(v))
    throw parse_error(source, line_no,
                      "non-finite value in column " + column);
  return v;
}

int parse_label_field(const std::string& field, const std::string& source,
                      int line_no, const std::string& column) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  throw parse_error(source, line_no,
                    "label column " + column + " must be 0 or 1, got '" +
                        field + "'");
}

void check_unique_ids(const std::vector<std::string>& ids,
                      const std::vector<int>& row_lines,
                      const std::string& source) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty())
      throw parse_error(source, row_lines[i], "empty instance id");
    if (!seen.insert(ids[i]).second)
      throw parse_error(source, row_lines[i],
                        "duplicate instance id '" + ids[i] + "'");
  }
}

} // namespace

Dataset load_dataset(std::istream& in, const std::string& source, Split split) {
  const CsvFile csv = read_csv(in, source);
  const auto& header = csv.header;
  if (header.empty() || header[0] != "id")
    throw parse_error(source, 1, "first header column must be 'id'");

  // Feature columns f1..fD come first, then label columns l_<name>.
  std::size_t feat_end = 1;
  while (feat_end < header.size() && header[feat_end].rfind("l_", 0) != 0)
    ++feat_end;
  const std::size_t n_features = feat_end - 1;
  const std::size_t n_labels = header.size() - feat_end;
  if (n_features == 0)
    throw parse_error(source, 1, "no feature columns before label columns");
  if (n_labels == 0)
    throw parse_error(source, 1, "no 'l_<label>' columns in header");
  for (std::size_t j = 1; j < feat_end; ++j)
    if (header[j] != "f" + std::to_string(j))
      throw parse_error(source, 1,
                        "feature column " + std::to_string(j) +
                            " must be named 'f" + std::to_string(j) +
                            "', got '" + header[j] + "'");

  Dataset ds;
  ds.split = split;
  for (std::size_t j = feat_end; j < header.size(); ++j) {
    const std::string name = header[j].substr(2);
    if (name.empty()) throw parse_error(source, 1, "empty label name");
    ds.vocabulary.push_back(name);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(csv.rows.size());
  ds.features.resize(n, static_cast<Eigen::Index>(n_features));
  ds.labels.resize(n, static_cast<Eigen::Index>(n_labels));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    const int line_no = csv.row_lines[static_cast<std::size_t>(i)];
    ds.ids.push_back(row[0]);
    for (std::size_t j = 0; j < n_features; ++j)
      ds.features(i, static_cast<Eigen::Index>(j)) =
          parse_float_field(row[1 + j], source, line_no, header[1 + j]);
    for (std::size_t j = 0; j < n_labels; ++j)
      ds.labels(i, static_cast<Eigen::Index>(j)) =
          parse_label_field(row[feat_end + j], source, line_no,
                            header[feat_end + j]);
  }
  check_unique_ids(ds.ids, csv.row_lines, source);
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::string& path, Split split) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open dataset file: " + path);
  return load_dataset(in, path, split);
}

void save_dataset(const Dataset& dataset, std::ostream& out,
                  const std::vector<std::string>& comments) {
  dataset.validate();
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "id";
  for (int j = 1; j <= dataset.feature_dim(); ++j) out << ",f" << j;
  for (const auto& label : dataset.vocabulary) out << ",l_" << label;
  out << "\n";
  for (Eigen::Index i = 0; i < dataset.features.rows(); ++i) {
    out << dataset.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < dataset.features.cols(); ++j)
      out << "," << format_double(dataset.features(i, j));
    for (Eigen::Index j = 0; j < dataset.labels.cols(); ++j)
      out << "," << dataset.labels(i, j);
    out << "\n";
  }
}

void save_dataset(const Dataset& dataset, const std::string& path,
                  const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write dataset file: " + path);
  save_dataset(dataset, out, comments);
}

LabelFile load_label_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open label file: " + path);
  const CsvFile csv = read_csv(in, path);
  const auto& header = csv.header;
  if (header.empty() || header[0] != "id")
    throw parse_error(path, 1, "first header column must be 'id'");

  LabelFile lf;
  std::vector<std::size_t> label_cols;
  for (std::size_t j = 1; j < header.size(); ++j)
    if (header[j].rfind("l_", 0) == 0) {
      lf.vocabulary.push_back(header[j].substr(2));
      label_cols.push_back(j);
    }
  if (label_cols.empty())
    throw parse_error(path, 1, "no 'l_<label>' columns in header");

  const Eigen::Index n = static_cast<Eigen::Index>(csv.rows.size());
  lf.labels.resize(n, static_cast<Eigen::Index>(label_cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    const int line_no = csv.row_lines[static_cast<std::size_t>(i)];
    lf.ids.push_back(row[0]);
    for (std::size_t j = 0; j < label_cols.size(); ++j)
      lf.labels(i, static_cast<Eigen::Index>(j)) = parse_label_field(
          row[label_cols[j]], path, line_no, header[label_cols[j]]);
  }
  check_unique_ids(lf.ids, csv.row_lines, path);
  return lf;
}

ScoreFile load_score_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open score file: " + path);
  const CsvFile csv = read_csv(in, path);
  const auto& header = csv.header;
  if (header.empty() || header[0] != "id")
    throw parse_error(path, 1, "first header column must be 'id'");

  ScoreFile sf;
  std::vector<std::size_t> cols;
  for (std::size_t j = 1; j < header.size(); ++j)
    if (header[j].rfind("s_", 0) == 0) {
      sf.vocabulary.push_back(header[j].substr(2));
      cols.push_back(j);
    }
  if (cols.empty())
    throw parse_error(path, 1, "no 's_<label>' columns in header");

  const Eigen::Index n = static_cast<Eigen::Index>(csv.rows.size());
  sf.scores.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    const int line_no = csv.row_lines[static_cast<std::size_t>(i)];
    sf.ids.push_back(row[0]);
    for (std::size_t j = 0; j < cols.size(); ++j)
      sf.scores(i, static_cast<Eigen::Index>(j)) =
          parse_float_field(row[cols[j]], path, line_no, header[cols[j]]);
  }
  check_unique_ids(sf.ids, csv.row_lines, path);
  return sf;
}

void save_label_csv(const std::vector<std::string>& ids,
                    const BinaryMatrix& labels,
                    const std::vector<std::string>& vocabulary,
                    const std::string& path,
                    const std::vector<std::string>& comments) {
  if (static_cast<Eigen::Index>(ids.size()) != labels.rows() ||
      static_cast<Eigen::Index>(vocabulary.size()) != labels.cols())
    throw validation_error("save_label_csv: shape mismatch");
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write label file: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "id";
  for (const auto& label : vocabulary) out << ",l_" << label;
  out << "\n";
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < labels.cols(); ++j)
      out << "," << labels(i, j);
    out << "\n";
  }
}

void save_score_csv(const std::vector<std::string>& ids, const Matrix& scores,
                    const std::vector<std::string>& vocabulary,
                    const std::string& path,
                    const std::vector<std::string>& comments) {
  if (static_cast<Eigen::Index>(ids.size()) != scores.rows() ||
      static_cast<Eigen::Index>(vocabulary.size()) != scores.cols())
    throw validation_error("save_score_csv: shape mismatch");
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write score file: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "id";
  for (const auto& label : vocabulary) out << ",s_" << label;
  out << "\n";
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
      out << "," << format_double(scores(i, j));
    out << "\n";
  }
}

void save_embedding_csv(const std::vector<std::string>& ids, const Matrix& rows,
                        const std::string& path,
                        const std::vector<std::string>& comments) {
  if (static_cast<Eigen::Index>(ids.size()) != rows.rows())
    throw validation_error("save_embedding_csv: shape mismatch");
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write file: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "id";
  for (Eigen::Index j = 1; j <= rows.cols(); ++j) out << ",y" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < rows.cols(); ++j)
      out << "," << format_double(rows(i, j));
    out << "\n";
  }
}

} // namespace zsml
