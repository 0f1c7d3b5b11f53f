#include "zsml/wordspace.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "zsml/text_format.hpp"

namespace zsml {

namespace {

std::string join_labels(const std::vector<std::string>& vocabulary,
                        const LabelSet& subset) {
  std::string out = "{";
  for (std::size_t i = 0; i < subset.members().size(); ++i) {
    if (i > 0) out += ", ";
    out += vocabulary[static_cast<std::size_t>(subset.members()[i])];
  }
  return out + "}";
}

} // namespace

LabelSet::LabelSet(std::vector<int> members, int vocab_size)
    : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i > 0 && members_[i] == members_[i - 1])
      throw validation_error("LabelSet: duplicate label index " +
                             std::to_string(members_[i]));
    if (members_[i] < 0 || (vocab_size >= 0 && members_[i] >= vocab_size))
      throw validation_error("LabelSet: label index " +
                             std::to_string(members_[i]) + " out of range");
  }
}

LabelSet LabelSet::from_bitmask(std::uint32_t mask) {
  LabelSet s;
  for (int bit = 0; mask != 0; ++bit, mask >>= 1)
    if (mask & 1u) s.members_.push_back(bit);
  return s;
}

bool LabelSet::contains(int label) const {
  return std::binary_search(members_.begin(), members_.end(), label);
}

std::uint32_t LabelSet::bitmask() const {
  std::uint32_t mask = 0;
  for (int m : members_) {
    if (m >= 32)
      throw validation_error("LabelSet: index " + std::to_string(m) +
                             " does not fit in a 32-bit mask");
    mask |= (1u << m);
  }
  return mask;
}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim <= 0)
    throw validation_error("EmbeddingTable: dim must be positive");
}

void EmbeddingTable::insert(const std::string& label, Vector vec) {
  if (index_.count(label))
    throw validation_error("EmbeddingTable: duplicate label '" + label + "'");
  if (vec.size() != dim_)
    throw validation_error("EmbeddingTable: vector for '" + label + "' has " +
                           std::to_string(vec.size()) + " components, expected " +
                           std::to_string(dim_));
  if (!vec.allFinite())
    throw validation_error("EmbeddingTable: non-finite component for '" + label + "'");
  if (vec.norm() == Scalar(0))
    throw validation_error("EmbeddingTable: zero vector for label '" + label + "'");
  index_.emplace(label, size());
  labels_.push_back(label);
  vectors_.push_back(std::move(vec));
}

bool EmbeddingTable::contains(const std::string& label) const {
  return index_.count(label) != 0;
}

int EmbeddingTable::index_of(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

const Vector& EmbeddingTable::vec(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end())
    throw validation_error("EmbeddingTable: unknown label '" + label + "'");
  return vectors_[static_cast<std::size_t>(it->second)];
}

Matrix EmbeddingTable::rows_for(const std::vector<std::string>& labels) const {
  Matrix out(static_cast<Eigen::Index>(labels.size()), dim_);
  for (std::size_t i = 0; i < labels.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = vec(labels[i]).transpose();
  return out;
}

Vector synthesize_prototype(const EmbeddingTable& table,
                            const std::vector<std::string>& vocabulary,
                            const LabelSet& subset) {
  if (subset.empty())
    throw validation_error("synthesize_prototype: empty label set");
  Vector sum = Vector::Zero(table.dim());
  for (int m : subset.members()) {
    if (m < 0 || m >= static_cast<int>(vocabulary.size()))
      throw validation_error("synthesize_prototype: label index " +
                             std::to_string(m) + " outside vocabulary");
    sum += table.vec(vocabulary[static_cast<std::size_t>(m)]);
  }
  return sum;
}

Matrix synthesize_targets(const EmbeddingTable& table,
                          const std::vector<std::string>& vocabulary,
                          const BinaryMatrix& labels) {
  if (labels.cols() != static_cast<Eigen::Index>(vocabulary.size()))
    throw validation_error("synthesize_targets: label matrix has " +
                           std::to_string(labels.cols()) +
                           " columns, vocabulary has " +
                           std::to_string(vocabulary.size()));
  const Matrix embeddings = table.rows_for(vocabulary);
  Matrix targets = Matrix::Zero(labels.rows(), table.dim());
  for (Eigen::Index i = 0; i < labels.rows(); ++i)
    for (Eigen::Index j = 0; j < labels.cols(); ++j)
      if (labels(i, j) != 0) targets.row(i) += embeddings.row(j);
  return targets;
}

PrototypeSet build_power_set(const EmbeddingTable& table,
                             const std::vector<std::string>& vocabulary,
                             int cap) {
  const int m = static_cast<int>(vocabulary.size());
  if (m < 1) throw validation_error("build_power_set: empty vocabulary");
  if (m > cap)
    throw validation_error("build_power_set: " + std::to_string(m) +
                           " labels would materialize 2^" + std::to_string(m) +
                           " prototypes; the cap is " + std::to_string(cap) +
                           " labels");

  const Matrix embeddings = table.rows_for(vocabulary);
  const std::uint32_t count = (1u << m) - 1u;

  PrototypeSet set;
  set.prototypes.resize(count, table.dim());
  set.label_matrix.setZero(count, m);
  set.subsets.reserve(count);

  // Row for mask = row for (mask without its top bit) + that bit's
  // embedding. This reproduces the ascending-index summation order of
  // synthesize_prototype exactly, so the two routes agree bitwise.
  for (std::uint32_t mask = 1; mask <= count; ++mask) {
    const int top = std::bit_width(mask) - 1;
    const std::uint32_t rest = mask & ~(1u << top);
    if (rest == 0)
      set.prototypes.row(mask - 1) = embeddings.row(top);
    else
      set.prototypes.row(mask - 1) =
          set.prototypes.row(rest - 1) + embeddings.row(top);
    for (int j = 0; j < m; ++j)
      if (mask & (1u << j)) set.label_matrix(mask - 1, j) = 1;
    set.subsets.push_back(LabelSet::from_bitmask(mask));
    if (set.prototypes.row(mask - 1).norm() == Scalar(0))
      throw validation_error(
          "build_power_set: embeddings cancel to the zero vector for subset " +
          join_labels(vocabulary, set.subsets.back()));
  }
  return set;
}

namespace {

bool comment_line(const std::string& line) {
  return !line.empty() && line[0] == '#';
}

} // namespace

EmbeddingTable load_embeddings(std::istream& in, const std::string& source,
                               const std::vector<std::string>& vocabulary) {
  std::string line;
  int line_no = 0;

  // Header, after any leading comment lines.
  long long count = -1;
  int dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (comment_line(line)) continue;
    std::istringstream header(line);
    if (!(header >> count >> dim) || count < 0 || dim <= 0 ||
        (header >> std::ws, !header.eof()))
      throw parse_error(source, line_no, "expected header '<count> <dim>'");
    break;
  }
  if (count < 0) throw parse_error(source, line_no, "missing header line");

  std::unordered_map<std::string, Vector> wanted;
  std::unordered_map<std::string, int> requested;
  for (const auto& label : vocabulary) requested.emplace(label, 0);

  for (long long row = 0; row < count; ++row) {
    if (!std::getline(in, line))
      throw parse_error(source, line_no + 1,
                        "unexpected end of file; header promised " +
                            std::to_string(count) + " entries");
    ++line_no;
    std::istringstream ls(line);
    std::string label;
    if (!(ls >> label))
      throw parse_error(source, line_no, "missing label");
    Vector v(dim);
    for (int j = 0; j < dim; ++j) {
      if (!(ls >> v[j]))
        throw parse_error(source, line_no,
                          "expected " + std::to_string(dim) +
                              " components for '" + label + "', found " +
                              std::to_string(j));
      if (!std::isfinite(v[j]))
        throw parse_error(source, line_no,
                          "non-finite component for '" + label + "'");
    }
    std::string extra;
    if (ls >> extra)
      throw parse_error(source, line_no,
                        "trailing token '" + extra + "' after " +
                            std::to_string(dim) + " components");
    auto it = requested.find(label);
    if (it == requested.end()) continue;
    if (++it->second > 1)
      throw parse_error(source, line_no, "duplicate entry for label '" + label + "'");
    if (v.norm() == Scalar(0))
      throw validation_error(source + ": zero vector for label '" + label + "'");
    wanted.emplace(label, std::move(v));
  }

  EmbeddingTable table(dim);
  for (const auto& label : vocabulary) {
    auto it = wanted.find(label);
    if (it == wanted.end())
      throw validation_error("label not in embedding file: '" + label + "'");
    table.insert(label, std::move(it->second));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::string& path,
                               const std::vector<std::string>& vocabulary) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open embedding file: " + path);
  return load_embeddings(in, path, vocabulary);
}

void save_embeddings(const EmbeddingTable& table, std::ostream& out,
                     const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << "\n";
  out << table.size() << " " << table.dim() << "\n";
  for (int i = 0; i < table.size(); ++i) {
    out << table.labels()[static_cast<std::size_t>(i)];
    const Vector& v = table.vec(i);
    for (Eigen::Index j = 0; j < v.size(); ++j)
      out << " " << format_double(v[j]);
    out << "\n";
  }
}

void save_embeddings(const EmbeddingTable& table, const std::string& path,
                     const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write embedding file: " + path);
  save_embeddings(table, out, comments);
}

} // namespace zsml
