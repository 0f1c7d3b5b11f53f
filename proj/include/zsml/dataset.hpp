#ifndef ZSML_DATASET_HPP
#define ZSML_DATASET_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zsml/errors.hpp"
#include "zsml/types.hpp"

namespace zsml {

enum class Split { source, target };

std::string to_string(Split split);

// Instance features plus ground-truth labels over an ordered vocabulary.
// CSV layout: optional leading '#' comments, then a header
// "id,f1,...,fD,l_<label1>,...,l_<labelm>", then one row per instance with
// 0/1 label columns.
struct Dataset {
  std::vector<std::string> ids;
  Matrix features;       // n x feature_dim
  BinaryMatrix labels;   // n x m
  std::vector<std::string> vocabulary;
  Split split = Split::target;

  int instance_count() const { return static_cast<int>(features.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  int label_count() const { return static_cast<int>(vocabulary.size()); }

  void validate() const;
};

Dataset load_dataset(std::istream& in, const std::string& source, Split split);
Dataset load_dataset(const std::string& path, Split split);

void save_dataset(const Dataset& dataset, std::ostream& out,
                  const std::vector<std::string>& comments = {});
void save_dataset(const Dataset& dataset, const std::string& path,
                  const std::vector<std::string>& comments = {});

// Labels-only CSV: "id,l_<label1>,...,l_<labelm>" with 0/1 entries, as
// written by the predict/run commands. Also accepts a full dataset CSV, in
// which case feature columns are ignored.
struct LabelFile {
  std::vector<std::string> ids;
  BinaryMatrix labels;
  std::vector<std::string> vocabulary;
};

LabelFile load_label_csv(const std::string& path);

// Scores CSV: "id,s_<label1>,...,s_<labelm>" with one float per label.
struct ScoreFile {
  std::vector<std::string> ids;
  Matrix scores;
  std::vector<std::string> vocabulary;
};

ScoreFile load_score_csv(const std::string& path);

void save_label_csv(const std::vector<std::string>& ids,
                    const BinaryMatrix& labels,
                    const std::vector<std::string>& vocabulary,
                    const std::string& path,
                    const std::vector<std::string>& comments = {});
void save_score_csv(const std::vector<std::string>& ids, const Matrix& scores,
                    const std::vector<std::string>& vocabulary,
                    const std::string& path,
                    const std::vector<std::string>& comments = {});

// Plain matrix CSV with an id column, used for predicted embeddings:
// "id,y1,...,yD".
void save_embedding_csv(const std::vector<std::string>& ids, const Matrix& rows,
                        const std::string& path,
                        const std::vector<std::string>& comments = {});

} // namespace zsml

#endif // ZSML_DATASET_HPP
