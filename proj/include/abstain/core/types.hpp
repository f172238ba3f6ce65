#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace abstain::core {

// Ordered list of discrete accuracy values a_0 < ... < a_{C-1}. The default
// mirrors the VQA soft-accuracy value set.
class ClassMap {
 public:
  ClassMap() : values_{0.0, 0.3, 0.6, 0.9, 1.0} {}
  explicit ClassMap(std::vector<double> values);

  static constexpr double kTolerance = 1e-6;

  int size() const { return static_cast<int>(values_.size()); }
  double value(int c) const { return values_[static_cast<std::size_t>(c)]; }
  const std::vector<double>& values() const { return values_; }

  // Index c with |accuracy - a_c| <= 1e-6; throws if no class is in tolerance.
  int discretize(double accuracy) const;
  bool contains(double accuracy) const;

  bool operator==(const ClassMap& other) const { return values_ == other.values_; }

 private:
  std::vector<double> values_;
};

// One QA sample: the answering model's hidden state h plus question/answer
// embeddings q, a, and the graded accuracy of the generated answer.
// Features are stored in 32-bit precision, matching on-disk dumps.
struct FeatureRecord {
  std::string id;
  std::string question_text;  // may be empty
  std::string answer_text;    // may be empty
  Eigen::VectorXf h;
  Eigen::VectorXf q;
  Eigen::VectorXf a;
  double accuracy = 0.0;
  int class_index = 0;
};

enum class FeatureEncoding { kInlineJson, kPackedBinary };

std::string to_string(FeatureEncoding encoding);
FeatureEncoding feature_encoding_from_string(const std::string& s);

struct DatasetManifest {
  int d_h = 0;
  int d_q = 0;
  int d_a = 0;
  ClassMap class_map;
  std::int64_t record_count = 0;
  FeatureEncoding feature_encoding = FeatureEncoding::kInlineJson;
  std::string checksum;       // hex FNV-1a of the feature payload
  std::string features_file;  // packed-binary sidecar, relative to the manifest
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<FeatureRecord> records;
};

struct SplitSpec {
  double train_fraction = 0.7;
  double val_fraction = 0.15;
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
};

}  // namespace abstain::core
