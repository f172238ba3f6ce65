#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace abstain {

// Named per-sample score columns aligned to record ids. Serialized as CSV
// with header `id,<source1>,<source2>,...`.
class ScoreSet {
 public:
  ScoreSet() = default;
  explicit ScoreSet(std::vector<std::string> ids);

  static ScoreSet load_csv(const std::filesystem::path& path);
  void save_csv(const std::filesystem::path& path) const;

  void add_column(const std::string& name, std::vector<double> values);
  bool has_column(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  std::size_t size() const { return ids_.size(); }

  // Value lookup by record id; missing id is a hard error.
  double value(const std::string& name, const std::string& id) const;

  // Reorders/filters rows to the given ids; every id must be present.
  ScoreSet aligned_to(const std::vector<std::string>& ids) const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> id_index_;
  std::vector<std::string> column_names_;
  std::unordered_map<std::string, std::vector<double>> columns_;
};

}  // namespace abstain
