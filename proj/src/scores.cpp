#include "abstain/scores.hpp"

#include <charconv>
#include <sstream>

#include "abstain/common/error.hpp"
#include "abstain/common/fs.hpp"
#include "abstain/common/strings.hpp"

namespace abstain {

ScoreSet::ScoreSet(std::vector<std::string> ids) : ids_(std::move(ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!id_index_.emplace(ids_[i], i).second)
      throw ValidationError("duplicate id in score set: " + ids_[i]);
  }
}

ScoreSet ScoreSet::load_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty score set: " + path.string());
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "id")
    throw ValidationError("score set header must start with 'id': " + path.string());

  std::vector<std::string> ids;
  std::vector<std::vector<double>> cols(header.size() - 1);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("bad column count at " + path.string() + ":" +
                            std::to_string(line_no));
    ids.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      const std::string& f = fields[c];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw ValidationError("bad number '" + f + "' at " + path.string() + ":" +
                              std::to_string(line_no));
      cols[c - 1].push_back(v);
    }
  }

  ScoreSet set(std::move(ids));
  for (std::size_t c = 1; c < header.size(); ++c) {
    set.add_column(header[c], std::move(cols[c - 1]));
  }
  return set;
}

void ScoreSet::save_csv(const std::filesystem::path& path) const {
  std::string out = "id";
  for (const std::string& name : column_names_) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    out += ids_[i];
    for (const std::string& name : column_names_) {
      out += ',';
      out += fmt_double(columns_.at(name)[i]);
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

void ScoreSet::add_column(const std::string& name, std::vector<double> values) {
  if (name.empty() || name == "id") throw ValidationError("bad column name: " + name);
  if (values.size() != ids_.size())
    throw ValidationError("column " + name + " has " + std::to_string(values.size()) +
                          " values for " + std::to_string(ids_.size()) + " ids");
  if (columns_.count(name)) throw ValidationError("duplicate column: " + name);
  column_names_.push_back(name);
  columns_.emplace(name, std::move(values));
}

bool ScoreSet::has_column(const std::string& name) const {
  return columns_.count(name) > 0;
}

const std::vector<double>& ScoreSet::column(const std::string& name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw ValidationError("missing score column: " + name);
  return it->second;
}

double ScoreSet::value(const std::string& name, const std::string& id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end()) throw ValidationError("id not in score set: " + id);
  return column(name)[it->second];
}

ScoreSet ScoreSet::aligned_to(const std::vector<std::string>& ids) const {
  ScoreSet out{ids};
  for (const std::string& name : column_names_) {
    const auto& src = columns_.at(name);
    std::vector<double> values;
    values.reserve(ids.size());
    for (const std::string& id : ids) {
      auto it = id_index_.find(id);
      if (it == id_index_.end())
        throw ValidationError("id misalignment: " + id + " missing from score set");
      values.push_back(src[it->second]);
    }
    out.add_column(name, std::move(values));
  }
  return out;
}

}  // namespace abstain
