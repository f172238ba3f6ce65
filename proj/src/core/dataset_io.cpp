#include "abstain/core/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "abstain/common/error.hpp"
#include "abstain/common/fs.hpp"
#include "abstain/common/hash.hpp"
#include "abstain/common/strings.hpp"

static_assert(std::endian::native == std::endian::little,
              "packed feature files are little-endian");

namespace abstain::core {
namespace {

using nlohmann::json;

json manifest_to_json(const DatasetManifest& m) {
  return json{{"version", 1},
              {"d_h", m.d_h},
              {"d_q", m.d_q},
              {"d_a", m.d_a},
              {"class_map", m.class_map.values()},
              {"record_count", m.record_count},
              {"feature_encoding", to_string(m.feature_encoding)},
              {"checksum", m.checksum},
              {"features_file", m.features_file}};
}

Eigen::VectorXf parse_feature_vector(const json& arr, int expected_dim,
                                     const std::string& id, const char* name) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != expected_dim) {
    throw ValidationError("dimension mismatch at id=" + id + ": " + name +
                          " has length " + std::to_string(arr.size()) +
                          ", expected " + std::to_string(expected_dim));
  }
  Eigen::VectorXf v(expected_dim);
  for (int i = 0; i < expected_dim; ++i) {
    v[i] = static_cast<float>(arr[static_cast<std::size_t>(i)].get<double>());
  }
  return v;
}

json feature_vector_to_json(const Eigen::VectorXf& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(static_cast<double>(v[i]));
  }
  return arr;
}

void append_packed(std::string& out, const Eigen::VectorXf& v) {
  const std::size_t bytes = static_cast<std::size_t>(v.size()) * sizeof(float);
  const std::size_t offset = out.size();
  out.resize(offset + bytes);
  std::memcpy(out.data() + offset, v.data(), bytes);
}

Eigen::VectorXf read_packed(const std::string& buf, std::size_t& offset, int dim) {
  Eigen::VectorXf v(dim);
  const std::size_t bytes = static_cast<std::size_t>(dim) * sizeof(float);
  std::memcpy(v.data(), buf.data() + offset, bytes);
  offset += bytes;
  return v;
}

void validate_record(const FeatureRecord& rec, const DatasetManifest& m) {
  if (rec.h.size() != m.d_h)
    throw ValidationError("dimension mismatch at id=" + rec.id + ": h has length " +
                          std::to_string(rec.h.size()) + ", expected " +
                          std::to_string(m.d_h));
  if (rec.q.size() != m.d_q)
    throw ValidationError("dimension mismatch at id=" + rec.id + ": q has length " +
                          std::to_string(rec.q.size()) + ", expected " +
                          std::to_string(m.d_q));
  if (rec.a.size() != m.d_a)
    throw ValidationError("dimension mismatch at id=" + rec.id + ": a has length " +
                          std::to_string(rec.a.size()) + ", expected " +
                          std::to_string(m.d_a));
  if (!(rec.accuracy >= 0.0 && rec.accuracy <= 1.0))
    throw ValidationError("accuracy out of [0,1] at id=" + rec.id);
  if (!m.class_map.contains(rec.accuracy))
    throw ValidationError("accuracy not in class map at id=" + rec.id + ": " +
                          fmt_double(rec.accuracy));
  if (m.class_map.discretize(rec.accuracy) != rec.class_index)
    throw ValidationError("class_index inconsistent with accuracy at id=" + rec.id);
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& manifest_path) {
  json j;
  try {
    j = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ValidationError("manifest parse error (" + manifest_path.string() +
                          "): " + e.what());
  }
  DatasetManifest m;
  try {
    m.d_h = j.at("d_h").get<int>();
    m.d_q = j.at("d_q").get<int>();
    m.d_a = j.at("d_a").get<int>();
    m.class_map = ClassMap(j.at("class_map").get<std::vector<double>>());
    m.record_count = j.at("record_count").get<std::int64_t>();
    m.feature_encoding =
        feature_encoding_from_string(j.at("feature_encoding").get<std::string>());
    m.checksum = j.at("checksum").get<std::string>();
    m.features_file = j.value("features_file", std::string());
  } catch (const json::exception& e) {
    throw ValidationError("manifest field error (" + manifest_path.string() +
                          "): " + e.what());
  }
  if (m.d_h <= 0 || m.d_q <= 0 || m.d_a <= 0)
    throw ValidationError("manifest dims must be positive");
  if (m.feature_encoding == FeatureEncoding::kPackedBinary && m.features_file.empty())
    throw ValidationError("packed-binary manifest must name a features_file");
  return m;
}

Dataset ingest_records(const std::filesystem::path& manifest_path,
                       const std::filesystem::path& data_path) {
  Dataset ds;
  ds.manifest = load_manifest(manifest_path);
  const DatasetManifest& m = ds.manifest;

  const std::string records_text = read_file(data_path);

  std::string packed;
  std::size_t packed_offset = 0;
  if (m.feature_encoding == FeatureEncoding::kPackedBinary) {
    const auto sidecar = manifest_path.parent_path() / m.features_file;
    packed = read_file(sidecar);
    if (to_hex(fnv1a64(packed.data(), packed.size())) != m.checksum)
      throw ValidationError("checksum failure on feature payload " + sidecar.string());
    const std::size_t row_bytes =
        static_cast<std::size_t>(m.d_h + m.d_q + m.d_a) * sizeof(float);
    if (packed.size() != row_bytes * static_cast<std::size_t>(m.record_count))
      throw ValidationError("packed payload size does not match manifest");
  } else {
    if (to_hex(fnv1a64(records_text.data(), records_text.size())) != m.checksum)
      throw ValidationError("checksum failure on records file " + data_path.string());
  }

  std::unordered_set<std::string> seen_ids;
  std::istringstream lines(records_text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError("record parse error at line " + std::to_string(line_no) +
                            ": " + e.what());
    }
    FeatureRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.question_text = j.value("question", std::string());
    rec.answer_text = j.value("answer", std::string());
    rec.accuracy = j.at("accuracy").get<double>();
    if (m.feature_encoding == FeatureEncoding::kInlineJson) {
      rec.h = parse_feature_vector(j.at("h"), m.d_h, rec.id, "h");
      rec.q = parse_feature_vector(j.at("q"), m.d_q, rec.id, "q");
      rec.a = parse_feature_vector(j.at("a"), m.d_a, rec.id, "a");
    } else {
      rec.h = read_packed(packed, packed_offset, m.d_h);
      rec.q = read_packed(packed, packed_offset, m.d_q);
      rec.a = read_packed(packed, packed_offset, m.d_a);
    }
    rec.class_index = j.contains("class_index")
                          ? j.at("class_index").get<int>()
                          : m.class_map.discretize(rec.accuracy);
    validate_record(rec, m);
    if (!seen_ids.insert(rec.id).second)
      throw ValidationError("duplicate id: " + rec.id);
    ds.records.push_back(std::move(rec));
  }

  if (static_cast<std::int64_t>(ds.records.size()) != m.record_count)
    throw ValidationError("record_count mismatch: manifest says " +
                          std::to_string(m.record_count) + ", file has " +
                          std::to_string(ds.records.size()));
  return ds;
}

void write_dataset(const Dataset& dataset,
                   const std::filesystem::path& manifest_path,
                   const std::filesystem::path& data_path) {
  DatasetManifest m = dataset.manifest;
  m.record_count = static_cast<std::int64_t>(dataset.records.size());

  for (const FeatureRecord& rec : dataset.records) validate_record(rec, m);

  std::string packed;
  std::string records_text;
  for (const FeatureRecord& rec : dataset.records) {
    json j;
    j["id"] = rec.id;
    if (!rec.question_text.empty()) j["question"] = rec.question_text;
    if (!rec.answer_text.empty()) j["answer"] = rec.answer_text;
    j["accuracy"] = rec.accuracy;
    j["class_index"] = rec.class_index;
    if (m.feature_encoding == FeatureEncoding::kInlineJson) {
      j["h"] = feature_vector_to_json(rec.h);
      j["q"] = feature_vector_to_json(rec.q);
      j["a"] = feature_vector_to_json(rec.a);
    } else {
      append_packed(packed, rec.h);
      append_packed(packed, rec.q);
      append_packed(packed, rec.a);
    }
    records_text += j.dump();
    records_text += '\n';
  }

  if (m.feature_encoding == FeatureEncoding::kPackedBinary) {
    if (m.features_file.empty())
      m.features_file = data_path.filename().string() + ".features";
    m.checksum = to_hex(fnv1a64(packed.data(), packed.size()));
    atomic_write_file(manifest_path.parent_path() / m.features_file, packed);
  } else {
    m.features_file.clear();
    m.checksum = to_hex(fnv1a64(records_text.data(), records_text.size()));
  }

  atomic_write_file(data_path, records_text);
  atomic_write_file(manifest_path, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace abstain::core
