#include "abstain/selector/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "abstain/common/error.hpp"
#include "abstain/common/fs.hpp"
#include "abstain/common/hash.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint tensors are little-endian");

namespace abstain::selector {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'A', 'B', 'S', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void append_raw(std::string& out, const T& value) {
  const std::size_t offset = out.size();
  out.resize(offset + sizeof(T));
  std::memcpy(out.data() + offset, &value, sizeof(T));
}

template <typename T>
T read_raw(const std::string& buf, std::size_t& offset) {
  if (offset + sizeof(T) > buf.size()) throw ValidationError("truncated checkpoint");
  T value;
  std::memcpy(&value, buf.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}

}  // namespace

json train_config_to_json(const TrainConfig& config) {
  return json{{"architecture", to_string(config.architecture)},
              {"d", config.d},
              {"n_heads", config.n_heads},
              {"alpha", config.alpha},
              {"gamma", config.gamma},
              {"learning_rate", config.learning_rate},
              {"batch_size", config.batch_size},
              {"epochs", config.epochs},
              {"seed", config.seed},
              {"selection_metric", to_string(config.selection_metric)},
              {"phi_cost", config.phi_cost}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig config;
  if (j.contains("architecture"))
    config.architecture = architecture_from_string(j.at("architecture").get<std::string>());
  config.d = j.value("d", config.d);
  config.n_heads = j.value("n_heads", config.n_heads);
  if (j.contains("alpha")) config.alpha = j.at("alpha").get<std::vector<double>>();
  config.gamma = j.value("gamma", config.gamma);
  config.learning_rate = j.value("learning_rate", config.learning_rate);
  config.batch_size = j.value("batch_size", config.batch_size);
  config.epochs = j.value("epochs", config.epochs);
  config.seed = j.value("seed", config.seed);
  if (j.contains("selection_metric"))
    config.selection_metric =
        selection_metric_from_string(j.at("selection_metric").get<std::string>());
  config.phi_cost = j.value("phi_cost", config.phi_cost);
  return config;
}

json train_report_to_json(const TrainReport& report) {
  return json{{"train_loss", report.train_loss},
              {"val_metric", report.val_metric},
              {"selected_epoch", report.selected_epoch},
              {"param_checksum", report.param_checksum},
              {"floor_events", report.floor_events}};
}

void save_checkpoint(const SelectorModel& model, const std::filesystem::path& path) {
  const auto tensors = std::holds_alternative<MlpParams>(model.params)
                           ? std::get<MlpParams>(model.params).tensors()
                           : std::get<TransformerParams>(model.params).tensors();
  const FeatureDims& dims = model.feature_dims();

  json header;
  header["config"] = train_config_to_json(model.config);
  header["class_map"] = model.class_map.values();
  header["dims"] = {{"d_h", dims.d_h},
                    {"d_q", dims.d_q},
                    {"d_a", dims.d_a},
                    {"n_classes", dims.n_classes}};
  json tensor_list = json::array();
  for (const auto& [name, tensor] : tensors) {
    tensor_list.push_back(
        {{"name", name}, {"rows", tensor->rows()}, {"cols", tensor->cols()}});
  }
  header["tensors"] = tensor_list;
  const std::string header_text = header.dump();

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  append_raw(out, kVersion);
  append_raw(out, static_cast<std::uint64_t>(header_text.size()));
  out += header_text;
  for (const auto& [name, tensor] : tensors) {
    for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
        append_raw(out, (*tensor)(r, c));
      }
    }
  }
  append_raw(out, fnv1a64(out.data(), out.size()));
  atomic_write_file(path, out);
}

SelectorModel load_checkpoint(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  if (buf.size() < sizeof(kMagic) + sizeof(kVersion) + 2 * sizeof(std::uint64_t))
    throw ValidationError("checkpoint too small: " + path.string());
  if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw ValidationError("bad checkpoint magic: " + path.string());

  const std::uint64_t stored_checksum = [&] {
    std::size_t off = buf.size() - sizeof(std::uint64_t);
    return read_raw<std::uint64_t>(buf, off);
  }();
  if (fnv1a64(buf.data(), buf.size() - sizeof(std::uint64_t)) != stored_checksum)
    throw ValidationError("checkpoint checksum failure: " + path.string());

  std::size_t offset = sizeof(kMagic);
  const auto version = read_raw<std::uint32_t>(buf, offset);
  if (version != kVersion)
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  const auto header_len = read_raw<std::uint64_t>(buf, offset);
  if (offset + header_len > buf.size()) throw ValidationError("truncated checkpoint");
  json header;
  try {
    header = json::parse(buf.substr(offset, header_len));
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint header parse error: " + std::string(e.what()));
  }
  offset += header_len;

  SelectorModel model;
  model.config = train_config_from_json(header.at("config"));
  model.class_map = core::ClassMap(header.at("class_map").get<std::vector<double>>());
  const json& dims_json = header.at("dims");
  const FeatureDims dims{dims_json.at("d_h").get<int>(), dims_json.at("d_q").get<int>(),
                         dims_json.at("d_a").get<int>(),
                         dims_json.at("n_classes").get<int>()};
  if (model.config.architecture == Architecture::kMlp) {
    model.params = MlpParams::zeros(dims, model.config.d);
  } else {
    model.params =
        TransformerParams::zeros(dims, model.config.d, model.config.n_heads);
  }

  auto tensors = std::holds_alternative<MlpParams>(model.params)
                     ? std::get<MlpParams>(model.params).tensors()
                     : std::get<TransformerParams>(model.params).tensors();
  const json& tensor_list = header.at("tensors");
  if (tensor_list.size() != tensors.size())
    throw ValidationError("checkpoint tensor list does not match architecture");
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const json& meta = tensor_list[t];
    auto& [name, tensor] = tensors[t];
    if (meta.at("name").get<std::string>() != name ||
        meta.at("rows").get<Eigen::Index>() != tensor->rows() ||
        meta.at("cols").get<Eigen::Index>() != tensor->cols())
      throw ValidationError("checkpoint tensor mismatch at " + name);
    for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
        (*tensor)(r, c) = read_raw<double>(buf, offset);
      }
    }
  }
  return model;
}

}  // namespace abstain::selector
