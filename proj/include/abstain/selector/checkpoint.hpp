#pragma once

#include <filesystem>

#include <json.hpp>

#include "abstain/selector/selector.hpp"

namespace abstain::selector {

nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_report_to_json(const TrainReport& report);

// Versioned binary container: magic, header JSON (config, class map, tensor
// shapes), row-major little-endian 64-bit tensor payload, trailing checksum.
void save_checkpoint(const SelectorModel& model, const std::filesystem::path& path);
SelectorModel load_checkpoint(const std::filesystem::path& path);

}  // namespace abstain::selector
