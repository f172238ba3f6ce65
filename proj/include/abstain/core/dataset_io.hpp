#pragma once

#include <filesystem>

#include "abstain/core/types.hpp"

namespace abstain::core {

DatasetManifest load_manifest(const std::filesystem::path& manifest_path);

// Reads and validates a dataset. Records come either inline in the JSONL file
// or from the packed-binary sidecar named by the manifest. Validation covers
// dimensions, class membership, class/accuracy consistency, id uniqueness,
// record count and the payload checksum; errors name the offending record id.
Dataset ingest_records(const std::filesystem::path& manifest_path,
                       const std::filesystem::path& data_path);

// Writes manifest + records (+ sidecar for packed-binary), computing
// record_count and checksum. Inverse of ingest_records.
void write_dataset(const Dataset& dataset,
                   const std::filesystem::path& manifest_path,
                   const std::filesystem::path& data_path);

}  // namespace abstain::core
