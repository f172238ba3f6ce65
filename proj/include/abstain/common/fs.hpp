#pragma once

#include <filesystem>
#include <string>

namespace abstain {

std::string read_file(const std::filesystem::path& path);

// Writes to a temporary sibling then renames, so a crashed or interrupted run
// never leaves a partially written output behind.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace abstain
