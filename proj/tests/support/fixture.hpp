#pragma once

#include <cstdlib>
#include <filesystem>

namespace cstm::testing {

inline std::filesystem::path data_dir() { return CSTM_TEST_DATA_DIR; }

// CSTM_LIFE_TABLE overrides the bundled life table.
inline std::filesystem::path life_table_path() {
  if (const char* env = std::getenv("CSTM_LIFE_TABLE"); env != nullptr && *env != '\0') return env;
  return data_dir() / "sick_sicker_life_table.csv";
}

inline std::filesystem::path fixture_config_path() { return data_dir() / "sick_sicker.yaml"; }

}  // namespace cstm::testing
