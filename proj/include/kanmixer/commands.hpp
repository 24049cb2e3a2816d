#ifndef KANMIXER_COMMANDS_HPP_
#define KANMIXER_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kanmixer/train.hpp"

namespace kanmixer {

// Subcommand bodies shared by the binary and the test harnesses. Each returns
// a process exit code and reports failures as a one-line cause on stderr.

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override = std::nullopt);

int cmd_eval(const std::string& checkpoint_path, const std::string& config_path,
             const std::string& split);

int cmd_ablate(const std::string& grid_name, const std::string& config_path,
               const std::string& out_dir, int workers = 1, std::vector<int> horizons = {},
               std::optional<std::uint64_t> seed_override = std::nullopt);

int cmd_profile(const std::string& config_path);

// Machine-readable run report (line-delimited key=value, wall-clock isolated
// on its own line so determinism checks can drop it).
std::string serialize_report(const RunReport& report);

}  // namespace kanmixer

#endif  // KANMIXER_COMMANDS_HPP_
