#ifndef KANMIXER_CHECKPOINT_HPP_
#define KANMIXER_CHECKPOINT_HPP_

#include <string>
#include <vector>

#include "kanmixer/config.hpp"
#include "kanmixer/layers.hpp"

namespace kanmixer {

// Text checkpoint: header line, one tab-joined config echo line, then per
// parameter a "param <name> <ndims> <dims...>" line followed by its values
// with 17 significant digits (lossless for doubles). Round trips byte-for-byte.
void save_checkpoint(const std::string& path, const ConfigFile& config,
                     const std::vector<ParamRef>& params);

// Restores parameters in place. The checkpoint's model.* keys must match the
// expected config, and names/shapes must match the enumeration order.
ConfigFile load_checkpoint(const std::string& path, const ConfigFile& expected,
                           const std::vector<ParamRef>& params);

// Reads only the embedded config (for tools that rebuild the model first).
ConfigFile read_checkpoint_config(const std::string& path);

}  // namespace kanmixer

#endif  // KANMIXER_CHECKPOINT_HPP_
