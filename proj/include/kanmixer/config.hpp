#ifndef KANMIXER_CONFIG_HPP_
#define KANMIXER_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kanmixer/data.hpp"
#include "kanmixer/model.hpp"
#include "kanmixer/train.hpp"

namespace kanmixer {

// Flat key=value run configuration. One pair per line, '#' starts a comment,
// unknown keys are a hard error. Every key has a default; parsing records
// which keys were set explicitly.
class ConfigFile {
public:
    ConfigFile();  // all defaults

    static ConfigFile from_file(const std::string& path);
    static ConfigFile from_text(const std::string& text, const std::string& origin = "<text>");
    // Inverse of echo_line(): tab-separated pairs on a single line.
    static ConfigFile from_echo_line(const std::string& line);

    const std::string& get(const std::string& key) const;
    void set(const std::string& key, const std::string& value);  // unknown key throws
    bool explicitly_set(const std::string& key) const { return explicit_.count(key) > 0; }

    // Canonical multi-line serialization (fixed key order, all keys present).
    std::string serialize() const;
    // The same pairs tab-joined for embedding in checkpoints and reports.
    std::string echo_line() const;

    std::vector<std::pair<std::string, std::string>> entries() const;

    // Typed views. d_model defaults to 16, or 64 when every component is mlp
    // and the key was not set explicitly.
    MixerConfig mixer() const;
    TrainConfig train() const;
    std::string dataset_path() const { return get("dataset.path"); }
    SplitSpec split_spec() const { return SplitSpec::for_family(get("dataset.family")); }

    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> explicit_;
};

}  // namespace kanmixer

#endif  // KANMIXER_CONFIG_HPP_
