#include "kanmixer/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kanmixer {

namespace {

const std::vector<std::pair<std::string, std::string>> kKeyDefaults = {
    {"dataset.path", ""},
    {"dataset.family", "ett"},
    {"model.lookback", "96"},
    {"model.horizon", "96"},
    {"model.d_model", "16"},
    {"model.n_blocks", "3"},
    {"model.n_scales", "3"},
    {"model.pool_k", "2"},
    {"model.basis", "bspline"},
    {"model.embed", "kan"},
    {"model.down", "kan"},
    {"model.ffn", "kan"},
    {"model.head", "kan"},
    {"model.prior", "none"},
    {"model.instance_norm", "true"},
    {"train.lr", "0.01"},
    {"train.batch", "32"},
    {"train.epochs", "10"},
    {"train.patience", "3"},
    {"train.seed", "1"},
    {"train.clip", "5.0"},
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size() || value.empty())
        throw config_error("config key " + key + " expects an integer, got '" + value + "'");
    return static_cast<int>(v);
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || value.empty())
        throw config_error("config key " + key + " expects a number, got '" + value + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size() || value.empty())
        throw config_error("config key " + key + " expects an unsigned integer, got '" + value +
                           "'");
    return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw config_error("config key " + key + " expects true|false, got '" + value + "'");
}

}  // namespace

const std::vector<std::string>& ConfigFile::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : kKeyDefaults) out.push_back(k);
        return out;
    }();
    return keys;
}

ConfigFile::ConfigFile() {
    for (const auto& [k, v] : kKeyDefaults) values_[k] = v;
}

const std::string& ConfigFile::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("unknown config key '" + key + "'");
    return it->second;
}

void ConfigFile::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("unknown config key '" + key + "'");
    it->second = value;
    explicit_.insert(key);
}

ConfigFile ConfigFile::from_text(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (cfg.values_.find(key) == cfg.values_.end())
            throw config_error(origin + ":" + std::to_string(lineno) + ": unknown config key '" +
                               key + "'");
        cfg.values_[key] = value;
        cfg.explicit_.insert(key);
    }
    return cfg;
}

ConfigFile ConfigFile::from_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw config_error("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << file.rdbuf();
    return from_text(buffer.str(), path);
}

ConfigFile ConfigFile::from_echo_line(const std::string& line) {
    std::string text = line;
    std::replace(text.begin(), text.end(), '\t', '\n');
    return from_text(text, "<echo>");
}

std::string ConfigFile::serialize() const {
    std::string out;
    for (const auto& [k, v] : kKeyDefaults) {
        out += k;
        out += "=";
        out += values_.at(k);
        out += "\n";
    }
    return out;
}

std::string ConfigFile::echo_line() const {
    std::string out;
    bool first = true;
    for (const auto& [k, v] : kKeyDefaults) {
        if (!first) out += "\t";
        first = false;
        out += k;
        out += "=";
        out += values_.at(k);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> ConfigFile::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : kKeyDefaults) out.push_back({k, values_.at(k)});
    return out;
}

MixerConfig ConfigFile::mixer() const {
    MixerConfig cfg;
    cfg.lookback = parse_int("model.lookback", get("model.lookback"));
    cfg.horizon = parse_int("model.horizon", get("model.horizon"));
    cfg.n_blocks = parse_int("model.n_blocks", get("model.n_blocks"));
    cfg.n_scales = parse_int("model.n_scales", get("model.n_scales"));
    cfg.pool_k = parse_int("model.pool_k", get("model.pool_k"));
    cfg.basis = basis_kind_from_string(get("model.basis"));
    cfg.kinds.embed = layer_kind_from_string(get("model.embed"));
    cfg.kinds.down = layer_kind_from_string(get("model.down"));
    cfg.kinds.ffn = layer_kind_from_string(get("model.ffn"));
    cfg.kinds.head = layer_kind_from_string(get("model.head"));
    cfg.prior = prior_from_string(get("model.prior"));
    cfg.instance_norm = parse_bool("model.instance_norm", get("model.instance_norm"));
    cfg.d_model_explicit = explicitly_set("model.d_model");
    cfg.d_model = cfg.d_model_explicit ? parse_int("model.d_model", get("model.d_model"))
                                       : default_d_model(cfg.kinds);
    return cfg;
}

TrainConfig ConfigFile::train() const {
    TrainConfig cfg;
    cfg.lr = parse_double("train.lr", get("train.lr"));
    cfg.batch_size = parse_int("train.batch", get("train.batch"));
    cfg.max_epochs = parse_int("train.epochs", get("train.epochs"));
    cfg.patience = parse_int("train.patience", get("train.patience"));
    cfg.seed = parse_u64("train.seed", get("train.seed"));
    cfg.clip = parse_double("train.clip", get("train.clip"));
    return cfg;
}

}  // namespace kanmixer
