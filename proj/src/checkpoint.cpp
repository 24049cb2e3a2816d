#include "kanmixer/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kanmixer {

namespace {

constexpr const char* kHeader = "KANMIXER-CKPT v1";

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& why) {
    throw parse_error("checkpoint '" + path + "' line " + std::to_string(line) + ": " + why);
}

}  // namespace

void save_checkpoint(const std::string& path, const ConfigFile& config,
                     const std::vector<ParamRef>& params) {
    std::ofstream file(path);
    if (!file) throw load_error("cannot write checkpoint '" + path + "'");
    file << kHeader << "\n";
    file << config.echo_line() << "\n";
    char buf[40];
    for (const ParamRef& p : params) {
        file << "param " << p.name << " " << p.tensor->shape.size();
        for (std::size_t d : p.tensor->shape) file << " " << d;
        file << "\n";
        for (std::size_t i = 0; i < p.tensor->data.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", p.tensor->data[i]);
            if (i) file << " ";
            file << buf;
        }
        file << "\n";
    }
    file << "end\n";
}

ConfigFile load_checkpoint(const std::string& path, const ConfigFile& expected,
                           const std::vector<ParamRef>& params) {
    std::ifstream file(path);
    if (!file) throw load_error("cannot open checkpoint '" + path + "'");
    std::size_t lineno = 0;
    std::string line;

    if (!std::getline(file, line)) fail(path, 1, "missing header");
    ++lineno;
    if (line != kHeader) fail(path, lineno, "bad header '" + line + "'");

    if (!std::getline(file, line)) fail(path, lineno + 1, "missing config echo");
    ++lineno;
    const ConfigFile embedded = ConfigFile::from_echo_line(line);
    for (const std::string& key : ConfigFile::known_keys()) {
        if (key.rfind("model.", 0) != 0) continue;
        if (embedded.get(key) != expected.get(key))
            throw config_error("checkpoint '" + path + "' was trained with " + key + "=" +
                               embedded.get(key) + " but the config requests " +
                               expected.get(key));
    }

    for (const ParamRef& p : params) {
        if (!std::getline(file, line)) fail(path, lineno + 1, "truncated before parameter '" +
                                                               p.name + "'");
        ++lineno;
        std::stringstream head(line);
        std::string tag, name;
        std::size_t ndims = 0;
        if (!(head >> tag >> name >> ndims) || tag != "param")
            fail(path, lineno, "expected 'param " + p.name + " ...', got '" + line + "'");
        if (name != p.name)
            fail(path, lineno, "expected parameter '" + p.name + "', found '" + name + "'");
        std::vector<std::size_t> dims(ndims);
        for (std::size_t i = 0; i < ndims; ++i)
            if (!(head >> dims[i])) fail(path, lineno, "bad dims for parameter '" + name + "'");
        if (dims != p.tensor->shape)
            fail(path, lineno, "parameter '" + name + "' has shape " + shape_string(dims) +
                                   ", model expects " + shape_string(p.tensor->shape));

        if (!std::getline(file, line))
            fail(path, lineno + 1, "truncated values for parameter '" + name + "'");
        ++lineno;
        const char* cursor = line.c_str();
        for (std::size_t i = 0; i < p.tensor->data.size(); ++i) {
            char* end = nullptr;
            const double v = std::strtod(cursor, &end);
            if (end == cursor)
                fail(path, lineno, "parameter '" + name + "' is missing value " +
                                       std::to_string(i + 1) + " of " +
                                       std::to_string(p.tensor->data.size()));
            p.tensor->data[i] = v;
            cursor = end;
        }
        while (*cursor == ' ') ++cursor;
        if (*cursor != '\0')
            fail(path, lineno, "trailing data after parameter '" + name + "'");
    }

    if (!std::getline(file, line)) fail(path, lineno + 1, "missing end marker");
    ++lineno;
    if (line != "end") fail(path, lineno, "expected 'end', got '" + line + "'");
    return embedded;
}

ConfigFile read_checkpoint_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw load_error("cannot open checkpoint '" + path + "'");
    std::string line;
    if (!std::getline(file, line) || line != kHeader)
        throw parse_error("checkpoint '" + path + "' line 1: bad header");
    if (!std::getline(file, line))
        throw parse_error("checkpoint '" + path + "' line 2: missing config echo");
    return ConfigFile::from_echo_line(line);
}

}  // namespace kanmixer
