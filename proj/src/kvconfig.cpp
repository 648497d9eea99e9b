#include "rpde/kvconfig.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rpde/csv.hpp"
#include "rpde/errors.hpp"

namespace rpde {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValue KeyValue::parse(const std::string& text, const std::string& origin) {
    KeyValue kv;
    kv.origin_ = origin;
    kv.text_ = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (kv.values_.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.values_[key] = value;
    }
    return kv;
}

KeyValue KeyValue::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::string KeyValue::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
    return it->second;
}

std::string KeyValue::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValue::get_double(const std::string& key) const {
    const auto s = get_string(key);
    try {
        return csv::parse_double(s);
    } catch (const InvalidInput&) {
        throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + s + "'");
    }
}

double KeyValue::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::optional<double> KeyValue::find_double(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_double(key);
}

long KeyValue::get_int(const std::string& key) const {
    const auto s = get_string(key);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + s + "'");
    return v;
}

long KeyValue::get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::vector<double> KeyValue::get_doubles(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& f : csv::split(get_string(key))) {
        try {
            out.push_back(csv::parse_double(trim(f)));
        } catch (const InvalidInput&) {
            throw ConfigError(origin_ + ": key '" + key + "' must be a comma-separated list of numbers");
        }
    }
    return out;
}

std::vector<long> parse_int_list(const std::string& text) {
    std::vector<long> out;
    for (const auto& f : csv::split(text)) {
        const auto s = trim(f);
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size())
            throw ConfigError("not an integer list: '" + text + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace rpde
