#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rpde {

/// `key = value` configuration with `#` comments. Unknown keys are kept so that
/// callers can reject or ignore them explicitly.
class KeyValue {
public:
    KeyValue() = default;

    static KeyValue parse(const std::string& text, const std::string& origin = "<string>");
    static KeyValue load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& origin() const noexcept { return origin_; }
    const std::string& text() const noexcept { return text_; }
    const std::map<std::string, std::string>& entries() const noexcept { return values_; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
    std::optional<double> find_double(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::string origin_;
    std::string text_;
    std::map<std::string, std::string> values_;
};

std::vector<long> parse_int_list(const std::string& text);

}  // namespace rpde
