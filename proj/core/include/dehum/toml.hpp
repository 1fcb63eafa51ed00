#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dehum {

// Small TOML subset: [section] and [section.sub] headers, key = value lines,
// strings, integers, floats, booleans, single-line arrays, # comments.
// That covers every pipeline configuration knob without an external parser.
struct TomlValue {
    enum class Kind { string, integer, floating, boolean, array };

    Kind kind = Kind::string;
    std::string string_v;
    long long int_v = 0;
    double float_v = 0;
    bool bool_v = false;
    std::vector<TomlValue> array_v;
};

class TomlTable {
public:
    static TomlTable parse_file(const std::filesystem::path& path);
    static TomlTable parse_string(std::string_view text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;

    // Typed getters throw ConfigError when the key exists with a wrong type.
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_string_list(const std::string& key,
                                             std::vector<std::string> fallback) const;
    std::vector<long long> get_int_list(const std::string& key,
                                        std::vector<long long> fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        std::vector<double> fallback) const;

    // Dotted key paths in file order of first appearance, then sorted.
    std::vector<std::string> keys() const;

private:
    std::map<std::string, TomlValue> values_;
};

} // namespace dehum
