#include "dehum/toml.hpp"

#include "dehum/error.hpp"
#include "dehum/strings.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dehum {

namespace {

// Removes an unquoted trailing comment.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') in_string = !in_string;
        else if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool valid_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

TomlValue parse_scalar(std::string_view text, const std::string& origin, std::size_t line_no) {
    TomlValue v;
    text = trim(text);
    if (text.empty())
        throw ParseError(origin + ": empty value", line_no);

    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"')
            throw ParseError(origin + ": unterminated string", line_no);
        v.kind = TomlValue::Kind::string;
        std::string_view body = text.substr(1, text.size() - 2);
        std::string out;
        for (std::size_t i = 0; i < body.size(); ++i) {
            char c = body[i];
            if (c == '\\' && i + 1 < body.size()) {
                char e = body[++i];
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '\\': out.push_back('\\'); break;
                    case '"': out.push_back('"'); break;
                    default:
                        throw ParseError(origin + ": unsupported escape", line_no);
                }
            } else {
                out.push_back(c);
            }
        }
        v.string_v = out;
        return v;
    }
    if (text == "true" || text == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.bool_v = (text == "true");
        return v;
    }
    // Integer first so "5" does not become 5.0.
    bool looks_integer = true;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (i == 0 && (c == '+' || c == '-')) continue;
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            looks_integer = false;
            break;
        }
    }
    if (looks_integer) {
        auto parsed = parse_int(text);
        if (!parsed) throw ParseError(origin + ": bad integer '" + std::string(text) + "'", line_no);
        v.kind = TomlValue::Kind::integer;
        v.int_v = *parsed;
        return v;
    }
    auto parsed = parse_double(text);
    if (!parsed) throw ParseError(origin + ": bad value '" + std::string(text) + "'", line_no);
    v.kind = TomlValue::Kind::floating;
    v.float_v = *parsed;
    return v;
}

TomlValue parse_value(std::string_view text, const std::string& origin, std::size_t line_no) {
    text = trim(text);
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']')
            throw ParseError(origin + ": unterminated array", line_no);
        TomlValue v;
        v.kind = TomlValue::Kind::array;
        std::string_view body = text.substr(1, text.size() - 2);
        // Split on commas outside quotes. Nested arrays are not supported.
        std::size_t start = 0;
        bool in_string = false;
        for (std::size_t i = 0; i <= body.size(); ++i) {
            if (i < body.size() && body[i] == '"') in_string = !in_string;
            if (i == body.size() || (body[i] == ',' && !in_string)) {
                std::string_view piece = trim(body.substr(start, i - start));
                if (!piece.empty()) v.array_v.push_back(parse_scalar(piece, origin, line_no));
                start = i + 1;
            }
        }
        return v;
    }
    return parse_scalar(text, origin, line_no);
}

} // namespace

TomlTable TomlTable::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path.string());
}

TomlTable TomlTable::parse_string(std::string_view text, const std::string& origin) {
    TomlTable table;
    std::string prefix;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        line = trim(strip_comment(line));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(origin + ": malformed section header", line_no);
            std::string_view name = trim(line.substr(1, line.size() - 2));
            if (name.empty())
                throw ParseError(origin + ": empty section name", line_no);
            for (char c : name)
                if (!valid_key_char(c))
                    throw ParseError(origin + ": bad section name '" + std::string(name) + "'",
                                     line_no);
            prefix = std::string(name) + ".";
            continue;
        }

        std::size_t eq = std::string_view::npos;
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            else if (line[i] == '=' && !in_string) {
                eq = i;
                break;
            }
        }
        if (eq == std::string_view::npos)
            throw ParseError(origin + ": expected key = value", line_no);

        std::string key(trim(line.substr(0, eq)));
        if (key.empty())
            throw ParseError(origin + ": empty key", line_no);
        for (char c : key)
            if (!valid_key_char(c))
                throw ParseError(origin + ": bad key '" + key + "'", line_no);

        std::string full_key = prefix + key;
        if (table.values_.count(full_key))
            throw ParseError(origin + ": duplicate key '" + full_key + "'", line_no);
        table.values_[full_key] = parse_value(line.substr(eq + 1), origin, line_no);
    }
    return table;
}

bool TomlTable::has(const std::string& key) const { return values_.count(key) > 0; }

namespace {

[[noreturn]] void type_error(const std::string& key, const char* wanted) {
    throw ConfigError("config key '" + key + "' is not " + wanted);
}

} // namespace

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::string) type_error(key, "a string");
    return it->second.string_v;
}

long long TomlTable::get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::integer) type_error(key, "an integer");
    return it->second.int_v;
}

double TomlTable::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.kind == TomlValue::Kind::integer) return static_cast<double>(it->second.int_v);
    if (it->second.kind != TomlValue::Kind::floating) type_error(key, "a number");
    return it->second.float_v;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::boolean) type_error(key, "a boolean");
    return it->second.bool_v;
}

std::vector<std::string> TomlTable::get_string_list(const std::string& key,
                                                    std::vector<std::string> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::array) type_error(key, "an array");
    std::vector<std::string> out;
    for (const auto& v : it->second.array_v) {
        if (v.kind != TomlValue::Kind::string) type_error(key, "an array of strings");
        out.push_back(v.string_v);
    }
    return out;
}

std::vector<long long> TomlTable::get_int_list(const std::string& key,
                                               std::vector<long long> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::array) type_error(key, "an array");
    std::vector<long long> out;
    for (const auto& v : it->second.array_v) {
        if (v.kind != TomlValue::Kind::integer) type_error(key, "an array of integers");
        out.push_back(v.int_v);
    }
    return out;
}

std::vector<double> TomlTable::get_double_list(const std::string& key,
                                               std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::array) type_error(key, "an array");
    std::vector<double> out;
    for (const auto& v : it->second.array_v) {
        if (v.kind == TomlValue::Kind::integer) out.push_back(static_cast<double>(v.int_v));
        else if (v.kind == TomlValue::Kind::floating) out.push_back(v.float_v);
        else type_error(key, "an array of numbers");
    }
    return out;
}

std::vector<std::string> TomlTable::keys() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

} // namespace dehum
