#include "dehum/csv.hpp"

#include "dehum/error.hpp"

#include <sstream>

namespace dehum {

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
    out_.open(path, std::ios::binary);
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << csv_escape(fields[i]);
    }
    out_ << '\n';
    if (!out_) throw Error("write failed on " + path_.string());
}

void CsvWriter::close() {
    if (out_.is_open()) {
        out_.close();
        if (!out_) throw Error("close failed on " + path_.string());
    }
}

std::string csv_escape(std::string_view field) {
    bool needs_quote = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quote = true;
            break;
        }
    }
    if (!needs_quote) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        if (field_started || !field.empty() || !row.empty()) {
            end_field();
            rows.push_back(row);
            row.clear();
        }
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
            field_started = true;
        } else if (c == '\n') {
            end_row();
        } else if (c == '\r') {
            // swallowed; \r\n and bare \r both end up as row ends via \n
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    end_row();
    if (in_quotes) throw ParseError("unterminated quoted field in " + path.string());
    return rows;
}

} // namespace dehum
