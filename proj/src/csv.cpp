#include "motrank/csv.hpp"

#include <istream>

namespace motrank {

bool CsvReader::next_row(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == std::istream::traits_type::eof()) return false;

    std::string field;
    bool quoted = false;
    bool any = false;
    while (true) {
        if (c == std::istream::traits_type::eof()) {
            fields.push_back(field);
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                int next = in_.peek();
                if (next == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty() && !any) {
            quoted = true;
            any = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
            any = false;
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(field);
            return true;
        } else {
            field.push_back(ch);
            any = true;
        }
        c = in_.get();
    }
}

std::string csv_escape(const std::string& field) {
    bool needs_quotes = false;
    for (char ch : field) {
        if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += "\"";
    return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line.push_back(',');
        line += csv_escape(fields[i]);
    }
    return line;
}

} // namespace motrank
