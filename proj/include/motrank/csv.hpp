#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace motrank {

/// RFC 4180-style CSV reader: quoted fields, escaped quotes, CRLF line ends.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads one record into `fields`. Returns false at end of input.
    bool next_row(std::vector<std::string>& fields);

private:
    std::istream& in_;
};

std::string csv_escape(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

} // namespace motrank
