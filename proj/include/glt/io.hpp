#pragma once

#include <charconv>
#include <string>
#include <vector>

#include "glt/error.hpp"
#include "glt/matrix.hpp"

namespace glt {

// Shortest decimal form that round-trips the exact double. All CSV output
// goes through this so that rewritten files are byte-identical and reload
// to bit-equal values.
inline std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// Strict double parse of a whole (trimmed) field.
bool parse_double(std::string_view field, double& out);

std::vector<std::string> split_csv_line(const std::string& line);

// Rectangular numeric CSV. Throws malformed_csv on ragged rows or
// non-numeric cells; header rows are not accepted here.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& matrix);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace glt
