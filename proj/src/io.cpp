#include "glt/io.hpp"

#include <fstream>
#include <sstream>

namespace glt {

bool parse_double(std::string_view field, double& out) {
    std::size_t begin = 0;
    std::size_t end = field.size();
    while (begin < end && (field[begin] == ' ' || field[begin] == '\t')) ++begin;
    while (end > begin && (field[end - 1] == ' ' || field[end - 1] == '\t' ||
                           field[end - 1] == '\r'))
        --end;
    if (begin == end) return false;
    const char* first = field.data() + begin;
    const char* last = field.data() + end;
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::io_error, "cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (cols == 0) cols = fields.size();
        require(fields.size() == cols, Errc::malformed_csv,
                path + ": row " + std::to_string(rows.size() + 1) + " has " +
                    std::to_string(fields.size()) + " cells, expected " + std::to_string(cols));
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j)
            require(parse_double(fields[j], row[j]), Errc::malformed_csv,
                    path + ": non-numeric cell '" + fields[j] + "'");
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), Errc::malformed_csv, path + ": empty file");

    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    return m;
}

void write_matrix_csv(const std::string& path, const Matrix& matrix) {
    std::ostringstream out;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            if (j) out << ',';
            out << format_double(matrix(i, j));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), Errc::io_error, "cannot write " + path);
    out << content;
    require(out.good(), Errc::io_error, "write failed for " + path);
}

}  // namespace glt
