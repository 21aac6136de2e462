#ifndef EMOVOX_CSV_HPP
#define EMOVOX_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace emovox::csv {

// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_line(const std::string& line);

// Quotes a field if it contains a comma, quote or newline.
std::string escape_field(const std::string& field);

std::string join_row(const std::vector<std::string>& fields);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a whole CSV file. First line is the header. Blank lines are skipped.
// Throws IoError if the file cannot be opened, FormatError on ragged rows.
Table read_file(const std::filesystem::path& path);

// Renders a double with the shortest representation that round-trips exactly.
std::string format_double(double v);

// Parses a double; throws FormatError naming `context` on failure.
double parse_double(const std::string& s, const std::string& context);

} // namespace emovox::csv

#endif
