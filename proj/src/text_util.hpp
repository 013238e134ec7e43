#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace solesense {

// Shortest form that round-trips exactly.
std::string format_double(double v);
// Strict: the whole field must parse. Throws Error(Parse).
double parse_double(std::string_view s);
long long parse_int(std::string_view s);
std::vector<std::string> split_csv(std::string_view line);
void strip_cr(std::string& line);
std::string_view trim(std::string_view s);

std::string read_text_file(const std::string& path);
// Writes to a sibling temp file and renames it into place.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace solesense
