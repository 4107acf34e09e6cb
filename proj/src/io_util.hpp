// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#ifndef OLP_IO_UTIL_HPP_
#define OLP_IO_UTIL_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace olp {

// Whole file as lines. Strips trailing '\r' so CRLF inputs behave like LF.
// A trailing newline does not produce an empty final line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes content, creating parent directories. Throws IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view content);

// One string per line, LF endings, trailing newline.
void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines);

std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// snprintf into a std::string; used everywhere numbers are serialized so that
// outputs are byte-identical between runs.
std::string format_double(const char* fmt, double v);

// Strict numeric parsing; throws DataError mentioning `what` on failure.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

}  // namespace olp

#endif  // OLP_IO_UTIL_HPP_
