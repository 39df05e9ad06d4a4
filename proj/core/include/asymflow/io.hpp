#ifndef ASYMFLOW_IO_HPP
#define ASYMFLOW_IO_HPP

#include <string>

namespace asymflow {

/// Locale-independent decimal formatting, 17 significant digits.
std::string format_double(double x);

/// Atomic-ish text write: the file appears only with its full content.
void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace asymflow

#endif
