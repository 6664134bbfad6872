#pragma once

// Small helpers shared by the text serializers: lossless double formatting
// and a whitespace-token reader with positioned diagnostics.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rumnet {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest representation that round-trips; at most 17 significant digits.
std::string format_double(double v);

// Whole-string parses; throw FormatError naming `context` on failure.
double parse_double(std::string_view text, std::string_view context);
std::uint64_t parse_uint(std::string_view text, std::string_view context);

class TokenReader {
 public:
  explicit TokenReader(std::istream& is) : is_(is) {}

  std::string next(std::string_view what);
  void expect(std::string_view keyword);
  double next_double(std::string_view what);
  std::size_t next_size(std::string_view what);

 private:
  std::istream& is_;
  std::size_t index_ = 0;
};

}  // namespace rumnet
