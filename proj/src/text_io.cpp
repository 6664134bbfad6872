#include "rumnet/text_io.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace rumnet {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    throw FormatError("cannot format value");
  }
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, std::string_view context) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw FormatError(std::string(context) + ": not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view text, std::string_view context) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError(std::string(context) + ": not a non-negative integer: '" + std::string(text) +
                      "'");
  }
  return v;
}

std::string TokenReader::next(std::string_view what) {
  std::string tok;
  if (!(is_ >> tok)) {
    throw FormatError("unexpected end of input while reading " + std::string(what) + " (token " +
                      std::to_string(index_) + ")");
  }
  ++index_;
  return tok;
}

void TokenReader::expect(std::string_view keyword) {
  const std::string tok = next(keyword);
  if (tok != keyword) {
    throw FormatError("expected '" + std::string(keyword) + "' but found '" + tok + "' (token " +
                      std::to_string(index_) + ")");
  }
}

double TokenReader::next_double(std::string_view what) {
  return parse_double(next(what), what);
}

std::size_t TokenReader::next_size(std::string_view what) {
  return static_cast<std::size_t>(parse_uint(next(what), what));
}

}  // namespace rumnet
