#pragma once

// Long-format choice datasets.
//
// Events file (one row per offered alternative, rows of an event contiguous):
//
//   event_id,alt_index,available,chosen,x_1,...,x_{d_x}
//
// Optional customers file (one row per event):
//
//   event_id,z_1,...,z_{d_z}
//
// UTF-8, comma separated, '.' decimal point, LF line endings, header row
// required. Empty numeric cells load as -1 (the missing-value convention).
// See docs/formats.md for the full contract.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rumnet/choice_event.hpp"

namespace rumnet {

class DataFormatError : public std::runtime_error {
 public:
  // `row` is the 1-based line number in the offending file (0 if unknown).
  DataFormatError(const std::string& file, std::size_t row, const std::string& message);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

inline constexpr double kMissingValue = -1.0;

Dataset read_long_csv(std::istream& events, std::istream* customers,
                      const std::string& events_name = "events",
                      const std::string& customers_name = "customers");
Dataset load_long_csv(const std::string& events_path, const std::string& customers_path = "");

// Event ids are written as 0..N-1. The customers stream is only written when
// d_z > 0.
void write_long_csv(const Dataset& data, std::ostream& events, std::ostream* customers);
// Writes the customers file only when d_z > 0; returns whether it did.
bool save_long_csv(const Dataset& data, const std::string& events_path,
                   const std::string& customers_path);

struct OneHotColumns {
  std::vector<std::string> names;
  // columns[c][row]
  std::vector<std::vector<double>> columns;
};

inline constexpr const char* kRareColumn = "RARE";

// One column per label occurring at least min_count times (sorted by label),
// followed by a single RARE column lumping the others when any exist.
OneHotColumns one_hot(const std::vector<std::string>& labels, std::size_t min_count);

}  // namespace rumnet
