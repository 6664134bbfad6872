#include "rumnet/dataio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string_view>
#include <unordered_map>

#include "rumnet/text_io.hpp"

namespace rumnet {

DataFormatError::DataFormatError(const std::string& file, std::size_t row, const std::string& message)
    : std::runtime_error(file + ":" + std::to_string(row) + ": " + message), row_(row) {}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

bool read_line(std::istream& is, std::string& line) {
  if (!std::getline(is, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_cell(std::string_view cell, const std::string& file, std::size_t row,
                  const std::string& column) {
  if (cell.empty()) return kMissingValue;
  try {
    return parse_double(cell, column);
  } catch (const FormatError& e) {
    throw DataFormatError(file, row, e.what());
  }
}

bool parse_flag(std::string_view cell, const std::string& file, std::size_t row, const char* column) {
  if (cell == "1") return true;
  if (cell == "0") return false;
  throw DataFormatError(file, row, std::string(column) + " must be 0 or 1, got '" + std::string(cell) + "'");
}

void check_header(const std::vector<std::string_view>& header, const std::vector<std::string>& fixed,
                  const char* prefix, const std::string& file) {
  if (header.size() < fixed.size()) {
    throw DataFormatError(file, 1, "header must start with " + fixed.front() + ",...");
  }
  for (std::size_t c = 0; c < fixed.size(); ++c) {
    if (header[c] != fixed[c]) {
      throw DataFormatError(file, 1, "header column " + std::to_string(c + 1) + " must be '" + fixed[c] +
                                         "', got '" + std::string(header[c]) + "'");
    }
  }
  for (std::size_t c = fixed.size(); c < header.size(); ++c) {
    const std::string expected = std::string(prefix) + std::to_string(c - fixed.size() + 1);
    if (header[c] != expected) {
      throw DataFormatError(file, 1, "header column " + std::to_string(c + 1) + " must be '" + expected +
                                         "', got '" + std::string(header[c]) + "'");
    }
  }
}

struct PendingEvent {
  std::string id;
  std::size_t first_row = 0;
  ChoiceEvent event;
  bool has_chosen = false;
};

void finish_event(PendingEvent& p, const std::string& file) {
  if (!p.has_chosen) {
    throw DataFormatError(file, p.first_row, "event '" + p.id + "' has no chosen alternative");
  }
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset read_long_csv(std::istream& events, std::istream* customers, const std::string& events_name,
                      const std::string& customers_name) {
  std::string line;
  if (!read_line(events, line)) throw DataFormatError(events_name, 1, "missing header row");
  const auto header = split_commas(line);
  check_header(header, {"event_id", "alt_index", "available", "chosen"}, "x_", events_name);
  const std::size_t n_cols = header.size();

  Dataset data;
  data.d_x = n_cols - 4;
  std::vector<std::string> ids;
  std::set<std::string> seen_ids;
  PendingEvent pending;
  bool open = false;
  std::size_t row = 1;
  while (read_line(events, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != n_cols) {
      throw DataFormatError(events_name, row, "expected " + std::to_string(n_cols) + " fields, got " +
                                                  std::to_string(cells.size()));
    }
    const std::string id(cells[0]);
    if (id.empty()) throw DataFormatError(events_name, row, "empty event_id");
    if (!open || id != pending.id) {
      if (open) {
        finish_event(pending, events_name);
        ids.push_back(pending.id);
        data.events.push_back(std::move(pending.event));
      }
      if (!seen_ids.insert(id).second) {
        throw DataFormatError(events_name, row, "rows of event '" + id + "' are not contiguous");
      }
      pending = PendingEvent{id, row, ChoiceEvent{}, false};
      open = true;
    }
    ChoiceEvent& e = pending.event;
    std::uint64_t alt = 0;
    try {
      alt = parse_uint(cells[1], "alt_index");
    } catch (const FormatError& err) {
      throw DataFormatError(events_name, row, err.what());
    }
    if (alt != e.size()) {
      throw DataFormatError(events_name, row, "event '" + id + "': alt_index " + std::to_string(alt) +
                                                  " but expected " + std::to_string(e.size()));
    }
    const bool available = parse_flag(cells[2], events_name, row, "available");
    const bool chosen = parse_flag(cells[3], events_name, row, "chosen");
    if (chosen) {
      if (pending.has_chosen) {
        throw DataFormatError(events_name, row, "event '" + id + "' has more than one chosen alternative");
      }
      if (!available) {
        throw DataFormatError(events_name, row, "event '" + id + "': chosen alternative is unavailable");
      }
      pending.has_chosen = true;
      e.chosen = e.size();
    }
    e.available.push_back(available);
    for (std::size_t c = 4; c < n_cols; ++c) {
      e.product_features.push_back(parse_cell(cells[c], events_name, row, std::string(header[c])));
    }
  }
  if (open) {
    finish_event(pending, events_name);
    ids.push_back(pending.id);
    data.events.push_back(std::move(pending.event));
  }

  if (customers != nullptr) {
    if (!read_line(*customers, line)) throw DataFormatError(customers_name, 1, "missing header row");
    const auto cheader = split_commas(line);
    check_header(cheader, {"event_id"}, "z_", customers_name);
    const std::size_t c_cols = cheader.size();
    data.d_z = c_cols - 1;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t t = 0; t < ids.size(); ++t) index.emplace(ids[t], t);
    std::vector<bool> filled(ids.size(), false);
    row = 1;
    while (read_line(*customers, line)) {
      ++row;
      if (line.empty()) continue;
      const auto cells = split_commas(line);
      if (cells.size() != c_cols) {
        throw DataFormatError(customers_name, row, "expected " + std::to_string(c_cols) + " fields, got " +
                                                       std::to_string(cells.size()));
      }
      const std::string id(cells[0]);
      const auto it = index.find(id);
      if (it == index.end()) {
        throw DataFormatError(customers_name, row, "unknown event_id '" + id + "'");
      }
      if (filled[it->second]) {
        throw DataFormatError(customers_name, row, "duplicate customer row for event '" + id + "'");
      }
      filled[it->second] = true;
      auto& z = data.events[it->second].customer;
      for (std::size_t c = 1; c < c_cols; ++c) {
        z.push_back(parse_cell(cells[c], customers_name, row, std::string(cheader[c])));
      }
    }
    for (std::size_t t = 0; t < ids.size(); ++t) {
      if (!filled[t]) {
        throw DataFormatError(customers_name, 0, "no customer row for event '" + ids[t] + "'");
      }
    }
  }

  try {
    data.validate();
  } catch (const InvalidEvent& e) {
    throw DataFormatError(events_name, 0, e.what());
  }
  return data;
}

Dataset load_long_csv(const std::string& events_path, const std::string& customers_path) {
  std::ifstream events(events_path);
  if (!events) throw DataFormatError(events_path, 0, "cannot open file");
  if (customers_path.empty()) return read_long_csv(events, nullptr, events_path);
  std::ifstream customers(customers_path);
  if (!customers) throw DataFormatError(customers_path, 0, "cannot open file");
  return read_long_csv(events, &customers, events_path, customers_path);
}

void write_long_csv(const Dataset& data, std::ostream& events, std::ostream* customers) {
  events << "event_id,alt_index,available,chosen";
  for (std::size_t j = 0; j < data.d_x; ++j) events << ",x_" << (j + 1);
  events << '\n';
  for (std::size_t t = 0; t < data.events.size(); ++t) {
    const ChoiceEvent& e = data.events[t];
    for (std::size_t i = 0; i < e.size(); ++i) {
      events << t << ',' << i << ',' << (e.available[i] ? 1 : 0) << ',' << (i == e.chosen ? 1 : 0);
      for (double v : e.product(i)) events << ',' << format17(v);
      events << '\n';
    }
  }
  if (customers == nullptr || data.d_z == 0) return;
  *customers << "event_id";
  for (std::size_t j = 0; j < data.d_z; ++j) *customers << ",z_" << (j + 1);
  *customers << '\n';
  for (std::size_t t = 0; t < data.events.size(); ++t) {
    *customers << t;
    for (double v : data.events[t].customer) *customers << ',' << format17(v);
    *customers << '\n';
  }
}

bool save_long_csv(const Dataset& data, const std::string& events_path,
                   const std::string& customers_path) {
  std::ofstream events(events_path, std::ios::binary);
  if (!events) throw std::runtime_error("cannot open '" + events_path + "' for writing");
  const bool with_customers = data.d_z > 0 && !customers_path.empty();
  if (!with_customers) {
    write_long_csv(data, events, nullptr);
  } else {
    std::ofstream customers(customers_path, std::ios::binary);
    if (!customers) throw std::runtime_error("cannot open '" + customers_path + "' for writing");
    write_long_csv(data, events, &customers);
    if (!customers) throw std::runtime_error("failed writing '" + customers_path + "'");
  }
  if (!events) throw std::runtime_error("failed writing '" + events_path + "'");
  return with_customers;
}

OneHotColumns one_hot(const std::vector<std::string>& labels, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  OneHotColumns out;
  std::map<std::string, std::size_t> column_of;
  bool any_rare = false;
  for (const auto& [label, count] : counts) {
    if (count >= min_count) {
      column_of[label] = out.names.size();
      out.names.push_back(label);
    } else {
      any_rare = true;
    }
  }
  const std::size_t rare = out.names.size();
  if (any_rare) out.names.emplace_back(kRareColumn);
  out.columns.assign(out.names.size(), std::vector<double>(labels.size(), 0.0));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto it = column_of.find(labels[r]);
    out.columns[it == column_of.end() ? rare : it->second][r] = 1.0;
  }
  return out;
}

}  // namespace rumnet
