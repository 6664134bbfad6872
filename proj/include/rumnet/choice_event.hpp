#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rumnet {

class InvalidEvent : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One observed choice: customer features z, the offered alternatives'
// features x_1..x_n (row-major, n x d_x), an availability mask and the index
// of the chosen alternative.
struct ChoiceEvent {
  std::vector<double> customer;
  std::vector<double> product_features;
  std::vector<bool> available;
  std::size_t chosen = 0;

  std::size_t size() const noexcept { return available.size(); }
  std::size_t product_dim() const noexcept {
    return available.empty() ? 0 : product_features.size() / available.size();
  }
  std::size_t available_count() const noexcept;

  std::span<const double> product(std::size_t i) const {
    const std::size_t d = product_dim();
    return {product_features.data() + i * d, d};
  }
  std::span<double> product(std::size_t i) {
    const std::size_t d = product_dim();
    return {product_features.data() + i * d, d};
  }

  // Checks n >= 1, chosen in range and available, feature sizes, finiteness.
  void validate(std::size_t d_x, std::size_t d_z) const;

  bool operator==(const ChoiceEvent&) const = default;
};

ChoiceEvent make_event(std::vector<std::vector<double>> products, std::vector<double> customer,
                       std::size_t chosen, std::vector<bool> available = {});

struct Dataset {
  std::size_t d_x = 0;
  std::size_t d_z = 0;
  std::vector<ChoiceEvent> events;

  std::size_t size() const noexcept { return events.size(); }
  bool empty() const noexcept { return events.empty(); }
  std::size_t max_assortment() const noexcept;

  void validate() const;

  Dataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;
};

}  // namespace rumnet
