#include "rumnet/choice_event.hpp"

#include <algorithm>
#include <cmath>

namespace rumnet {

std::size_t ChoiceEvent::available_count() const noexcept {
  return static_cast<std::size_t>(std::count(available.begin(), available.end(), true));
}

void ChoiceEvent::validate(std::size_t d_x, std::size_t d_z) const {
  const std::size_t n = size();
  if (n == 0) {
    throw InvalidEvent("choice event has no alternatives");
  }
  if (product_features.size() != n * d_x) {
    throw InvalidEvent("choice event: expected " + std::to_string(n * d_x) +
                       " product feature values (" + std::to_string(n) + " x " +
                       std::to_string(d_x) + "), got " + std::to_string(product_features.size()));
  }
  if (customer.size() != d_z) {
    throw InvalidEvent("choice event: expected " + std::to_string(d_z) +
                       " customer features, got " + std::to_string(customer.size()));
  }
  if (chosen >= n) {
    throw InvalidEvent("choice event: chosen index " + std::to_string(chosen) +
                       " out of range for " + std::to_string(n) + " alternatives");
  }
  if (!available[chosen]) {
    throw InvalidEvent("choice event: chosen alternative " + std::to_string(chosen) +
                       " is unavailable");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(product_features.begin(), product_features.end(), finite) ||
      !std::all_of(customer.begin(), customer.end(), finite)) {
    throw InvalidEvent("choice event: non-finite feature value");
  }
}

ChoiceEvent make_event(std::vector<std::vector<double>> products, std::vector<double> customer,
                       std::size_t chosen, std::vector<bool> available) {
  ChoiceEvent e;
  e.customer = std::move(customer);
  for (const auto& p : products) {
    e.product_features.insert(e.product_features.end(), p.begin(), p.end());
  }
  e.available = available.empty() ? std::vector<bool>(products.size(), true) : std::move(available);
  e.chosen = chosen;
  return e;
}

std::size_t Dataset::max_assortment() const noexcept {
  std::size_t m = 0;
  for (const auto& e : events) {
    m = std::max(m, e.size());
  }
  return m;
}

void Dataset::validate() const {
  for (std::size_t t = 0; t < events.size(); ++t) {
    try {
      events[t].validate(d_x, d_z);
    } catch (const InvalidEvent& err) {
      throw InvalidEvent("event " + std::to_string(t) + ": " + err.what());
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.d_x = d_x;
  out.d_z = d_z;
  out.events.reserve(indices.size());
  for (std::size_t i : indices) {
    out.events.push_back(events.at(i));
  }
  return out;
}

}  // namespace rumnet
