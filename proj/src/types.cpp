#include "wfchain/types.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <vector>

#include "wfchain/error.hpp"

namespace wfchain {

bool Cia::within_unit() const {
  auto in = [](double x) { return x >= 0.0 && x <= 1.0; };
  return in(c) && in(i) && in(a);
}

std::string to_string(const Cia& v) { return fmt::format("{}|{}|{}", v.c, v.i, v.a); }

std::string_view to_string(ActionType t) {
  switch (t) {
    case ActionType::Insert: return "Insert";
    case ActionType::Switch: return "Switch";
    case ActionType::Skip: return "Skip";
    case ActionType::Rework: return "Rework";
    case ActionType::Redundancy: return "Redundancy";
    case ActionType::Reconfiguration: return "Reconfiguration";
  }
  return "?";
}

std::optional<ActionType> parse_action_type(std::string_view name) {
  for (auto t : kAllActionTypes)
    if (name == to_string(t)) return t;
  if (name == "ReConfiguration") return ActionType::Reconfiguration;
  return std::nullopt;
}

std::size_t ActionSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::string ActionSet::to_string() const {
  std::string out = "{";
  for_each([&](ActionType t) {
    if (out.size() > 1) out += ",";
    out += wfchain::to_string(t);
  });
  return out + "}";
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Low: return "Low";
    case Severity::Medium: return "Medium";
    case Severity::High: return "High";
  }
  return "?";
}

std::optional<Severity> parse_severity(std::string_view name) {
  if (name == "Low") return Severity::Low;
  if (name == "Medium") return Severity::Medium;
  if (name == "High") return Severity::High;
  return std::nullopt;
}

Severity severity_from_score(double score) {
  if (score < 1.0 / 3.0) return Severity::Low;
  if (score < 2.0 / 3.0) return Severity::Medium;
  return Severity::High;
}

Weights parse_weights(std::string_view text) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto field = text.substr(pos, comma - pos);
    double v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
      throw ConfigError(fmt::format("weights: '{}' is not a number", field));
    parts.push_back(v);
    pos = comma + 1;
  }
  if (parts.size() != 4)
    throw ConfigError(fmt::format("weights: expected 4 values, got {}", parts.size()));
  Weights w{parts[0], parts[1], parts[2], parts[3]};
  if (!w.valid()) throw ConfigError("weights: magnitudes must be nonnegative");
  return w;
}

std::string to_string(const Weights& w) {
  return fmt::format("{},{},{},{}", w.price, w.time, w.value, w.mitigation);
}

}  // namespace wfchain
