#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wfchain {

using TaskIndex = std::size_t;

// Confidentiality / integrity / availability triple.
struct Cia {
  double c = 0.0;
  double i = 0.0;
  double a = 0.0;

  bool is_zero() const { return c == 0.0 && i == 0.0 && a == 0.0; }
  bool within_unit() const;
  friend bool operator==(const Cia&, const Cia&) = default;
};

std::string to_string(const Cia& v);

enum class ActionType : std::uint8_t {
  Insert,
  Switch,
  Skip,
  Rework,
  Redundancy,
  Reconfiguration,
};

inline constexpr std::array<ActionType, 6> kAllActionTypes = {
    ActionType::Insert, ActionType::Switch,     ActionType::Skip,
    ActionType::Rework, ActionType::Redundancy, ActionType::Reconfiguration};

std::string_view to_string(ActionType t);
// Accepts the canonical names plus the "ReConfiguration" spelling.
std::optional<ActionType> parse_action_type(std::string_view name);

// Small fixed bitset over the six action types.
class ActionSet {
 public:
  ActionSet() = default;
  ActionSet(std::initializer_list<ActionType> types) {
    for (auto t : types) insert(t);
  }

  void insert(ActionType t) { bits_ |= bit(t); }
  void erase(ActionType t) { bits_ &= static_cast<std::uint8_t>(~bit(t)); }
  bool contains(ActionType t) const { return (bits_ & bit(t)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  bool subset_of(const ActionSet& o) const { return (bits_ & ~o.bits_) == 0; }

  ActionSet operator&(const ActionSet& o) const { return from_bits(bits_ & o.bits_); }
  ActionSet operator|(const ActionSet& o) const { return from_bits(bits_ | o.bits_); }
  friend bool operator==(const ActionSet&, const ActionSet&) = default;

  template <typename F>
  void for_each(F&& f) const {
    for (auto t : kAllActionTypes)
      if (contains(t)) f(t);
  }

  std::string to_string() const;

 private:
  static std::uint8_t bit(ActionType t) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t));
  }
  static ActionSet from_bits(unsigned b) {
    ActionSet s;
    s.bits_ = static_cast<std::uint8_t>(b);
    return s;
  }
  std::uint8_t bits_ = 0;
};

enum class Severity : std::uint8_t { Low = 0, Medium = 1, High = 2 };

std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view name);
// Low = [0, 1/3), Medium = [1/3, 2/3), High = [2/3, 1]. Scores outside [0,1] are clamped.
Severity severity_from_score(double score);

// Sign-free magnitudes of the four cost attributes; the cost engine applies
// + to price and time and - to value and mitigation score.
struct Weights {
  double price = 1.0;
  double time = 1.0;
  double value = 1.0;
  double mitigation = 1.0;

  bool valid() const { return price >= 0 && time >= 0 && value >= 0 && mitigation >= 0; }
  Weights scaled(double k) const { return {price * k, time * k, value * k, mitigation * k}; }
  friend bool operator==(const Weights&, const Weights&) = default;
};

// Parses "a,b,c,d" (price,time,value,mitigation).
Weights parse_weights(std::string_view text);
std::string to_string(const Weights& w);

}  // namespace wfchain
