#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ergkit/banks.hpp"
#include "ergkit/rational.hpp"

namespace ergkit {

/// Closed set of properties usable inside `required` / `forbidden`.
/// The numeric ones apply to counts (and element-wise to sequences);
/// `distinct` applies to collections.
enum class Property { positive, even, odd, prime, composite, square, distinct };

std::string_view to_string(Property p) noexcept;
std::optional<Property> property_from_string(std::string_view name) noexcept;
bool is_numeric_property(Property p) noexcept;

/// True iff the integer-valued `x` has property `p`. Non-integers have none of
/// the numeric properties. `distinct` is not a numeric property and yields false.
bool has_property(const Rational& x, Property p);

struct TextList {
  std::vector<std::string> items;
  friend bool operator==(const TextList&, const TextList&) = default;
};

struct PropertyList {
  std::vector<Property> items;
  friend bool operator==(const PropertyList&, const PropertyList&) = default;
};

/// A fully resolved condition parameter. A Dimension value is a reference to
/// another count measurement (e.g. "a multiple of the number of sentences").
using Parameter = std::variant<Rational, std::string, TextList, PropertyList, Dimension>;

/// Value produced by a knowledge or mathematical node.
using NodeValue = std::variant<Rational, std::string>;

std::string describe(const Parameter& p);
std::string describe(const NodeValue& v);

}  // namespace ergkit
