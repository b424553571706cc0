#pragma once

#include "rsc/errors.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace rsc {

enum class Axis { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> all_axes{Axis::x, Axis::y, Axis::z};

constexpr std::size_t index(Axis axis) { return static_cast<std::size_t>(axis); }

constexpr std::string_view to_string(Axis axis)
{
  switch (axis) {
  case Axis::x: return "x";
  case Axis::y: return "y";
  case Axis::z: return "z";
  }
  return "?";
}

inline Axis axis_from_string(std::string_view name)
{
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  if (name == "z") return Axis::z;
  throw DomainError("unknown axis '" + std::string(name) + "'");
}

} // namespace rsc
