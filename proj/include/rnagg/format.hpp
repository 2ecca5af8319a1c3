#pragma once

#include <string>

#include "rnagg/energy.hpp"

namespace rnagg {

/// Rounded to 0.01 kcal/mol, shortest form, at least one decimal
/// ("-3.0", "-0.6", "4.25"); "+inf" for infinity.
std::string format_energy(double v);

inline std::string format_observable(const Observable& o) { return format_energy(o.value()); }

}  // namespace rnagg
