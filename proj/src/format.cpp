#include "rnagg/format.hpp"

#include <charconv>
#include <cmath>

namespace rnagg {

std::string format_energy(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  double r = std::round(v * 100.0) / 100.0;
  if (r == 0.0) r = 0.0;  // drop negative zero
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r);
  std::string out(buf, ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

}  // namespace rnagg
