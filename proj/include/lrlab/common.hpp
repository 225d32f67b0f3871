#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lrlab {

using cd = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

// Invalid mathematical input (bad site, negative tolerance, odd measure, ...).
struct domain_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A configured work budget (enumeration size, quadrature evaluations,
// iteration cap) was exhausted before the requested accuracy was reached.
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or schema-violating run configuration; maps to CLI exit 64.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw domain_error(msg);
}

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace lrlab
