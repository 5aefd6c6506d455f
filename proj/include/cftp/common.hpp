#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cftp {

// Thrown for invalid user input: bad model files, inconsistent rates,
// malformed events, failed build-time validation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a brute-force oracle is asked to enumerate more states than
// its configured limit.
class OracleLimitError : public std::runtime_error {
 public:
  explicit OracleLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an internal invariant is violated. Reaching this is a bug in
// the library or a corrupted model, never a user error.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& msg) : std::logic_error(msg) {}
};

inline constexpr std::uint64_t kDefaultOracleLimit = 1'000'000;

#define CFTP_CHECK(cond, msg)                       \
  do {                                              \
    if (!(cond)) throw ::cftp::InvariantError(msg); \
  } while (0)

}  // namespace cftp
