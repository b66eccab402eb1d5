#pragma once

#include <stdexcept>
#include <string>

namespace meshpose {

// Input content that breaks a contract: parse errors, invariant violations,
// shape mismatches. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem and stream failures. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace meshpose
