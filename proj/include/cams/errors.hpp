#pragma once

#include <stdexcept>
#include <string>

namespace cams {

// Malformed input files (bad CSV cell, ragged row, wrong magic bytes).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally inconsistent data (length mismatches, asymmetric similarity
// matrix, labels that do not cover their range).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Contradictory experiment configuration, detected before any compute.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Breakdown inside a numerical routine (NaN iterate, failed factorization).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cams
