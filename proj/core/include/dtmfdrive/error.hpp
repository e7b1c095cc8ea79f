#pragma once

#include <stdexcept>
#include <string>

namespace dtmfdrive {

// Base for all errors raised by the library. Invalid arguments and invalid
// configurations map to ConfigError; malformed input data maps to DataError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace dtmfdrive
