#pragma once

#include <stdexcept>
#include <string>

namespace tracefail {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: trace records, config files, serialized models.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An event type or symbol that the frozen symbol table does not know.
class FrozenTableError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace tracefail
