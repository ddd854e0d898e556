#pragma once

#include <stdexcept>
#include <string>

namespace layers {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class UnsupportedInput : public Error {
 public:
  using Error::Error;
};

/// Two adjacent vertices carry the same age; callers resample.
class TieError : public Error {
 public:
  TieError(unsigned u, unsigned v)
      : Error("age tie on edge (" + std::to_string(u) + ", " +
              std::to_string(v) + ")"),
        u_(u),
        v_(v) {}

  unsigned u() const noexcept { return u_; }
  unsigned v() const noexcept { return v_; }

 private:
  unsigned u_;
  unsigned v_;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class InvalidMode : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// An output path that cannot be written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace layers
