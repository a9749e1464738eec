// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace eegcrypt {

/// Coarse error category. The CLI maps each one to a distinct exit code.
enum class ErrorKind { usage, data, crypto };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class CryptoError : public Error {
 public:
  explicit CryptoError(const std::string& what) : Error(ErrorKind::crypto, what) {}
};

/// Plaintext outside [0, n).
class RangeError : public CryptoError {
 public:
  using CryptoError::CryptoError;
};

/// Ciphertext not in Z*_{n^2}.
class MalformedCiphertext : public CryptoError {
 public:
  using CryptoError::CryptoError;
};

/// Operands carry different fixed-point scale levels.
class ScaleMismatch : public CryptoError {
 public:
  using CryptoError::CryptoError;
};

/// Signed magnitude would reach n/2 and wrap.
class OverflowError : public CryptoError {
 public:
  using CryptoError::CryptoError;
};

}  // namespace eegcrypt
