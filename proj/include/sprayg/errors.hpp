#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sprayg {

// Exit-code classes used by the CLI: input errors map to 2, numerical failures to 3.
enum class ErrorClass { input, numerical };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorClass cls, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)), class_(cls) {}
  const std::string& kind() const noexcept { return kind_; }
  ErrorClass error_class() const noexcept { return class_; }

 private:
  std::string kind_;
  ErrorClass class_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("SyntaxError", ErrorClass::input,
              "syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(const std::string& name, std::size_t position)
      : Error("UnknownIdentifier", ErrorClass::input,
              "unknown identifier '" + name + "' at position " + std::to_string(position)),
        name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("SchemaError", ErrorClass::input, what) {}
};

class NotComposable : public Error {
 public:
  explicit NotComposable(const std::string& what) : Error("NotComposable", ErrorClass::input, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("DomainError", ErrorClass::numerical, what) {}
};

class Blowup : public Error {
 public:
  explicit Blowup(const std::string& what) : Error("Blowup", ErrorClass::numerical, what) {}
};

class LeftDomain : public Error {
 public:
  explicit LeftDomain(const std::string& what) : Error("LeftDomain", ErrorClass::numerical, what) {}
};

class IllConditioned : public Error {
 public:
  explicit IllConditioned(const std::string& what) : Error("IllConditioned", ErrorClass::numerical, what) {}
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what)
      : Error("ConsistencyError", ErrorClass::numerical, what) {}
};

}  // namespace sprayg
