#ifndef FORTINET_ERROR_HPP
#define FORTINET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fortinet {

enum class ErrorKind {
  invalid_input,   // malformed problem data or arguments
  cap_exceeded,    // an exact enumeration would exceed the configured cap
  unattainable,    // an objective cannot be met even with every node operational
  infeasible,      // an empty weight set
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(ErrorKind::invalid_input, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(what);
}

}  // namespace fortinet

#endif
