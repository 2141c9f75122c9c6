#ifndef TCW_ERRORS_HPP
#define TCW_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tcw {

struct SourceSpan {
  uint32_t line = 1;
  uint32_t column = 1;
  uint32_t length = 0;
};

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class SyntaxError : public Error {
public:
  SyntaxError(const std::string& what, SourceSpan where)
      : Error(what + " at " + std::to_string(where.line) + ":" +
              std::to_string(where.column)),
        span(where) {}
  SourceSpan span;
};

class ConfigError : public Error {
public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config error in " + field + ": " + what), field_path(field) {}
  std::string field_path;
};

class UnknownLabel : public Error {
public:
  explicit UnknownLabel(const std::string& name)
      : Error("unknown action label: " + name) {}
};

class ModeMixError : public Error {
public:
  ModeMixError() : Error("relative and absolute timing operators mixed in one term") {}
};

class InvalidRenaming : public Error {
public:
  explicit InvalidRenaming(const std::string& what) : Error("invalid renaming: " + what) {}
};

class OpenTermError : public Error {
public:
  explicit OpenTermError(const std::string& var)
      : Error("term has free recursion variable: " + var) {}
};

class DuplicateEquation : public Error {
public:
  explicit DuplicateEquation(const std::string& var)
      : Error("duplicate equation for variable: " + var) {}
};

class UnboundVariable : public Error {
public:
  explicit UnboundVariable(const std::string& var)
      : Error("right-hand side uses variable with no equation: " + var) {}
};

class UnknownVariable : public Error {
public:
  explicit UnknownVariable(const std::string& var)
      : Error("no equation for variable: " + var) {}
};

class NonTermination : public Error {
public:
  explicit NonTermination(uint64_t limit)
      : Error("rewriting exceeded step budget of " + std::to_string(limit)) {}
};

class UnguardedRecursion : public Error {
public:
  explicit UnguardedRecursion(const std::string& var)
      : Error("derivation requires unfolding an unguarded specification at " + var) {}
};

class BoundExceeded : public Error {
public:
  explicit BoundExceeded(const std::string& which)
      : Error("exploration bound exceeded: " + which), which_bound(which) {}
  std::string which_bound;
};

class ModeMismatch : public Error {
public:
  ModeMismatch() : Error("the two transition systems have different timing modes") {}
};

class TooLarge : public Error {
public:
  explicit TooLarge(const std::string& what) : Error("input too large: " + what) {}
};

class NotACluster : public Error {
public:
  explicit NotACluster(const std::string& why) : Error("not a cluster: " + why) {}
};

class ConfigOverflow : public Error {
public:
  explicit ConfigOverflow(const std::string& why) : Error("alphabet cap exceeded: " + why) {}
};

}  // namespace tcw

#endif
