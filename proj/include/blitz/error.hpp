#pragma once

#include <stdexcept>
#include <string>

namespace blitz {

enum class Errc {
  EmptyColumn,
  UnknownSymbol,
  NonFiniteValue,
  BadPrecision,
  CapacityError,
  CorruptStream,
  RankOutOfRange,
  NotFound,
  TypeMismatch,
  SchemaError,
  ParseError,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace blitz
