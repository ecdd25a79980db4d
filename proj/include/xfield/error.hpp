#pragma once

#include <stdexcept>
#include <string>

namespace xfield {

// Broad failure classes; the CLI maps each to an exit code.
enum class ErrorKind {
  Config,   // invalid spec or configuration (exit 1)
  Data,     // shape, format, checksum, empty class, I/O (exit 2)
  Numeric,  // domain or extrapolation failures (exit 3)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::Config: return 1;
      case ErrorKind::Data: return 2;
      case ErrorKind::Numeric: return 3;
    }
    return 3;
  }

 private:
  ErrorKind kind_;
};

#define XFIELD_DEFINE_ERROR(Name, Kind)                               \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Kind, what) {}     \
  };

XFIELD_DEFINE_ERROR(InvalidSpec, ErrorKind::Config)
XFIELD_DEFINE_ERROR(InvalidConfig, ErrorKind::Config)
XFIELD_DEFINE_ERROR(ShapeError, ErrorKind::Data)
XFIELD_DEFINE_ERROR(BoundsError, ErrorKind::Data)
XFIELD_DEFINE_ERROR(DataError, ErrorKind::Data)
XFIELD_DEFINE_ERROR(EmptyClassError, ErrorKind::Data)
XFIELD_DEFINE_ERROR(InvalidState, ErrorKind::Data)
XFIELD_DEFINE_ERROR(FormatError, ErrorKind::Data)
XFIELD_DEFINE_ERROR(ChecksumError, ErrorKind::Data)
XFIELD_DEFINE_ERROR(IoError, ErrorKind::Data)
XFIELD_DEFINE_ERROR(DomainError, ErrorKind::Numeric)
XFIELD_DEFINE_ERROR(ExtrapolationError, ErrorKind::Numeric)

#undef XFIELD_DEFINE_ERROR

}  // namespace xfield
