#pragma once

#include <stdexcept>
#include <string>

namespace palletproj {

// Failure classes of the pipeline. The CLI maps these onto disjoint exit
// codes, so every library error carries one.
enum class ErrorCode {
  InvalidArgument,    // bad parameter or malformed input value
  ParseError,         // unreadable config / scene / pose / image file
  Io,                 // filesystem failure
  DegenerateGeometry, // camera on (or too close to) a projection plane
  SameHeight,         // pallet straddles the camera height, no usable plane
  LowContrast,        // flank regions do not separate pallet and background
  NoLine,             // Hough found no boundary line
  NoPalletAtDepth,    // depth sweep never scored above the detection threshold
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &msg)
      : std::runtime_error(msg), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string &msg) {
  throw Error(code, msg);
}

inline const char *error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::Io: return "io-error";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::SameHeight: return "same-height";
    case ErrorCode::LowContrast: return "low-contrast";
    case ErrorCode::NoLine: return "no-line";
    case ErrorCode::NoPalletAtDepth: return "no-pallet-at-depth";
  }
  return "unknown";
}

}  // namespace palletproj
