#pragma once

#include <stdexcept>
#include <string>

namespace edvrp {

enum class ErrorCode {
  InvalidSpec,
  InvalidGraph,
  InvalidPlan,
  MissingEdge,
  IllegalAction,
  DisconnectedRoads,
  TooLarge,
  Io,
  Parse,
  Protocol,
};

const char* error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// protocol server and the CLI can map it to a stable identifier.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edvrp
