#pragma once

#include <stdexcept>
#include <string>

namespace qrg {

enum class Errc {
  invalid_parameter,
  invalid_input,
  sampling_failure,
  size_limit,
  ball_too_large,
  insufficient_data,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::invalid_input: return "invalid-input";
    case Errc::sampling_failure: return "sampling-failure";
    case Errc::size_limit: return "size-limit";
    case Errc::ball_too_large: return "ball-too-large";
    case Errc::insufficient_data: return "insufficient-data";
  }
  return "unknown";
}

inline void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace qrg
