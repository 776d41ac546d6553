#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"

namespace qrg::cli {

enum ExitCode { kPass = 0, kInvalidConfig = 2, kCheckFailed = 3, kUnresolved = 4 };

struct RunOptions {
  bool summary = false;
  std::ostream* log = nullptr;  // summary and warnings; stderr when null
};

int cmd_generate(const ExperimentConfig& c, const RunOptions& o);
int cmd_mix(const ExperimentConfig& c, const RunOptions& o);
int cmd_spectral(const ExperimentConfig& c, const RunOptions& o);
int cmd_entropy(const ExperimentConfig& c, const RunOptions& o);
int cmd_couple(const ExperimentConfig& c, const RunOptions& o);
int cmd_verify(const ExperimentConfig& c, const RunOptions& o);

// Runs `command` with error-to-exit-code mapping.
int dispatch(const std::string& command, const ExperimentConfig& c, const RunOptions& o);

}  // namespace qrg::cli
