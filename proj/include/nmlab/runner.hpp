#pragma once

#include <string>

#include "nmlab/config.hpp"

namespace nmlab {

struct RunResult {
  int exit_code = 0;  // 0 all checks met, 1 a verification fell outside its bound
  std::string summary;
};

/// executes the experiment a config describes, writes its artifacts and a
/// manifest under cfg.out_dir, and reports the headline numbers
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace nmlab
