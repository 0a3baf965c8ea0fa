#pragma once

#include <stdexcept>
#include <string>

namespace nmlab {

/// bad or inconsistent experiment configuration (maps to CLI exit code 2)
class config_error : public std::runtime_error {
  public: using std::runtime_error::runtime_error;
};

/// a verification run could not be set up soundly, as opposed to failing its criterion
class setup_error : public std::runtime_error {
  public: using std::runtime_error::runtime_error;
};

/// the explicit time stepper would exceed its sub-step cap
class stiffness_error : public std::runtime_error {
  public: using std::runtime_error::runtime_error;
};

/// NaN, overflow, mass escaping the domain, or similar numerical breakdown
class numeric_error : public std::runtime_error {
  public: using std::runtime_error::runtime_error;
};

/// kernel density estimation has no usable bandwidth (for instance all samples coincide)
class degenerate_bandwidth_error : public std::runtime_error {
  public: using std::runtime_error::runtime_error;
};

}  // namespace nmlab
