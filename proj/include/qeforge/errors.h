#ifndef QEFORGE_ERRORS_H_
#define QEFORGE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace qeforge {

// Bad user input or configuration. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A per-line problem (e.g. invalid UTF-8). Pipelines skip the line and count it.
class LineError : public InputError {
 public:
  using InputError::InputError;
};

// An internal contract was broken (inconsistent indices, malformed scripts).
// The CLI maps this to exit code 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A translation backend gave up after its retries.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qeforge

#endif  // QEFORGE_ERRORS_H_
