#ifndef ZSML_ERRORS_HPP
#define ZSML_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace zsml {

// Base class for all library errors; the CLI maps these to exit code 2.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid inputs: bad shapes, violated contracts, unknown labels.
struct validation_error : error {
  using error::error;
};

// Text input that does not match the documented format. line is 1-based.
struct parse_error : error {
  parse_error(const std::string& source, int line_no, const std::string& what)
      : error(source + ":" + std::to_string(line_no) + ": " + what),
        line(line_no) {}
  int line;
};

// Numerical failure: divergence, singular solves, undefined distances.
struct numeric_error : error {
  using error::error;
};

} // namespace zsml

#endif // ZSML_ERRORS_HPP
