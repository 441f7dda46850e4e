#ifndef CTN_ERRORS_HPP
#define CTN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ctn {

/// Input outside the domain of a map or kernel (singular point, bad range).
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// Frequency with m and n of different parity.
struct parity_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature could not reach the requested tolerance.
struct quadrature_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symbol table missing an entry or inconsistent with its provenance.
struct table_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file or configuration.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace ctn

#endif
