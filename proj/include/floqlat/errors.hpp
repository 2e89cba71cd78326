#pragma once

#include <stdexcept>
#include <string>

namespace floqlat {

/// Topological invariant requested on a configuration where it is not
/// defined (band gap closes on the sampling grid). Carries the offending
/// momentum so callers can report it.
class IllDefinedInvariant : public std::runtime_error {
 public:
  IllDefinedInvariant(const std::string& msg, double k)
      : std::runtime_error(msg), offending_k(k) {}
  double offending_k;
};

/// Band selection passed to a Chern computation is not isolated from the
/// remaining bands anywhere on the grid.
class NotIsolatedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A builder precondition was violated (e.g. chiral solver on a
/// non-chiral operator).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time integration failed its internal accuracy checks (trace drift).
class IntegratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Density matrix developed an eigenvalue below the allowed floor.
class PositivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace floqlat
