#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace parakon {

/// A value lies outside the set an operation is defined on (negative mean
/// entry, point outside a domain closure, nonpositive u under a log, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The caller combined arguments that cannot work together (length
/// mismatches, dimension mismatches, CFL violations, bad config values).
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operator was evaluated at a vanishing gradient. Callers should use the
/// singular envelope (eval_h / eval_h_tilde) at such points.
class singular_point_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// Overflow, NaN or a broken monotonicity guarantee inside a numerical loop.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what,
                           std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(step ? what + " (step " + std::to_string(*step) + ")"
                                : what),
        step_(step) {}

  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

}  // namespace parakon
